import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_schedule, random_state, random_su2
from qgtop import evolution, gates, linalg, pauli, phase, schmidt
from qgtop.evolution import Schedule, Segment
from qgtop.pauli import HamiltonianSpec

BELL = np.array([1, 0, 0, 1]) / math.sqrt(2)


def ray_distance(a, b):
    return np.linalg.norm(a - np.vdot(b, a) / abs(np.vdot(b, a)) * b)


def test_concurrence_examples():
    assert schmidt.concurrence(BELL) == pytest.approx(1.0)
    assert schmidt.concurrence([0, 1, 0, 0]) == 0.0
    psi = np.array([0.6, 0, 0, 0.8])
    assert schmidt.concurrence(psi) == pytest.approx(0.96, abs=1e-15)
    assert schmidt.concurrence_amplitudes(psi) == pytest.approx(0.96, abs=1e-15)


def test_concurrence_wrong_dimension():
    with pytest.raises(schmidt.SchmidtError):
        schmidt.concurrence([1, 0])


def test_decompose_unequal_superposition():
    f = schmidt.schmidt_decompose([0.6, 0, 0, 0.8])
    assert f.alpha == pytest.approx(2 * math.acos(0.8), abs=1e-12)
    assert f.alpha == pytest.approx(1.2870022175865687, abs=1e-12)
    assert f.theta1 == pytest.approx(math.pi) and f.theta2 == pytest.approx(math.pi)
    assert math.sin(f.alpha) == pytest.approx(0.96, abs=1e-12)


def test_decompose_product_state():
    f = schmidt.schmidt_decompose([1, 0, 0, 0])
    assert f.alpha == 0.0 and f.beta == 0.0 and f.alpha_degenerate
    assert f.theta1 == 0.0 and f.theta2 == 0.0


def test_decompose_bell_state():
    f = schmidt.schmidt_decompose(BELL)
    assert f.alpha == pytest.approx(math.pi / 2) and f.maximal
    assert f.beta == pytest.approx(0.0, abs=1e-12)
    assert f.theta1 == 0.0


def test_schmidt_vector_examples():
    def vec(alpha, beta):
        return schmidt.schmidt_vector(schmidt.SchmidtForm(alpha, beta, 0.3, 0.2, 1.0, 2.0)).as_array()

    assert np.allclose(vec(0, 0), [0, 0, 1])
    assert np.allclose(vec(math.pi / 2, 0), [1, 0, 0])
    assert np.allclose(vec(math.pi / 4, math.pi / 2), [0, math.sqrt(2) / 2, math.sqrt(2) / 2])


def test_anchored_sigma_tilde_matches_pauli_products():
    sx, sy, sz = schmidt.sigma_tilde()
    p = pauli.pauli_matrix
    assert np.allclose(sx, 0.5 * (p("XX") - p("YY")))
    assert np.allclose(sy, 0.5 * (p("XY") + p("YX")))
    # restricted to span{|00>, |11>}
    proj = np.diag([1, 0, 0, 1])
    assert np.allclose(sz, proj @ (0.5 * (p("ZI") + p("IZ"))) @ proj)


def test_sigma_tilde_expectation_for_anchored_state():
    form = schmidt.SchmidtForm(math.pi / 4, math.pi / 2, 0.0, 0.0, 0.0, 0.0)
    psi = schmidt.reconstruct(form)
    assert np.allclose(schmidt.sigma_tilde_expectation(psi, form), [0, math.sqrt(2) / 2, math.sqrt(2) / 2])


def test_closed_form_stationary_ray_is_zero():
    psi = gates.family_state("sym", 0.7, 0.2)
    sched = gates.build("SWAP1").schedule
    traj = evolution.evolve_state(sched, psi)
    assert schmidt.gamma_closed_form(traj.states).gamma == pytest.approx(0.0, abs=1e-12)


def test_closed_form_separable_path():
    # tilted product state precessing under a field on qubit 1: phase is 2pi cos(theta1)
    theta = 0.9
    psi = np.kron(schmidt.bloch_ket(theta, 0.4), schmidt.bloch_ket(0.0, 0.0))
    sched = Schedule(2, (Segment(HamiltonianSpec(2, ((1.0, "ZI"),)), math.pi),))
    traj = evolution.evolve_state(sched, psi)
    cf = schmidt.gamma_closed_form(traj.states)
    g = phase.geometric_phase(traj).gamma
    assert cf.integral == pytest.approx(math.pi * math.cos(theta), abs=1e-9)
    assert abs(linalg.principal_arg(cf.gamma - g)) < 1e-9


def test_closed_form_antisymmetric_heisenberg():
    a0, b0 = 0.9, 0.4
    psi = gates.family_state("asym", a0, b0)
    sched = Schedule(2, (Segment(pauli.heisenberg(1.0), math.pi),))
    traj = evolution.evolve_state(sched, psi)
    # the path crosses alpha = pi/2, where the Schmidt labels swap
    cf = schmidt.gamma_closed_form(traj.states)
    target = 2 * math.pi * math.sin(a0) * math.cos(b0)
    assert abs(linalg.principal_arg(cf.gamma - target)) < 1e-6


def test_closed_form_rejects_singular_path():
    psi = np.array([math.cos(1e-8), 0, 0, math.sin(1e-8)])
    with pytest.raises(schmidt.ClosedFormInapplicable):
        schmidt.gamma_closed_form(np.array([psi, psi]))


def test_local_field_closed_form():
    rng = np.random.default_rng(21)
    for _ in range(5):
        psi = random_state(rng)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        terms = tuple((float(c), s) for c, s in zip(axis, ("XI", "YI", "ZI")))
        sched = Schedule(2, (Segment(HamiltonianSpec(2, terms), 2 * math.pi),))
        g = phase.geometric_phase(evolution.evolve_state(sched, psi)).gamma
        pred = schmidt.local_field_phase(psi, axis)
        assert abs(linalg.principal_arg(g - pred)) < 1e-5


states = st.integers(0, 2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(states)
def test_round_trip_and_concurrence(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng)
    f = schmidt.schmidt_decompose(psi)
    assert np.linalg.norm(schmidt.reconstruct(f) - psi) < 1e-9
    assert math.sin(f.alpha) == pytest.approx(schmidt.concurrence(psi), abs=1e-10)
    assert 0 <= f.alpha <= math.pi / 2 and 0 <= f.beta < 2 * math.pi
    assert 0 <= f.theta1 <= math.pi and 0 <= f.phi1 < 2 * math.pi


@settings(max_examples=200, deadline=None)
@given(states)
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng)
    moved = np.kron(random_su2(rng), random_su2(rng)) @ psi
    assert schmidt.concurrence(moved) == pytest.approx(schmidt.concurrence(psi), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(states)
def test_local_expectation_law(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng)
    f = schmidt.schmidt_decompose(psi)
    one, two = schmidt.local_expectations(psi)
    assert np.allclose(one, f.n1 * math.cos(f.alpha), atol=1e-9)
    assert np.allclose(two, f.n2 * math.cos(f.alpha), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(states)
def test_sigma_tilde_vector(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng)
    f = schmidt.schmidt_decompose(psi)
    assert np.allclose(schmidt.sigma_tilde_expectation(psi, f), schmidt.schmidt_vector(f).as_array(), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(states)
def test_closed_form_matches_definition_on_cyclic_paths(seed):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, max_segments=3, durations=(0.1, 2.0))
    # the Bloch angles move fast near the poles, so sample more finely than the default
    traj = evolution.propagate(s, steps=1024)
    psi = linalg.eig_unitary(traj.final).eigenvectors[:, int(rng.integers(4))]
    traj = evolution.refine_for_state(traj, psi)
    try:
        cf = schmidt.gamma_closed_form(traj.states, margin=0.05)
    except schmidt.ClosedFormInapplicable:
        return
    g = phase.geometric_phase(traj).gamma
    assert abs(linalg.principal_arg(cf.gamma - g)) < 1e-5
