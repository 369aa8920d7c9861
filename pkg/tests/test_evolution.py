import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_schedule, random_state
from qgtop import evolution, gates, linalg, pauli, phase
from qgtop.evolution import BUILTIN_RAMPS, Schedule, Segment

SWAP = gates.SWAP


def swap1_segment(lam=1.0):
    return Segment(pauli.heisenberg(lam), math.pi / (4 * lam), math.pi / 4)


def test_swap1_single_segment():
    traj = evolution.propagate(Schedule(2, (swap1_segment(),)))
    assert np.allclose(traj.final, SWAP, atol=1e-12)
    assert np.allclose(traj.unitaries[0], np.eye(4))


def test_three_cross_resonance_segments_give_swap():
    w = 1.0
    segs = (
        Segment(pauli.cross_resonance(w, 1), math.pi / (2 * w)),
        Segment(pauli.cross_resonance(w, 2), math.pi / (2 * w)),
        Segment(pauli.cross_resonance(w, 1), math.pi / (2 * w)),
    )
    u = evolution.propagate(Schedule(2, segs)).final
    assert gates.phase_distance(u, SWAP) < 1e-10


def test_zero_or_negative_duration_rejected():
    with pytest.raises(evolution.ScheduleError):
        Segment(pauli.heisenberg(1.0), 0.0)
    with pytest.raises(evolution.ScheduleError):
        Schedule(2, ())
    with pytest.raises(evolution.ScheduleError):
        Schedule(2, (swap1_segment(),), Fraction(0))


def test_fractional_cycles_rules():
    s = swap1_segment()
    Schedule(2, (s, s), Fraction(1, 2))
    with pytest.raises(evolution.ScheduleError):
        Schedule(2, (s,), Fraction(1, 2))
    with pytest.raises(evolution.ScheduleError):
        Schedule(2, (s, s), Fraction(1, 3))


def test_half_cycle_is_first_half_of_list():
    s = swap1_segment()
    sched = Schedule(2, (s, s), Fraction(3, 2))
    assert len(sched.expanded()) == 3
    assert np.allclose(evolution.propagate(sched).final, SWAP, atol=1e-10)


def test_state_fixed_by_swap():
    psi = np.array([1, 0, 0, 0], dtype=complex)
    traj = evolution.evolve_state(Schedule(2, (swap1_segment(),)), psi)
    assert abs(np.vdot(psi, traj.states[-1])) == pytest.approx(1.0)


def test_cnot_maps_10_to_11():
    seg = Segment(pauli.cross_resonance(1.0), math.pi / 2)
    traj = evolution.evolve_state(Schedule(2, (seg,)), [0, 0, 1, 0])
    assert abs(traj.states[-1][3]) == pytest.approx(1.0)


def test_bell_state_returns_under_swap_squared():
    psi = gates.family_state("asym", math.pi / 2, 0.0)
    sched = gates.build("SWAP1").schedule
    traj = evolution.evolve_state(sched, psi)
    assert abs(np.vdot(psi, traj.states[-1])) == pytest.approx(1.0, abs=1e-12)


def test_unnormalised_state_rejected():
    with pytest.raises(evolution.ScheduleError):
        evolution.evolve_state(Schedule(2, (swap1_segment(),)), [1, 1, 0, 0])


def test_const_ramp_leaves_segment_unchanged():
    s = swap1_segment()
    assert evolution.apply_ramp(s, BUILTIN_RAMPS["const"]) is s


@pytest.mark.parametrize("name", ["tent", "trapezoid"])
def test_ramped_segment_has_same_final_unitary(name):
    s = swap1_segment()
    r = evolution.apply_ramp(s, BUILTIN_RAMPS[name])
    assert r.duration > s.duration
    assert r.clock == pytest.approx(s.duration, rel=1e-14)
    u0 = evolution.propagate(Schedule(2, (s,))).final
    u1 = evolution.propagate(Schedule(2, (r,))).final
    assert np.allclose(u0, u1, atol=1e-9)


def test_ramp_profile_must_be_positive():
    with pytest.raises(evolution.ScheduleError):
        evolution.RampProfile("bad", ((0.0, 1.0), (0.5, 0.0), (1.0, 1.0)))


def test_ramp_cumulative_is_exact_integral():
    prof = BUILTIN_RAMPS["tent"]
    s = np.linspace(0, 1, 2001)
    numeric = np.concatenate([[0], np.cumsum(0.5 * (prof.value(s)[1:] + prof.value(s)[:-1]) * np.diff(s))])
    assert np.allclose(prof.cumulative(s), numeric, atol=1e-12)  # piecewise linear: trapezoid exact on nodes
    assert prof.mean() == pytest.approx(0.55)


def midpoint_oracle(seg: Segment, psi0, n=20000):
    """Midpoint exponential stepping of i dpsi/dt = lambda(t) H psi."""
    h = pauli.to_matrix(seg.effective())
    eig = linalg.eig_hermitian(h)
    dt = seg.duration / n
    psi = np.asarray(psi0, dtype=complex)
    conn = 0.0
    for k in range(n):
        lam = float(seg.ramp.value((k + 0.5) * dt / seg.duration))
        nxt = linalg.expm_minus_iht(eig, lam * dt) @ psi
        conn -= np.angle(np.vdot(psi, nxt))
        psi = nxt
    return psi, conn


def test_ramped_state_matches_midpoint_oracle():
    rng = np.random.default_rng(5)
    seg = evolution.apply_ramp(swap1_segment(), BUILTIN_RAMPS["tent"])
    psi0 = random_state(rng)
    final_oracle, conn_oracle = midpoint_oracle(seg, psi0)
    traj = evolution.evolve_state(Schedule(2, (seg,)), psi0)
    assert np.allclose(traj.states[-1], final_oracle, atol=1e-7)
    assert phase.geometric_phase(traj).connection_integral == pytest.approx(conn_oracle, abs=1e-6)


def test_determinant_law_within_segment():
    rng = np.random.default_rng(7)
    h = pauli.gauge_shift(pauli.entangling(0.3, -0.2, 0.9), 0.7)
    seg = Segment(h, 1.3)
    traj = evolution.propagate(Schedule(2, (seg,)))
    dets = np.linalg.det(traj.unitaries)
    expected = np.exp(-1j * 4 * 0.7 * traj.times)
    assert np.allclose(dets, expected, atol=1e-12)


def test_step_control_respects_det_limit():
    h = pauli.gauge_shift(pauli.heisenberg(1.0), 50.0)
    traj = evolution.propagate(Schedule(2, (Segment(h, 2.0),)))
    steps = np.angle(np.linalg.det(traj.unitaries[1:]) / np.linalg.det(traj.unitaries[:-1]))
    assert np.max(np.abs(steps)) < math.pi / 2
    assert traj.spans[0].stop % 2 == 0


def test_step_control_cap_reports_segment():
    h = pauli.heisenberg(1e9)
    sched = Schedule(2, (swap1_segment(), Segment(h, 1.0)))
    with pytest.raises(evolution.StepControlError) as info:
        evolution.propagate(sched)
    assert info.value.segment == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_cycles_equal_square_of_one(seed):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, max_segments=3, durations=(0.1, 2.0))
    u1 = evolution.propagate(s).final
    u2 = evolution.propagate(s.with_cycles(2)).final
    assert np.allclose(u2, u1 @ u1, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_samples_are_unitary_and_final_is_ordered_product(seed):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, max_segments=4, durations=(0.1, 2.0))
    traj = evolution.propagate(s)
    assert max(linalg.unitarity_defect(u) for u in traj.unitaries[:: 64]) < 1e-8
    assert np.allclose(traj.final, gates.product_unitary(s.expanded()), atol=1e-10)
    boundary_times = np.cumsum([seg.duration for seg in s.expanded()])
    for t in boundary_times:
        assert np.min(np.abs(traj.times - t)) < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_refinement_changes_phase_negligibly(seed):
    rng = np.random.default_rng(seed)
    s = random_schedule(rng, max_segments=3, durations=(0.1, 2.0))
    psi = random_state(rng)
    g1 = phase.geometric_phase(evolution.evolve_state(s, psi)).gamma
    g2 = phase.geometric_phase(evolution.evolve_state(s, psi, steps=2 * 4096)).gamma
    d = abs(linalg.principal_arg(g1 - g2))
    assert d < 1e-8
