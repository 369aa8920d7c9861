"""Shared generators for tests."""

import numpy as np

from qgtop.evolution import Schedule, Segment
from qgtop.pauli import HamiltonianSpec

LOCAL_STRINGS = ("XI", "YI", "ZI", "IX", "IY", "IZ")
ENTANGLING_STRINGS = ("XX", "YY", "ZZ")


def random_spec(rng, local=True, entangling=True, scale=1.0) -> HamiltonianSpec:
    terms = []
    if entangling:
        terms += [(scale * rng.uniform(-1, 1), s) for s in ENTANGLING_STRINGS]
    if local:
        terms += [(scale * rng.uniform(-1, 1), s) for s in LOCAL_STRINGS]
    return HamiltonianSpec(2, tuple(terms))


def random_schedule(rng, max_segments=5, local=True, entangling=True, durations=(0.1, 5.0)) -> Schedule:
    n = int(rng.integers(1, max_segments + 1))
    segs = tuple(
        Segment(random_spec(rng, local, entangling), float(rng.uniform(*durations))) for _ in range(n)
    )
    return Schedule(2, segs)


def local_field_schedule(rng, max_segments=5) -> Schedule:
    """Fields on qubit 1 and qubit 2 only; no coupling."""
    return random_schedule(rng, max_segments, local=True, entangling=False)


def random_state(rng, dim=4) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_su2(rng) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b = q[0] + 1j * q[3], q[2] + 1j * q[1]
    return np.array([[a, -b.conjugate()], [b, a.conjugate()]])
