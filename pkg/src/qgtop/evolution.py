"""Piecewise-constant schedules and exactly sampled trajectories.

Within a segment the propagator is exp(-i H_eff Lambda(t)), where H_eff
includes the global-phase gauge and Lambda is the segment clock: plain
time for abrupt segments, the integral of the ramp profile otherwise.
Samples are therefore exact values of the continuous solution.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import linalg
from .pauli import HamiltonianSpec, gauge_shift, to_matrix

DEFAULT_STEPS = 256
MAX_STEPS = 2**20
# spectral spread times clock step; keeps Pancharatnam sums at ~1e-9 after extrapolation
ACCURACY_STEP = 0.02
DET_STEP_LIMIT = math.pi / 2
OVERLAP_FLOOR = 0.9
NORM_TOL = 1e-10


class ScheduleError(ValueError):
    pass


class StepControlError(RuntimeError):
    def __init__(self, segment: int, reason: str):
        self.segment = segment
        super().__init__(f"step control failed on segment {segment}: {reason}")


# ramps --------------------------------------------------------------------

@dataclass(frozen=True)
class RampProfile:
    """Piecewise-linear strength lambda(s) on normalised time s in [0, 1]."""

    name: str
    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(s), float(v)) for s, v in self.breakpoints)
        if len(pts) < 2:
            raise ScheduleError("ramp profile needs at least two breakpoints")
        s = [p[0] for p in pts]
        if s[0] != 0.0 or s[-1] != 1.0 or any(b <= a for a, b in zip(s, s[1:])):
            raise ScheduleError("ramp breakpoints must increase strictly from s=0 to s=1")
        if min(p[1] for p in pts) <= 0.0:
            raise ScheduleError(f"ramp profile {self.name!r} must be strictly positive")
        object.__setattr__(self, "breakpoints", pts)

    @property
    def _s(self) -> np.ndarray:
        return np.array([p[0] for p in self.breakpoints])

    @property
    def _v(self) -> np.ndarray:
        return np.array([p[1] for p in self.breakpoints])

    def mean(self) -> float:
        """Integral of lambda over s in [0, 1] (exact trapezoid on breakpoints)."""
        s, v = self._s, self._v
        return float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(s)))

    def value(self, s) -> np.ndarray:
        return np.interp(s, self._s, self._v)

    def cumulative(self, s) -> np.ndarray:
        """Integral of lambda from 0 to s, exact for the piecewise-linear table."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        bs, bv = self._s, self._v
        area = np.concatenate([[0.0], np.cumsum(0.5 * (bv[1:] + bv[:-1]) * np.diff(bs))])
        idx = np.clip(np.searchsorted(bs, s, side="right") - 1, 0, len(bs) - 2)
        ds = s - bs[idx]
        slope = (bv[idx + 1] - bv[idx]) / (bs[idx + 1] - bs[idx])
        return area[idx] + bv[idx] * ds + 0.5 * slope * ds**2

    def is_constant_one(self) -> bool:
        return all(v == 1.0 for _, v in self.breakpoints)


BUILTIN_RAMPS = {
    "const": RampProfile("const", ((0.0, 1.0), (1.0, 1.0))),
    "tent": RampProfile("tent", ((0.0, 0.1), (0.5, 1.0), (1.0, 0.1))),
    "trapezoid": RampProfile("trapezoid", ((0.0, 0.1), (0.25, 1.0), (0.75, 1.0), (1.0, 0.1))),
}


def load_ramp_csv(path, name: str | None = None) -> RampProfile:
    """Two-column (s, lambda) table; a non-numeric first row is treated as a header."""
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0:
                    continue
                raise ScheduleError(f"{path}:{i + 1}: expected two numeric columns")
    return RampProfile(name or str(path), tuple(rows))


def resolve_ramp(name: str, sidecar_dir=None) -> RampProfile:
    if name in BUILTIN_RAMPS:
        return BUILTIN_RAMPS[name]
    if sidecar_dir is not None:
        import os

        path = os.path.join(sidecar_dir, name + ".csv")
        if os.path.exists(path):
            return load_ramp_csv(path, name)
    raise ScheduleError(f"unknown ramp profile {name!r}")


# schedules ----------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    hamiltonian: HamiltonianSpec
    duration: float
    global_phase: float = 0.0
    ramp: RampProfile | None = None

    def __post_init__(self):
        if not (self.duration > 0.0 and math.isfinite(self.duration)):
            raise ScheduleError(f"segment duration must be positive, got {self.duration}")

    @property
    def clock(self) -> float:
        """Total elapsed clock: the integral of the ramp over the segment."""
        if self.ramp is None:
            return self.duration
        return self.duration * self.ramp.mean()

    def effective(self) -> HamiltonianSpec:
        """Hamiltonian including the gauge term -global_phase / clock."""
        if self.global_phase == 0.0:
            return self.hamiltonian
        return gauge_shift(self.hamiltonian, -self.global_phase / self.clock)

    def bare(self) -> "Segment":
        return replace(self, global_phase=0.0)

    def clock_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.ramp is None:
            return t
        return self.duration * self.ramp.cumulative(t / self.duration)


def apply_ramp(segment: Segment, profile: RampProfile) -> Segment:
    """Reparametrise so the ramped clock reaches the original duration."""
    if segment.ramp is not None:
        raise ScheduleError("segment is already ramped")
    if profile.is_constant_one():
        return segment
    return replace(segment, duration=segment.duration / profile.mean(), ramp=profile)


@dataclass(frozen=True)
class Schedule:
    """One cycle of segments replayed ``cycles`` times."""

    qubits: int
    segments: tuple[Segment, ...]
    cycles: Fraction = Fraction(1)

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        m = Fraction(self.cycles)
        object.__setattr__(self, "cycles", m)
        if not segs:
            raise ScheduleError("schedule has no segments")
        for i, s in enumerate(segs):
            if s.hamiltonian.qubits != self.qubits:
                raise ScheduleError(
                    f"segment {i} acts on {s.hamiltonian.qubits} qubits, schedule has {self.qubits}"
                )
        if m <= 0:
            raise ScheduleError(f"cycles must be positive, got {m}")
        if m.denominator not in (1, 2):
            raise ScheduleError(f"cycles {m} unsupported: only integers and k + 1/2 are allowed")
        if m.denominator == 2:
            half = len(segs) // 2
            if len(segs) % 2 or segs[:half] != segs[half:]:
                raise ScheduleError("half-integer cycles need a segment list made of two identical halves")

    @property
    def dim(self) -> int:
        return 2**self.qubits

    def expanded(self) -> list[Segment]:
        whole = int(self.cycles)
        out = list(self.segments) * whole
        if self.cycles.denominator == 2:
            out += list(self.segments[: len(self.segments) // 2])
        return out

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.expanded())

    def bare(self) -> "Schedule":
        return replace(self, segments=tuple(s.bare() for s in self.segments))

    def with_cycles(self, cycles) -> "Schedule":
        return replace(self, cycles=Fraction(cycles))


# trajectories -------------------------------------------------------------

@dataclass(frozen=True)
class SegmentSpan:
    """Where one applied segment sits inside a trajectory's sample arrays."""

    start: int
    stop: int  # inclusive
    hamiltonian: np.ndarray  # H_eff
    clock: np.ndarray  # Lambda at samples start..stop, starting from 0
    trace: float

    @property
    def total_clock(self) -> float:
        return float(self.clock[-1])


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    unitaries: np.ndarray
    spans: tuple[SegmentSpan, ...]
    states: np.ndarray | None = None
    schedule: Schedule | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.unitaries[-1]

    def with_states(self, psi0) -> "Trajectory":
        psi0 = np.asarray(psi0, dtype=complex)
        return replace(self, states=self.unitaries @ psi0)


def _pow2_at_least(n: int) -> int:
    n = max(int(n), 2)
    return 1 << (n - 1).bit_length()


def _segment_samples(seg: Segment, eig: linalg.HermitianEig, steps: int, accuracy: float) -> int:
    """Smallest power-of-two sample count meeting the determinant and accuracy limits."""
    w = eig.eigenvalues
    trace = float(np.sum(w))
    spread = float(w[-1] - w[0])
    n = _pow2_at_least(steps)
    t = np.linspace(0.0, seg.duration, 2)
    while n <= MAX_STEPS:
        t = np.linspace(0.0, seg.duration, n + 1)
        dclock = float(np.max(np.diff(seg.clock_at(t))))
        if abs(trace) * dclock < DET_STEP_LIMIT and spread * dclock <= accuracy:
            return n
        n *= 2
    raise StepControlError(-1, "determinant or accuracy step limit not reachable below 2^20 samples")


def _propagate(schedule: Schedule, counts: list[int]) -> Trajectory:
    expanded = schedule.expanded()
    d = schedule.dim
    times = [np.zeros(1)]
    blocks = [np.eye(d, dtype=complex)[None]]
    spans = []
    u_start = np.eye(d, dtype=complex)
    t0 = 0.0
    idx = 0
    for seg, n in zip(expanded, counts):
        h = to_matrix(seg.effective())
        eig = linalg.eig_hermitian(h)
        local_t = np.linspace(0.0, seg.duration, n + 1)
        local_t[-1] = seg.duration
        clock = seg.clock_at(local_t)
        us = linalg.expm_minus_iht_many(eig, clock) @ u_start
        spans.append(SegmentSpan(idx, idx + n, h, clock, float(np.real(np.trace(h)))))
        times.append(t0 + local_t[1:])
        blocks.append(us[1:])
        u_start = us[-1]
        t0 += seg.duration
        idx += n
    return Trajectory(
        times=np.concatenate(times),
        unitaries=np.concatenate(blocks),
        spans=tuple(spans),
        schedule=schedule,
    )


def _initial_counts(schedule: Schedule, steps: int, accuracy: float) -> list[int]:
    counts = []
    cache: dict[int, int] = {}
    for i, seg in enumerate(schedule.expanded()):
        key = id(seg)
        if key not in cache:
            eig = linalg.eig_hermitian(to_matrix(seg.effective()))
            try:
                cache[key] = _segment_samples(seg, eig, steps, accuracy)
            except StepControlError as exc:
                raise StepControlError(i, str(exc).split(": ", 1)[1]) from None
        counts.append(cache[key])
    return counts


def propagate(
    schedule: Schedule,
    steps: int = DEFAULT_STEPS,
    max_step: float | None = None,
    accuracy: float = ACCURACY_STEP,
) -> Trajectory:
    """Sample U(t) on every segment; ``max_step`` caps the real-time step if given."""
    if max_step is not None:
        if max_step <= 0:
            raise ScheduleError("max_step must be positive")
        longest = max(s.duration for s in schedule.segments)
        steps = max(steps, math.ceil(longest / max_step))
    counts = _initial_counts(schedule, steps, accuracy)
    return _propagate(schedule, counts)


def _bad_overlap_spans(traj: Trajectory) -> list[int]:
    s = traj.states
    ov = np.abs(np.einsum("ki,ki->k", s[:-1].conj(), s[1:]))
    bad = []
    for j, sp in enumerate(traj.spans):
        seg = ov[sp.start : sp.stop]
        # the coarse (every-other-sample) grid feeds the extrapolation too
        coarse = np.abs(np.einsum("ki,ki->k", s[sp.start : sp.stop : 2].conj(), s[sp.start + 2 : sp.stop + 1 : 2]))
        if np.min(seg) <= OVERLAP_FLOOR or (coarse.size and np.min(coarse) <= OVERLAP_FLOOR):
            bad.append(j)
    return bad


def evolve_state(
    schedule: Schedule,
    psi0,
    steps: int = DEFAULT_STEPS,
    max_step: float | None = None,
    accuracy: float = ACCURACY_STEP,
) -> Trajectory:
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.size != schedule.dim:
        raise ScheduleError(f"state has {psi0.size} amplitudes, schedule needs {schedule.dim}")
    if abs(np.linalg.norm(psi0) - 1.0) > NORM_TOL:
        raise ScheduleError(f"initial state is not normalised (norm {np.linalg.norm(psi0):.12g})")
    traj = propagate(schedule, steps, max_step, accuracy)
    return refine_for_state(traj, psi0)


def refine_for_state(traj: Trajectory, psi0) -> Trajectory:
    """Attach states, doubling samples on segments whose overlaps drop below the floor."""
    traj = traj.with_states(psi0)
    counts = [sp.stop - sp.start for sp in traj.spans]
    bad = _bad_overlap_spans(traj)
    while bad:
        for j in bad:
            counts[j] *= 2
            if counts[j] > MAX_STEPS:
                raise StepControlError(j, "state overlap stays below 0.9 at 2^20 samples")
        traj = _propagate(traj.schedule, counts).with_states(psi0)
        bad = _bad_overlap_spans(traj)
    return traj


def schedule_from_segments(segments, cycles=1) -> Schedule:
    segments = tuple(segments)
    return Schedule(segments[0].hamiltonian.qubits, segments, Fraction(cycles))
