"""Geometric phases of state paths and winding numbers of unitary paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .evolution import (
    ACCURACY_STEP,
    DEFAULT_STEPS,
    OVERLAP_FLOOR,
    Schedule,
    Trajectory,
    propagate,
    refine_for_state,
)

TWO_PI = 2.0 * math.pi
# nu_U = SIGMA_CONV * (continuous minus principal arg change of det U) / 2pi;
# fixed so that flattened representatives obey nu_U = 2 m nu_H
SIGMA_CONV = -1
WINDING_RESIDUAL_TOL = 1e-6
SUM_RULE_TOL = 1e-5
BRANCHES = ("trace-log", "det")


class PhaseError(RuntimeError):
    pass


class RefineTrajectory(PhaseError):
    """Adjacent samples overlap too weakly for the discrete connection."""


class WindingError(PhaseError):
    pass


@dataclass(frozen=True)
class PhaseReport:
    connection_integral: float
    closing_arg: float
    gauge_correction: float
    gamma: float

    @property
    def uncorrected(self) -> float:
        return self.connection_integral + self.closing_arg


@dataclass(frozen=True)
class WindingReport:
    nu_u: int
    raw_winding: float
    arg_trace: np.ndarray = field(repr=False)
    residual: float
    branch: str
    eigenphases: np.ndarray = field(repr=False)
    nu_u_det: int
    nu_u_trace_log: int


def _overlap_args(states: np.ndarray) -> np.ndarray:
    ov = np.einsum("ki,ki->k", states[:-1].conj(), states[1:])
    mags = np.abs(ov)
    if mags.size and np.min(mags) <= OVERLAP_FLOOR:
        k = int(np.argmin(mags))
        raise RefineTrajectory(
            f"refine trajectory: |<psi_k|psi_k+1>| = {mags[k]:.3f} at sample {k} (needs > {OVERLAP_FLOOR})"
        )
    return np.angle(ov)


def pancharatnam_sum(states: np.ndarray, extrapolate: bool = True) -> float:
    """-sum_k arg<psi_k|psi_k+1>, with one Richardson step on the half grid.

    The plain sum carries an O(dt^2) error; combining it with the sum over
    every other sample cancels that term.
    """
    fine = -float(np.sum(_overlap_args(states)))
    n = states.shape[0] - 1
    if not extrapolate or n < 2 or n % 2:
        return fine
    coarse = -float(np.sum(_overlap_args(states[::2])))
    return (4.0 * fine - coarse) / 3.0


def connection_by_segment(traj: Trajectory, extrapolate: bool = True) -> list[float]:
    if traj.states is None:
        raise PhaseError("trajectory carries no states")
    return [
        pancharatnam_sum(traj.states[sp.start : sp.stop + 1], extrapolate) for sp in traj.spans
    ]


def _floor_correction(trace: float, clock: float) -> float:
    if trace == 0.0:
        return 0.0
    return -TWO_PI * math.copysign(1.0, trace) * math.floor(clock * abs(trace) / TWO_PI)


def _trace_phase(traj: Trajectory) -> float:
    """Integral of Tr(H) over the whole trajectory."""
    return float(sum(sp.total_clock * sp.trace for sp in traj.spans))


def state_gauge_correction(traj: Trajectory) -> float:
    """Per-state large-gauge correction.

    A single state only sees the identity part mu = Tr(H)/dim, so the
    per-state correction uses mu where the basis sum uses Tr(H). The
    closing argument is taken once per path, so the floor acts on the
    integral over the whole trajectory.
    """
    total = _trace_phase(traj)
    if abs(total) <= TWO_PI:
        return 0.0
    return _floor_correction(total / traj.dim, 1.0)


def basis_gauge_correction(traj: Trajectory) -> float:
    """Correction of the basis sum of phases, -2pi sgn(Tr H) floor(T|Tr H|/2pi)."""
    return _floor_correction(_trace_phase(traj), 1.0)


def geometric_phase(traj: Trajectory, apply_gauge_correction: bool = True, extrapolate: bool = True) -> PhaseReport:
    if traj.states is None:
        raise PhaseError("trajectory carries no states")
    conn = float(sum(connection_by_segment(traj, extrapolate)))
    closing = linalg.arg(np.vdot(traj.states[0], traj.states[-1]))
    corr = state_gauge_correction(traj) if apply_gauge_correction else 0.0
    return PhaseReport(conn, closing, corr, conn + closing + corr)


def dynamical_integral(traj: Trajectory) -> float:
    """Direct quadrature of <psi|H_eff|psi> over the segment clocks (Simpson)."""
    from scipy.integrate import simpson

    total = 0.0
    for sp in traj.spans:
        s = traj.states[sp.start : sp.stop + 1]
        e = np.real(np.einsum("ki,ij,kj->k", s.conj(), sp.hamiltonian, s))
        total += float(simpson(e, x=sp.clock))
    return total


def unwrap_det_args(unitaries: np.ndarray) -> np.ndarray:
    dets = np.linalg.det(unitaries)
    steps = np.angle(dets[1:] / dets[:-1])
    if steps.size and np.max(np.abs(steps)) >= math.pi / 2:
        k = int(np.argmax(np.abs(steps)))
        raise WindingError(f"determinant argument jumps by {steps[k]:.3f} rad at sample {k}; refine trajectory")
    return linalg.arg(dets[0]) + np.concatenate([[0.0], np.cumsum(steps)])


def winding_number(traj: Trajectory, branch: str = "trace-log") -> WindingReport:
    """Integer winding of det U(t), regularised by the endpoint logarithm.

    ``trace-log`` takes the principal branch per eigenvalue of
    W = U(0)^dag U(T); ``det`` takes one principal branch on det W.
    """
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}; choose from {BRANCHES}")
    phis = unwrap_det_args(traj.unitaries)
    delta = float(phis[-1] - phis[0])
    w = traj.unitaries[0].conj().T @ traj.unitaries[-1]
    eig = linalg.eig_unitary(w)
    logs = {
        "trace-log": float(np.sum(eig.eigenphases)),
        "det": linalg.arg(linalg.det(w)),
    }
    nus = {}
    raws = {}
    for b, log_part in logs.items():
        raw = (delta - log_part) / TWO_PI
        raws[b] = raw
        nus[b] = SIGMA_CONV * int(round(raw))
    raw = raws[branch]
    residual = abs(raw - round(raw))
    if residual >= WINDING_RESIDUAL_TOL:
        raise WindingError(f"non-integer winding {raw:.9f} (residual {residual:.2e})")
    return WindingReport(
        nu_u=nus[branch],
        raw_winding=raw,
        arg_trace=phis,
        residual=residual,
        branch=branch,
        eigenphases=eig.eigenphases,
        nu_u_det=nus["det"],
        nu_u_trace_log=nus["trace-log"],
    )


@dataclass(frozen=True)
class SumRule:
    nu_u: int
    winding: WindingReport
    states: np.ndarray = field(repr=False)  # columns
    gammas: tuple[PhaseReport, ...]
    gamma_sum_over_2pi: float
    consistent: bool
    basis_correction: float
    state_correction_sum: float
    bare: bool
    cycles: object

    @property
    def nu_u_corrected(self) -> float:
        return self.nu_u + self.basis_correction / TWO_PI

    @property
    def literal_nu_u_shift(self) -> float:
        """Dimension times the basis correction, read literally."""
        return self.states.shape[0] * self.basis_correction


def phases_for_states(traj: Trajectory, states, apply_gauge_correction: bool = True) -> list[PhaseReport]:
    states = np.asarray(states, dtype=complex)
    return [
        geometric_phase(refine_for_state(traj, states[:, j]), apply_gauge_correction)
        for j in range(states.shape[1])
    ]


def sum_rule(
    schedule: Schedule,
    steps: int = DEFAULT_STEPS,
    bare: bool = False,
    branch: str = "trace-log",
    accuracy: float = ACCURACY_STEP,
    basis=None,
) -> SumRule:
    """Geometric phases over the eigenbasis of U(0)^dag U(T) against nu_U.

    ``basis`` (columns) overrides the eigenbasis; it must consist of
    eigenvectors of W for the phases to be cyclic.
    """
    sched = schedule.bare() if bare else schedule
    traj = propagate(sched, steps, accuracy=accuracy)
    wind = winding_number(traj, branch)
    if basis is None:
        w = traj.unitaries[0].conj().T @ traj.final
        basis = linalg.eig_unitary(w).eigenvectors
    reports = phases_for_states(traj, basis)
    total = sum(r.uncorrected for r in reports) / TWO_PI
    return SumRule(
        nu_u=wind.nu_u,
        winding=wind,
        states=np.asarray(basis),
        gammas=tuple(reports),
        gamma_sum_over_2pi=total,
        consistent=abs(total - wind.nu_u) < SUM_RULE_TOL,
        basis_correction=basis_gauge_correction(traj),
        state_correction_sum=sum(r.gauge_correction for r in reports),
        bare=bare,
        cycles=schedule.cycles,
    )


@dataclass(frozen=True)
class GaugeCheck:
    unchanged: bool
    nu_before: int
    nu_after: int
    correction: float  # in units of 2pi
    nu_corrected: float
    branch: str


def gauge_profile(times: np.ndarray, delta_rho: float) -> np.ndarray:
    """Smooth rho(t) rising from 0 to delta_rho with zero slope at both ends."""
    t_total = times[-1]
    return 0.5 * delta_rho * (1.0 - np.cos(math.pi * times / t_total))


def gauge_check(
    schedule: Schedule,
    delta_rho: float,
    steps: int = DEFAULT_STEPS,
    branch: str = "det",
) -> GaugeCheck:
    """nu_U before and after U(t) -> e^{i rho(t)} U(t).

    The transformed generator gains the identity term -rho'(t), whose
    floor correction is added back in ``nu_corrected``.
    """
    traj = propagate(schedule, steps)
    before = winding_number(traj, branch).nu_u
    rho = gauge_profile(traj.times, delta_rho)
    shifted = Trajectory(
        times=traj.times,
        unitaries=np.exp(1j * rho)[:, None, None] * traj.unitaries,
        spans=traj.spans,
        schedule=traj.schedule,
    )
    after = winding_number(shifted, branch).nu_u
    dim = traj.dim
    if branch == "det":
        corr = _floor_correction(-dim * delta_rho, 1.0)
    else:
        corr = dim * _floor_correction(-delta_rho, 1.0)
    corr_units = corr / TWO_PI
    nu_corr = after + corr_units
    return GaugeCheck(after == before, before, after, corr_units, nu_corr, branch)
