"""Two-qubit pure-state entanglement: concurrence, Schmidt-sphere angles
and the closed-form geometric phase in those angles.

Basis order is |00>, |01>, |10>, |11> with qubit 1 the left tensor factor.
A state is written

    e^{i chi} [cos(a/2) e^{-i b/2} |n1, n2> + sin(a/2) e^{i b/2} |-n1, -n2>]

with |n> = cos(t/2) e^{-i p/2}|0> + sin(t/2) e^{i p/2}|1> and
|-n> = -sin(t/2) e^{-i p/2}|0> + cos(t/2) e^{i p/2}|1>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .pauli import pauli_matrix

TWO_PI = 2.0 * math.pi
# singular-value gap / angle below which a parameter is declared degenerate
DEGENERATE_TOL = 1e-10
SINGULARITY_MARGIN = 1e-6

_SIGMA_YY = pauli_matrix("YY")


class SchmidtError(ValueError):
    pass


class ClosedFormInapplicable(SchmidtError):
    pass


def _two_qubit(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 4:
        raise SchmidtError(f"expected a two-qubit state with 4 amplitudes, got {psi.size}")
    return psi


def concurrence(psi) -> float:
    """|<psi| (Y x Y) |psi*>|."""
    psi = _two_qubit(psi)
    return float(abs(psi.conj() @ _SIGMA_YY @ psi.conj()))


def concurrence_amplitudes(psi) -> float:
    a, b, c, d = _two_qubit(psi)
    return float(2.0 * abs(a * d - b * c))


def bloch_ket(theta: float, phi: float, sign: int = 1) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    lo, hi = np.exp(-0.5j * phi), np.exp(0.5j * phi)
    if sign > 0:
        return np.array([c * lo, s * hi])
    return np.array([-s * lo, c * hi])


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


@dataclass(frozen=True)
class SchmidtForm:
    alpha: float
    beta: float
    theta1: float
    phi1: float
    theta2: float
    phi2: float
    global_phase: float = 0.0
    alpha_degenerate: bool = False  # product state: beta is a global phase, reported as 0
    maximal: bool = False  # alpha = pi/2: Schmidt basis fixed to the computational basis on qubit 1
    phi1_undefined: bool = False
    phi2_undefined: bool = False

    @property
    def n1(self) -> np.ndarray:
        return bloch_vector(self.theta1, self.phi1)

    @property
    def n2(self) -> np.ndarray:
        return bloch_vector(self.theta2, self.phi2)


@dataclass(frozen=True)
class SchmidtVector:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def representative(alpha, beta, theta1, phi1, theta2, phi2) -> np.ndarray:
    """The state of the Schmidt-sphere form with no global phase."""
    up = np.kron(bloch_ket(theta1, phi1, 1), bloch_ket(theta2, phi2, 1))
    down = np.kron(bloch_ket(theta1, phi1, -1), bloch_ket(theta2, phi2, -1))
    return math.cos(alpha / 2) * np.exp(-0.5j * beta) * up + math.sin(alpha / 2) * np.exp(0.5j * beta) * down


def reconstruct(form: SchmidtForm, include_global_phase: bool = True) -> np.ndarray:
    psi = representative(form.alpha, form.beta, form.theta1, form.phi1, form.theta2, form.phi2)
    if include_global_phase:
        psi = np.exp(1j * form.global_phase) * psi
    return psi


def _angles(u: np.ndarray) -> tuple[float, float, bool]:
    """(theta, phi, phi_undefined) of the ray of a normalised qubit ket."""
    theta = 2.0 * math.atan2(abs(u[1]), abs(u[0]))
    if abs(u[0]) < DEGENERATE_TOL or abs(u[1]) < DEGENERATE_TOL:
        theta = 0.0 if abs(u[1]) < DEGENERATE_TOL else math.pi
        return theta, 0.0, True
    phi = float(np.angle(u[1]) - np.angle(u[0])) % TWO_PI
    return theta, phi, False


def schmidt_decompose(psi) -> SchmidtForm:
    psi = _two_qubit(psi)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise SchmidtError(f"state is not normalised (norm {norm:.12g})")
    m = psi.reshape(2, 2)
    u, s, vh = np.linalg.svd(m)
    maximal = s[0] - s[1] < DEGENERATE_TOL
    if maximal:
        # any basis diagonalises; take |0>,|1> on qubit 1
        u = np.eye(2, dtype=complex)
        rows = m * math.sqrt(2.0)
        vh = rows / np.linalg.norm(rows, axis=1, keepdims=True)
        s = np.array([1.0, 1.0]) / math.sqrt(2.0)
    alpha = 2.0 * math.atan2(s[1], s[0])
    alpha_degenerate = s[1] < DEGENERATE_TOL
    if maximal:
        alpha = math.pi / 2
    if alpha_degenerate:
        alpha = 0.0

    theta1, phi1, und1 = _angles(u[:, 0])
    theta2, phi2, und2 = _angles(vh[0, :])
    plus1, minus1 = bloch_ket(theta1, phi1, 1), bloch_ket(theta1, phi1, -1)
    plus2, minus2 = bloch_ket(theta2, phi2, 1), bloch_ket(theta2, phi2, -1)
    if alpha_degenerate:
        beta = 0.0
    else:
        mu = np.angle(np.vdot(plus1, u[:, 0])) + np.angle(np.vdot(plus2, vh[0, :]))
        rho = np.angle(np.vdot(minus1, u[:, 1])) + np.angle(np.vdot(minus2, vh[1, :]))
        beta = float(rho - mu) % TWO_PI
    rep = representative(alpha, beta, theta1, phi1, theta2, phi2)
    chi = float(np.angle(np.vdot(rep, psi)))
    return SchmidtForm(
        alpha=alpha,
        beta=beta,
        theta1=theta1,
        phi1=phi1,
        theta2=theta2,
        phi2=phi2,
        global_phase=chi,
        alpha_degenerate=bool(alpha_degenerate),
        maximal=bool(maximal),
        phi1_undefined=und1,
        phi2_undefined=und2,
    )


def schmidt_vector(form: SchmidtForm) -> SchmidtVector:
    a, b = form.alpha, form.beta
    return SchmidtVector(math.sin(a) * math.cos(b), math.sin(a) * math.sin(b), math.cos(a))


def sigma_tilde(form: SchmidtForm | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Effective Pauli operators on span{|n1,n2>, |-n1,-n2>}.

    Without a form they are anchored on |00>, |11>.
    """
    if form is None:
        up = np.array([1, 0, 0, 0], dtype=complex)
        down = np.array([0, 0, 0, 1], dtype=complex)
    else:
        up = np.kron(bloch_ket(form.theta1, form.phi1, 1), bloch_ket(form.theta2, form.phi2, 1))
        down = np.kron(bloch_ket(form.theta1, form.phi1, -1), bloch_ket(form.theta2, form.phi2, -1))
    ud = np.outer(up, down.conj())
    du = ud.conj().T
    sx = ud + du
    sy = -1j * ud + 1j * du
    sz = np.outer(up, up.conj()) - np.outer(down, down.conj())
    return sx, sy, sz


def sigma_tilde_expectation(psi, form: SchmidtForm | None = None) -> np.ndarray:
    psi = _two_qubit(psi)
    if form is None:
        form = schmidt_decompose(psi)
    return np.array([float(np.real(np.vdot(psi, op @ psi))) for op in sigma_tilde(form)])


def local_expectations(psi) -> tuple[np.ndarray, np.ndarray]:
    """<sigma> on qubit 1 and on qubit 2."""
    psi = _two_qubit(psi)
    one = np.array([np.real(np.vdot(psi, pauli_matrix(p + "I") @ psi)) for p in "XYZ"])
    two = np.array([np.real(np.vdot(psi, pauli_matrix("I" + p) @ psi)) for p in "XYZ"])
    return one, two


# closed-form phase along a trajectory -------------------------------------

@dataclass(frozen=True)
class ClosedFormPhase:
    gamma: float
    integral: float
    closing: float


def _unwrap_nearest(raw: np.ndarray, what: str) -> np.ndarray:
    steps = linalg.principal_arg(np.diff(raw))
    if steps.size and np.max(np.abs(steps)) >= math.pi / 2:
        k = int(np.argmax(np.abs(steps)))
        raise ClosedFormInapplicable(
            f"closed form inapplicable, use geometric_phase: {what} jumps by {steps[k]:.3f} rad at sample {k}"
            " (path crosses a Schmidt singularity or is undersampled)"
        )
    return raw[0] + np.concatenate([[0.0], np.cumsum(steps)])


def _check_margins(params: np.ndarray, forms: list[SchmidtForm], margin: float) -> None:
    for k, (row, f) in enumerate(zip(params, forms)):
        alpha = row[0]
        if not f.alpha_degenerate and min(alpha, math.pi - alpha, abs(alpha - math.pi / 2)) < margin:
            raise ClosedFormInapplicable(
                f"closed form inapplicable, use geometric_phase: alpha = {alpha:.3e} at sample {k} is within the singularity margin"
            )
        for i, (th, und) in enumerate(((row[2], f.phi1_undefined), (row[4], f.phi2_undefined)), 1):
            if und:
                continue
            if th < margin or th > math.pi - margin:
                raise ClosedFormInapplicable(
                    f"closed form inapplicable, use geometric_phase: theta{i} = {th:.3e} at sample {k} is within the singularity margin"
                )


def _folded(row: np.ndarray) -> np.ndarray:
    """The other labelling of the same state: alpha -> pi - alpha with the Bloch vectors flipped."""
    a, b, t1, p1, t2, p2 = row
    return np.array([math.pi - a, -b, math.pi - t1, p1 + math.pi, math.pi - t2, p2 + math.pi])


def _distance(row: np.ndarray, prev: np.ndarray) -> float:
    polar = np.abs(row[[0, 2, 4]] - prev[[0, 2, 4]])
    azim = np.abs(linalg.principal_arg(row[[1, 3, 5]] - prev[[1, 3, 5]]))
    return float(np.sum(polar) + np.sum(azim))


def _hold_undefined(row: np.ndarray, flags, prev: np.ndarray | None) -> np.ndarray:
    """Pin an undefined phi to its previous value.

    At theta in {0, pi} phi enters only through beta + cos(theta) phi, so
    the difference moves into beta and the representative is unchanged.
    """
    row = row.copy()
    for idx, flagged in zip((3, 5), flags):
        if flagged:
            held = 0.0 if prev is None else prev[idx]
            row[1] += math.cos(row[idx - 1]) * (row[idx] - held)
            row[idx] = held
    return row


def _continuous_params(forms: list[SchmidtForm]) -> np.ndarray:
    """Schmidt angles per sample, relabelled so the path stays continuous.

    Across alpha = pi/2 the ordering of the Schmidt coefficients swaps; the
    integrand is invariant under the relabelling but beta is not, so each
    sample keeps whichever labelling lies closest to its predecessor and
    alpha runs over [0, pi].
    """
    rows = []
    for f in forms:
        flags = (f.phi1_undefined, f.phi2_undefined)
        prev = rows[-1] if rows else None
        row = np.array([f.alpha, f.beta, f.theta1, f.phi1, f.theta2, f.phi2])
        row = _hold_undefined(row, flags, prev)
        if prev is not None:
            alt = _hold_undefined(_folded(row), flags, prev)
            if _distance(alt, prev) < _distance(row, prev):
                row = alt
        rows.append(row)
    return np.array(rows)


def _stieltjes(weight: np.ndarray, param: np.ndarray) -> float:
    """Trapezoid for sum of weight * d(param), refined by one Richardson step."""
    fine = float(np.sum(0.5 * (weight[1:] + weight[:-1]) * np.diff(param)))
    n = param.size - 1
    if n < 2 or n % 2:
        return fine
    w2, p2 = weight[::2], param[::2]
    coarse = float(np.sum(0.5 * (w2[1:] + w2[:-1]) * np.diff(p2)))
    return (4.0 * fine - coarse) / 3.0


def gamma_closed_form(states, margin: float = SINGULARITY_MARGIN) -> ClosedFormPhase:
    """1/2 integral of cos(alpha) (d beta + cos(theta1) d phi1 + cos(theta2) d phi2).

    The angles are unwrapped along the samples; the representative's own
    closing overlap (a sign when beta or phi_i winds by an odd multiple of
    2pi) is added so the result is the geometric phase of the path.
    """
    states = np.asarray(states, dtype=complex)
    if states.ndim != 2 or states.shape[1] != 4:
        raise SchmidtError("expected an (N, 4) array of two-qubit states")
    forms = [schmidt_decompose(s) for s in states]
    params = _continuous_params(forms)
    _check_margins(params, forms, margin)
    alpha, theta1, theta2 = params[:, 0], params[:, 2], params[:, 4]
    beta = _unwrap_nearest(params[:, 1], "beta")
    phi1 = _unwrap_nearest(params[:, 3], "phi1")
    phi2 = _unwrap_nearest(params[:, 5], "phi2")
    ca = np.cos(alpha)
    integral = 0.5 * (
        _stieltjes(ca, beta)
        + _stieltjes(ca * np.cos(theta1), phi1)
        + _stieltjes(ca * np.cos(theta2), phi2)
    )
    start = representative(alpha[0], beta[0], theta1[0], phi1[0], theta2[0], phi2[0])
    end = representative(alpha[-1], beta[-1], theta1[-1], phi1[-1], theta2[-1], phi2[-1])
    closing = linalg.arg(np.vdot(start, end))
    return ClosedFormPhase(integral + closing, integral, closing)


def local_field_phase(psi, axis) -> float:
    """2pi sqrt(1 - C^2) (u . n1) for one period of a field along u on qubit 1."""
    form = schmidt_decompose(psi)
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    c = concurrence(psi)
    return TWO_PI * math.sqrt(max(0.0, 1.0 - c * c)) * float(u @ form.n1)
