"""Dense complex linear algebra for qubit registers (dimension 2..16).

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
The eigensolvers add deterministic conventions on top of LAPACK so that
golden values in tests do not depend on solver internals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8
DEGENERACY_TOL = 1e-9
MAX_DIM = 16

# Angles closer than this to -pi are reported as +pi.
BRANCH_SNAP = 1e-9


class LinalgError(ValueError):
    """Invalid input to a linear-algebra routine."""


class DimensionError(LinalgError):
    pass


class NotHermitianError(LinalgError):
    def __init__(self, asymmetry: float, tol: float = HERMITIAN_TOL):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(
            f"matrix is not Hermitian: ||h - h^dag|| / ||h|| = {asymmetry:.3e} (tol {tol:.0e})"
        )


class NotUnitaryError(LinalgError):
    def __init__(self, deviation: float, tol: float = UNITARY_TOL):
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"matrix is not unitary: ||w^dag w - I|| = {deviation:.3e} (tol {tol:.0e})"
        )


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


@dataclass(frozen=True)
class UnitaryEig:
    eigenphases: np.ndarray
    eigenvectors: np.ndarray  # columns


def principal_arg(x):
    """Wrap angle(s) into (-pi, pi]; values at the -pi edge map to +pi."""
    a = np.angle(np.exp(1j * np.asarray(x, dtype=float)))
    a = np.where(a <= -np.pi + BRANCH_SNAP, np.pi, a)
    return float(a) if a.ndim == 0 else a


def arg(z):
    """Principal argument of complex number(s), same branch rule as principal_arg."""
    a = np.angle(np.asarray(z, dtype=complex))
    a = np.where(a <= -np.pi + BRANCH_SNAP, np.pi, a)
    return float(a) if a.ndim == 0 else a


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not _is_power_of_two(a.shape[0]) or a.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension must be a power of two in [2, {MAX_DIM}], got {a.shape[0]}")
    return a


def kron(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise DimensionError(
            f"kron dimension {a.shape[0]}x{b.shape[0]} = {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}"
        )
    return np.kron(a, b)


def hermiticity_defect(h) -> float:
    h = np.asarray(h, dtype=complex)
    scale = np.linalg.norm(h)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(h - h.conj().T) / scale)


def unitarity_defect(w) -> float:
    w = np.asarray(w, dtype=complex)
    return float(np.linalg.norm(w.conj().T @ w - np.eye(w.shape[0])))


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of sorted values whose consecutive gaps are below tol."""
    groups: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _first_nonzero(v: np.ndarray, tol: float = 1e-12) -> int:
    idx = np.flatnonzero(np.abs(v) > tol)
    return int(idx[0]) if idx.size else 0


def _phase_fix(v: np.ndarray) -> np.ndarray:
    k = _first_nonzero(v)
    a = v[k]
    if abs(a) == 0:
        return v
    return v * (abs(a) / a)


def _canonical_basis(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(vecs) (columns).

    Projects the computational basis vectors onto the subspace in order and
    orthonormalises, so the result does not depend on the rotation LAPACK
    happened to return within a degenerate eigenspace.
    """
    dim, k = vecs.shape
    proj = vecs @ vecs.conj().T
    chosen: list[np.ndarray] = []
    for i in range(dim):
        v = proj[:, i].copy()
        for c in chosen:
            v -= c * (c.conj() @ v)
        n = np.linalg.norm(v)
        if n > 1e-6:
            chosen.append(v / n)
        if len(chosen) == k:
            break
    basis = np.array([_phase_fix(c) for c in chosen]).T
    # descending magnitude of the first nonzero amplitude
    keys = [(_first_nonzero(basis[:, j]), -abs(basis[_first_nonzero(basis[:, j]), j])) for j in range(k)]
    order = sorted(range(k), key=lambda j: keys[j])
    return basis[:, order]


def eig_hermitian(h, tol: float = HERMITIAN_TOL) -> HermitianEig:
    h = as_matrix(h)
    defect = hermiticity_defect(h)
    if defect > tol:
        raise NotHermitianError(defect, tol)
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    scale = max(float(np.max(np.abs(w))), 1.0)
    vecs = v.copy()
    for group in _clusters(w, DEGENERACY_TOL * scale):
        if len(group) == 1:
            j = group[0]
            vecs[:, j] = _phase_fix(v[:, j])
        else:
            vecs[:, group] = _canonical_basis(v[:, group])
            w[group] = np.mean(w[group])
    return HermitianEig(eigenvalues=w, eigenvectors=vecs)


def expm_minus_iht(h, t: float) -> np.ndarray:
    """exp(-i h t) by spectral decomposition."""
    eig = h if isinstance(h, HermitianEig) else eig_hermitian(h)
    v = eig.eigenvectors
    return (v * np.exp(-1j * eig.eigenvalues * t)) @ v.conj().T


def expm_minus_iht_many(eig: HermitianEig, times) -> np.ndarray:
    """Stack of exp(-i h t_k) for an array of times, shape (len(times), d, d)."""
    t = np.asarray(times, dtype=float)
    v = eig.eigenvectors
    phases = np.exp(-1j * np.multiply.outer(t, eig.eigenvalues))
    return np.einsum("ij,kj,lj->kil", v, phases, v.conj(), optimize=True)


def eig_unitary(w, tol: float = UNITARY_TOL) -> UnitaryEig:
    """Eigenphases in (-pi, pi] and eigenvectors of a unitary matrix.

    The Hermitian part (w + w^dag)/2 is diagonalised first; inside each of
    its degenerate eigenspaces the compressed anti-Hermitian part
    (w - w^dag)/2i separates the pairs e^{+-i theta}.
    """
    w = as_matrix(w)
    defect = unitarity_defect(w)
    if defect > tol:
        raise NotUnitaryError(defect, tol)
    re_part = 0.5 * (w + w.conj().T)
    im_part = (w - w.conj().T) / 2j
    base = eig_hermitian(re_part, tol=1e-6)
    vecs = base.eigenvectors.copy()
    for group in _clusters(base.eigenvalues, 1e-6):
        if len(group) == 1:
            continue
        sub = vecs[:, group]
        compressed = sub.conj().T @ im_part @ sub
        compressed = 0.5 * (compressed + compressed.conj().T)
        _, rot = np.linalg.eigh(compressed)
        vecs[:, group] = sub @ rot
    phases = np.array([arg(vecs[:, j].conj() @ w @ vecs[:, j]) for j in range(w.shape[0])])
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    vecs = vecs[:, order]
    # ties in phase: reuse the Hermitian canonicalisation for determinism
    for group in _clusters(phases, DEGENERACY_TOL):
        if len(group) == 1:
            vecs[:, group[0]] = _phase_fix(vecs[:, group[0]])
        else:
            vecs[:, group] = _canonical_basis(vecs[:, group])
    return UnitaryEig(eigenphases=phases, eigenvectors=vecs)


def det(m) -> complex:
    return complex(np.linalg.det(np.asarray(m, dtype=complex)))


def trace(m) -> complex:
    return complex(np.trace(np.asarray(m, dtype=complex)))
