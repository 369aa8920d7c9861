"""Weighted Pauli-string Hamiltonians and the spectral sign count nu_H."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import reduce

import numpy as np

from . import linalg

PAULI_LETTERS = "IXYZ"
MAX_QUBITS = 4
ZERO_TOL = 1e-9

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliError(ValueError):
    pass


class DegenerateSpectrumError(PauliError):
    """Every eigenvalue sits inside the zero band."""


class FlattenError(PauliError):
    pass


def validate_pauli(string: str, qubits: int | None = None) -> str:
    if not string or any(c not in PAULI_LETTERS for c in string):
        raise PauliError(f"invalid Pauli string {string!r}: letters must be I, X, Y, Z")
    if qubits is not None and len(string) != qubits:
        raise PauliError(f"Pauli string {string!r} has length {len(string)}, expected {qubits}")
    return string


def pauli_matrix(string: str) -> np.ndarray:
    validate_pauli(string)
    return reduce(np.kron, (_SINGLE[c] for c in string))


@dataclass(frozen=True)
class HamiltonianSpec:
    """sum_k c_k P_k + identity_coefficient * I.

    All-identity strings passed in ``terms`` are folded into
    ``identity_coefficient`` so that the trace of the realisation is
    always ``identity_coefficient * 2**qubits``.
    """

    qubits: int
    terms: tuple[tuple[float, str], ...] = ()
    identity_coefficient: float = 0.0

    def __post_init__(self):
        if not 1 <= self.qubits <= MAX_QUBITS:
            raise PauliError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.qubits}")
        kept = []
        ident = float(self.identity_coefficient)
        for coeff, string in self.terms:
            validate_pauli(string, self.qubits)
            if set(string) == {"I"}:
                ident += float(coeff)
            else:
                kept.append((float(coeff), string))
        object.__setattr__(self, "terms", tuple(kept))
        object.__setattr__(self, "identity_coefficient", ident)

    @property
    def dim(self) -> int:
        return 2**self.qubits

    def is_local(self) -> bool:
        """True when every term acts non-trivially on at most one qubit."""
        return all(sum(c != "I" for c in s) <= 1 for _, s in self.terms)

    def scaled(self, factor: float) -> "HamiltonianSpec":
        return HamiltonianSpec(
            self.qubits,
            tuple((factor * c, s) for c, s in self.terms),
            factor * self.identity_coefficient,
        )

    def __add__(self, other: "HamiltonianSpec") -> "HamiltonianSpec":
        if other.qubits != self.qubits:
            raise PauliError("cannot add Hamiltonians on different qubit counts")
        return HamiltonianSpec(
            self.qubits,
            self.terms + other.terms,
            self.identity_coefficient + other.identity_coefficient,
        )


def to_matrix(spec: HamiltonianSpec) -> np.ndarray:
    m = spec.identity_coefficient * np.eye(spec.dim, dtype=complex)
    for coeff, string in spec.terms:
        m = m + coeff * pauli_matrix(string)
    return m


def traceless_part(spec: HamiltonianSpec) -> HamiltonianSpec:
    return replace(spec, identity_coefficient=0.0)


def gauge_shift(spec: HamiltonianSpec, mu: float) -> HamiltonianSpec:
    """H -> H + mu I."""
    return replace(spec, identity_coefficient=spec.identity_coefficient + mu)


@dataclass(frozen=True)
class NuH:
    value: Fraction
    n_plus: int
    n_minus: int
    n_zero: int
    stripped_identity: float = 0.0
    warnings: tuple[str, ...] = field(default=())

    def __int__(self):
        return int(self.value)


def _sign_counts(eigenvalues: np.ndarray, zero_tol: float) -> tuple[int, int, int]:
    scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    if scale == 0.0:
        raise DegenerateSpectrumError("degenerate at zero: all eigenvalues vanish")
    band = zero_tol * scale
    n_plus = int(np.sum(eigenvalues > band))
    n_minus = int(np.sum(eigenvalues < -band))
    n_zero = eigenvalues.size - n_plus - n_minus
    return n_plus, n_minus, n_zero


def nu_h(h, zero_tol: float = ZERO_TOL) -> NuH:
    """Half the signed imbalance of positive and negative eigenvalues.

    A ``HamiltonianSpec`` has its identity coefficient removed first (the
    count is defined on the traceless representative); a raw matrix is
    counted as given.
    """
    warnings = []
    stripped = 0.0
    if isinstance(h, HamiltonianSpec):
        if h.identity_coefficient != 0.0:
            stripped = h.identity_coefficient
            warnings.append(f"identity coefficient {stripped!r} removed before counting")
            h = traceless_part(h)
        m = to_matrix(h)
    else:
        m = linalg.as_matrix(h)
    eigenvalues = linalg.eig_hermitian(m).eigenvalues
    n_plus, n_minus, n_zero = _sign_counts(eigenvalues, zero_tol)
    if n_plus + n_minus == 0:
        raise DegenerateSpectrumError("degenerate at zero: every eigenvalue lies in the zero band")
    if n_zero:
        warnings.append(f"{n_zero} eigenvalue(s) inside the zero band were excluded")
    return NuH(Fraction(n_plus - n_minus, 2), n_plus, n_minus, n_zero, stripped, tuple(warnings))


def flatten(h, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Same eigenvectors, eigenvalues replaced by their signs."""
    m = to_matrix(h) if isinstance(h, HamiltonianSpec) else linalg.as_matrix(h)
    eig = linalg.eig_hermitian(m)
    w = eig.eigenvalues
    scale = float(np.max(np.abs(w)))
    if scale == 0.0 or np.any(np.abs(w) <= zero_tol * scale):
        raise FlattenError("cannot flatten: spectrum has an eigenvalue in the zero band")
    v = eig.eigenvectors
    return (v * np.sign(w)) @ v.conj().T


def diagonal_spec(eigenvalues) -> HamiltonianSpec:
    """Hamiltonian whose matrix is diag(eigenvalues), expanded in I/Z strings."""
    ev = np.asarray(eigenvalues, dtype=float)
    n = int(round(math.log2(ev.size)))
    if 2**n != ev.size:
        raise PauliError("number of eigenvalues must be a power of two")
    terms = []
    ident = 0.0
    for mask in range(2**n):
        string = "".join("Z" if (mask >> (n - 1 - q)) & 1 else "I" for q in range(n))
        diag = np.real(np.diag(pauli_matrix(string)))
        coeff = float(diag @ ev) / ev.size
        if abs(coeff) < 1e-15:
            continue
        if mask == 0:
            ident = coeff
        else:
            terms.append((coeff, string))
    return HamiltonianSpec(n, tuple(terms), ident)


# builders ----------------------------------------------------------------

def entangling(c_x: float, c_y: float, c_z: float) -> HamiltonianSpec:
    return HamiltonianSpec(2, ((c_x, "XX"), (c_y, "YY"), (c_z, "ZZ")))


def heisenberg(lam: float) -> HamiltonianSpec:
    return entangling(lam, lam, lam)


def cross_resonance(w: float, control: int = 1) -> HamiltonianSpec:
    """(w/2)(Z_c + X_t - Z_c X_t); exp(-i H pi/2w) is CNOT up to e^{-i pi/4}."""
    if control == 1:
        strings = ("ZI", "IX", "ZX")
    elif control == 2:
        strings = ("IZ", "XI", "XZ")
    else:
        raise PauliError("control must be qubit 1 or 2")
    return HamiltonianSpec(2, ((w / 2, strings[0]), (w / 2, strings[1]), (-w / 2, strings[2])))


def _on_qubit(letter: str, qubit: int, qubits: int) -> str:
    return "".join(letter if q == qubit else "I" for q in range(1, qubits + 1))


def hadamard_h(energy: float, target_qubit=1, qubits: int = 2) -> HamiltonianSpec:
    """E (X + Z)/sqrt2 on each target qubit; exp(-i H pi/2E) = (-i Had) per target."""
    targets = (target_qubit,) if isinstance(target_qubit, int) else tuple(target_qubit)
    c = energy / math.sqrt(2)
    terms = []
    for q in targets:
        if not 1 <= q <= qubits:
            raise PauliError(f"target qubit {q} out of range")
        terms += [(c, _on_qubit("X", q, qubits)), (c, _on_qubit("Z", q, qubits))]
    return HamiltonianSpec(qubits, tuple(terms))


def local_field(b: float, direction=(0.0, 0.0, 1.0), qubit: int = 1, qubits: int = 2) -> HamiltonianSpec:
    """b * (u . sigma) on one qubit."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    terms = [
        (b * u[i], _on_qubit(letter, qubit, qubits))
        for i, letter in enumerate("XYZ")
        if u[i] != 0.0
    ]
    return HamiltonianSpec(qubits, tuple(terms))


def parasitic_heisenberg(b: float, lam: float) -> HamiltonianSpec:
    return HamiltonianSpec(2, ((b, "ZI"),)) + heisenberg(lam)
