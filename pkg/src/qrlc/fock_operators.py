"""Finite-matrix operators for the quantized series RLC circuit.

Charge is quantized as the position operator q and inductance times
current as the momentum p, with [q, p] = i*hbar.  The circuit
Hamiltonian is

    H = p^2/(2L) + q^2/(2C) + (R/2L)(pq + qp),

which is oscillatory (discrete, equally spaced spectrum) for
R < sqrt(L/C).  Every operator here is represented on the first N
number states of the reference oscillator omega0 = 1/sqrt(LC), the
mode that diagonalizes H at R = 0.  In that basis H is pentadiagonal.

Matrix elements of q^2, p^2 and pq+qp are the exact ones of the
abstract operators restricted to the kept levels (see
``build_quadratic_forms``); they differ from products of the truncated
q, p matrices only in the last diagonal entry, where such products are
corrupted by the missing level N.  Identity checks involving operator
*products* are therefore meaningful only on a leading interior block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITICITY_ATOL = 1e-12


class OverdampedError(ValueError):
    """R >= sqrt(L/C): no oscillatory mode, thermal closed forms undefined."""


class BasisMismatchError(ValueError):
    """Operators from different truncated bases (dim or tag) were combined."""


class HermiticityError(ValueError):
    """An operator required to be Hermitian is not, beyond tolerance."""


@dataclass(frozen=True)
class CircuitParams:
    """Circuit parameters L, C, R plus the unit constants hbar and k.

    Natural units hbar = k = 1 by default; both are plain fields so SI
    values can be used instead.
    """

    L: float
    C: float
    R: float
    hbar: float = 1.0
    k: float = 1.0

    def __post_init__(self) -> None:
        if not (self.L > 0.0 and self.C > 0.0):
            raise ValueError(f"L and C must be positive, got L={self.L}, C={self.C}")
        if self.R < 0.0:
            raise ValueError(f"R must be non-negative, got R={self.R}")
        if not (self.hbar > 0.0 and self.k > 0.0):
            raise ValueError("hbar and k must be positive")

    @property
    def omega0(self) -> float:
        """Reference oscillator frequency 1/sqrt(LC)."""
        return 1.0 / math.sqrt(self.L * self.C)

    @property
    def critical_resistance(self) -> float:
        """sqrt(L/C), the boundary of the oscillatory regime."""
        return math.sqrt(self.L / self.C)

    def is_underdamped(self) -> bool:
        return self.R < self.critical_resistance

    def require_underdamped(self) -> None:
        if not self.is_underdamped():
            raise OverdampedError(
                f"R={self.R} >= sqrt(L/C)={self.critical_resistance}: "
                "overdamped circuit is out of the oscillatory domain"
            )

    def basis_tag(self) -> str:
        """Descriptor of the truncated number basis these parameters define.

        R does not enter: the reference basis is the R=0 oscillator.
        """
        return f"fock(L={self.L!r},C={self.C!r},hbar={self.hbar!r})"


ABSTRACT_TAG = "fock(abstract)"


@dataclass(frozen=True)
class TruncatedOperator:
    """A dense N x N matrix on a truncated number basis.

    ``hermitian`` records whether the operator is required (and checked
    on construction) to be Hermitian; ladder operators carry False.
    Entries are stored read-only.  Two operators may be combined only
    when both dim and basis_tag match.
    """

    dim: int
    entries: np.ndarray
    basis_tag: str
    hermitian: bool = True

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"operator dimension must be >= 2, got {self.dim}")
        entries = np.array(self.entries, dtype=complex, order="C")
        if entries.shape != (self.dim, self.dim):
            raise ValueError(
                f"entries shape {entries.shape} does not match dim {self.dim}"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if self.hermitian:
            dev = np.abs(entries - entries.conj().T).max()
            if dev > HERMITICITY_ATOL:
                raise HermiticityError(
                    f"operator tagged Hermitian deviates by {dev:.3e} "
                    f"(> {HERMITICITY_ATOL:.0e} per entry)"
                )

    def _check_compatible(self, other: "TruncatedOperator") -> None:
        if self.dim != other.dim or self.basis_tag != other.basis_tag:
            raise BasisMismatchError(
                f"cannot combine operators: dim/basis "
                f"({self.dim}, {self.basis_tag}) vs ({other.dim}, {other.basis_tag})"
            )

    def __add__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        self._check_compatible(other)
        return TruncatedOperator(
            self.dim,
            self.entries + other.entries,
            self.basis_tag,
            hermitian=self.hermitian and other.hermitian,
        )

    def __sub__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        self._check_compatible(other)
        return TruncatedOperator(
            self.dim,
            self.entries - other.entries,
            self.basis_tag,
            hermitian=self.hermitian and other.hermitian,
        )

    def __neg__(self) -> "TruncatedOperator":
        return TruncatedOperator(self.dim, -self.entries, self.basis_tag, self.hermitian)

    def __mul__(self, scalar: complex) -> "TruncatedOperator":
        herm = self.hermitian and complex(scalar).imag == 0.0
        return TruncatedOperator(self.dim, self.entries * scalar, self.basis_tag, herm)

    __rmul__ = __mul__

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        self._check_compatible(other)
        # Products of truncated factors are generally not Hermitian and
        # carry truncation corruption near the edge; tag conservatively.
        return TruncatedOperator(
            self.dim, self.entries @ other.entries, self.basis_tag, hermitian=False
        )

    def dagger(self) -> "TruncatedOperator":
        return TruncatedOperator(
            self.dim, self.entries.conj().T, self.basis_tag, self.hermitian
        )


@dataclass(frozen=True)
class QuadraticForms:
    """Exact truncations of q^2, p^2 and pq+qp on the reference basis.

    These are the matrix elements <m|O|n> of the abstract operators for
    m, n < N, i.e. the edge-exact blocks from which the Hamiltonian and
    its parameter derivatives are assembled.
    """

    p_squared: TruncatedOperator
    q_squared: TruncatedOperator
    pq_plus_qp: TruncatedOperator


def build_ladder(N: int) -> tuple[TruncatedOperator, TruncatedOperator]:
    """Annihilation and creation operators on N number states.

    a has sqrt(n) on its first superdiagonal (n = 1..N-1); a_dagger is
    its conjugate transpose.  Both are tagged non-Hermitian.
    """
    if N < 2:
        raise ValueError(f"ladder operators need dimension >= 2, got N={N}")
    a = np.zeros((N, N), dtype=complex)
    n = np.arange(1, N)
    a[n - 1, n] = np.sqrt(n)
    lower = TruncatedOperator(N, a, ABSTRACT_TAG, hermitian=False)
    raiser = TruncatedOperator(N, a.conj().T, ABSTRACT_TAG, hermitian=False)
    return lower, raiser


def build_quadratures(
    params: CircuitParams, N: int
) -> tuple[TruncatedOperator, TruncatedOperator]:
    """Charge q and momentum p on the reference number basis.

    q = sqrt(hbar/(2 L omega0)) (a + a^dag),
    p = i sqrt(hbar L omega0 / 2) (a^dag - a).
    """
    if N < 2:
        raise ValueError(f"quadratures need dimension >= 2, got N={N}")
    s = math.sqrt(params.hbar / (2.0 * params.L * params.omega0))
    t = math.sqrt(params.hbar * params.L * params.omega0 / 2.0)
    n = np.arange(1, N)
    root = np.sqrt(n)
    q = np.zeros((N, N), dtype=complex)
    q[n - 1, n] = s * root
    q[n, n - 1] = s * root
    p = np.zeros((N, N), dtype=complex)
    p[n - 1, n] = -1j * t * root
    p[n, n - 1] = 1j * t * root
    tag = params.basis_tag()
    return (
        TruncatedOperator(N, q, tag, hermitian=True),
        TruncatedOperator(N, p, tag, hermitian=True),
    )


def build_quadratic_forms(params: CircuitParams, N: int) -> QuadraticForms:
    """Exact q^2, p^2, pq+qp blocks on the reference basis.

    With K = a^2 + (a^dag)^2 and D = diag(2n+1):

        p^2     = (hbar L omega0 / 2) (D - K)
        q^2     = (hbar / (2 L omega0)) (D + K)
        pq + qp = i hbar ((a^dag)^2 - a^2)

    pq+qp is identical to the product of truncated factors; the squares
    differ from such products only in the (N-1, N-1) entry.
    """
    if N < 2:
        raise ValueError(f"quadratic forms need dimension >= 2, got N={N}")
    hbar = params.hbar
    s2 = hbar / (2.0 * params.L * params.omega0)
    t2 = hbar * params.L * params.omega0 / 2.0
    n = np.arange(N)
    diag = (2 * n + 1).astype(float)
    m = np.arange(N - 2)
    root = np.sqrt((m + 1.0) * (m + 2.0))

    K = np.zeros((N, N), dtype=complex)
    K[m, m + 2] = root
    K[m + 2, m] = root

    D = np.diag(diag).astype(complex)
    p2 = t2 * (D - K)
    q2 = s2 * (D + K)

    x = np.zeros((N, N), dtype=complex)
    x[m, m + 2] = -1j * hbar * root
    x[m + 2, m] = 1j * hbar * root

    tag = params.basis_tag()
    return QuadraticForms(
        p_squared=TruncatedOperator(N, p2, tag, hermitian=True),
        q_squared=TruncatedOperator(N, q2, tag, hermitian=True),
        pq_plus_qp=TruncatedOperator(N, x, tag, hermitian=True),
    )


def hamiltonian_coefficients(params: CircuitParams) -> tuple[float, float, float]:
    """Coefficients (of p^2, q^2, pq+qp) in the circuit Hamiltonian."""
    return 1.0 / (2.0 * params.L), 1.0 / (2.0 * params.C), params.R / (2.0 * params.L)


def build_hamiltonian(params: CircuitParams, N: int) -> TruncatedOperator:
    """Circuit Hamiltonian p^2/(2L) + q^2/(2C) + (R/2L)(pq+qp)."""
    forms = build_quadratic_forms(params, N)
    cp, cq, cx = hamiltonian_coefficients(params)
    entries = (
        cp * forms.p_squared.entries
        + cq * forms.q_squared.entries
        + cx * forms.pq_plus_qp.entries
    )
    return TruncatedOperator(N, entries, params.basis_tag(), hermitian=True)


PARAMETER_TAGS = ("L", "C", "R")


def build_parameter_derivative(
    params: CircuitParams, N: int, which: str
) -> TruncatedOperator:
    """dH/dL, dH/dC or dH/dR with the q, p representation held fixed.

    The derivative acts on the Hamiltonian coefficients only:

        dH/dL = -p^2/(2L^2) - (R/(2L^2))(pq+qp)
        dH/dC = -q^2/(2C^2)
        dH/dR = (pq+qp)/(2L)

    consistent with taking numerical derivatives of observables in the
    frozen reference basis of the centre-point parameters.
    """
    forms = build_quadratic_forms(params, N)
    L, C, R = params.L, params.C, params.R
    if which == "L":
        entries = (
            -forms.p_squared.entries / (2.0 * L * L)
            - (R / (2.0 * L * L)) * forms.pq_plus_qp.entries
        )
    elif which == "C":
        entries = -forms.q_squared.entries / (2.0 * C * C)
    elif which == "R":
        entries = forms.pq_plus_qp.entries / (2.0 * L)
    else:
        raise ValueError(f"unknown parameter tag {which!r}, expected one of L, C, R")
    return TruncatedOperator(N, entries, params.basis_tag(), hermitian=True)


def commutator(A: TruncatedOperator, B: TruncatedOperator) -> TruncatedOperator:
    """AB - BA as a product of the truncated matrices.

    Truncation corrupts the result near the edge rows/columns; identity
    checks should restrict to a leading interior block (half the
    dimension is the convention used throughout).
    """
    A._check_compatible(B)
    entries = A.entries @ B.entries - B.entries @ A.entries
    return TruncatedOperator(A.dim, entries, A.basis_tag, hermitian=False)


def leading_block(op: TruncatedOperator, k: int) -> np.ndarray:
    """Top-left k x k block of the operator's matrix."""
    if not 0 < k <= op.dim:
        raise ValueError(f"block size {k} out of range for dim {op.dim}")
    return op.entries[:k, :k]
