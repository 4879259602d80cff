"""Exact-diagonalization Gibbs engine on the truncated number basis.

This module is the independent numerical oracle for every closed-form
thermodynamic result in :mod:`qrlc.closed_forms`: it knows nothing of
those formulas and obtains every quantity from the eigendecomposition
of the circuit Hamiltonian.

All Gibbs arithmetic shifts energies by the ground state and uses
log-sum-exp, so beta * E up to ~1e4 causes no overflow.  Entropy is
computed from the Gibbs weights directly (exact in the eigenbasis),
never from a matrix logarithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .checks import CheckResult, make_check
from .fock_operators import (
    CircuitParams,
    HermiticityError,
    TruncatedOperator,
    build_quadratic_forms,
    build_hamiltonian,
)

EIGEN_RESIDUAL_TOL = 1e-10
PROBABILITY_ATOL = 1e-12
#: Gibbs weights below this cannot move any reported observable at the
#: tolerances used anywhere in the toolkit; expectation values skip them.
NEGLIGIBLE_WEIGHT = 1e-20

LADDER_START = 32
LADDER_CAP = 1024
TAIL_TOLERANCE = 1e-14
RESIDUAL_FLOOR_VALUE = 1e-12


class EigensolverError(RuntimeError):
    """Eigensolver failed or produced eigenpairs violating invariants."""

    def __init__(self, message: str, dim: int):
        super().__init__(f"{message} (dim N={dim})")
        self.dim = dim


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (ascending) and orthonormal eigenvectors of H."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    dim: int
    basis_tag: str

    def __post_init__(self) -> None:
        eigenvalues = np.array(self.eigenvalues, dtype=float)
        eigenvectors = np.array(self.eigenvectors, dtype=complex)
        eigenvalues.setflags(write=False)
        eigenvectors.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "eigenvectors", eigenvectors)


@dataclass(frozen=True)
class ThermalState:
    """Gibbs weights p_n = exp(-beta(E_n - E_0)) / sum, with log Z.

    ``log_partition`` is the full ln Z = ln(sum exp(-beta(E_n - E_0)))
    - beta E_0, evaluated in shifted (log-sum-exp) form.
    """

    beta: float
    log_partition: float
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if p.min() < 0.0:
            raise ValueError("negative Gibbs weight")
        if abs(p.sum() - 1.0) > PROBABILITY_ATOL:
            raise ValueError(f"weights sum to {p.sum()!r}, not 1")
        if np.any(np.diff(p) > 0.0):
            raise ValueError("Gibbs weights must be non-increasing in n")


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of the truncation-doubling ladder for one observable."""

    N_used: int
    tail_mass: float
    successive_change: float
    converged: bool


def diagonalize(H: TruncatedOperator, *, validate: bool = True) -> Spectrum:
    """Full eigendecomposition of a Hermitian operator.

    Parameters
    ----------
    H : TruncatedOperator
        Hermitian operator (construction already enforced Hermiticity).
    validate : bool
        When True (default), verify the eigenpair residuals
        ||H v - E v|| < 1e-10 max(1, |E|) and column orthonormality to
        1e-10, raising EigensolverError on violation.

    Returns
    -------
    Spectrum
    """
    if not H.hermitian:
        raise HermiticityError("diagonalize requires an operator tagged Hermitian")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(H.entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge: {exc}", H.dim) from exc
    if validate:
        residual = H.entries @ eigenvectors - eigenvectors * eigenvalues
        norms = np.linalg.norm(residual, axis=0)
        bounds = EIGEN_RESIDUAL_TOL * np.maximum(1.0, np.abs(eigenvalues))
        if np.any(norms >= bounds):
            worst = int(np.argmax(norms - bounds))
            raise EigensolverError(
                f"eigenpair residual {norms[worst]:.3e} exceeds bound for "
                f"eigenvalue {eigenvalues[worst]!r}",
                H.dim,
            )
        gram = eigenvectors.conj().T @ eigenvectors
        dev = np.abs(gram - np.eye(H.dim)).max()
        if dev > 1e-10:
            raise EigensolverError(
                f"eigenvector matrix not unitary, deviation {dev:.3e}", H.dim
            )
    return Spectrum(eigenvalues, eigenvectors, H.dim, H.basis_tag)


def gibbs_weights(eigenvalues: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    """Normalized Gibbs weights and full ln Z from an energy sequence."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    energies = np.asarray(eigenvalues, dtype=float)
    ground = energies[0]
    shifted = np.exp(-beta * (energies - ground))
    norm = shifted.sum()
    log_partition = math.log(norm) - beta * ground
    return shifted / norm, log_partition


def thermal_state(spec: Spectrum, beta: float) -> ThermalState:
    """Gibbs state of a diagonalized Hamiltonian at inverse temperature beta."""
    probabilities, log_partition = gibbs_weights(spec.eigenvalues, beta)
    return ThermalState(beta=beta, log_partition=log_partition, probabilities=probabilities)


def ensemble_average(
    state: ThermalState, spec: Spectrum, A: TruncatedOperator
) -> float:
    """Thermal expectation sum_n p_n <v_n|A|v_n> of a Hermitian operator.

    Eigenvectors with weight below ~1e-20 are skipped; their total
    contribution is far below every tolerance in the toolkit.  An
    imaginary part above 1e-10 in the sum raises HermiticityError.
    """
    if A.dim != spec.dim or A.basis_tag != spec.basis_tag:
        raise ValueError(
            f"operator dim/basis ({A.dim}, {A.basis_tag}) does not match "
            f"spectrum ({spec.dim}, {spec.basis_tag})"
        )
    if not A.hermitian:
        raise HermiticityError("ensemble_average requires a Hermitian operator")
    p = state.probabilities
    keep = int(np.searchsorted(-p, -NEGLIGIBLE_WEIGHT, side="right"))
    keep = max(keep, 1)
    vecs = spec.eigenvectors[:, :keep]
    diag = np.einsum("in,in->n", vecs.conj(), A.entries @ vecs)
    total = complex(np.dot(p[:keep], diag))
    if abs(total.imag) >= 1e-10:
        raise HermiticityError(
            f"ensemble average has imaginary part {total.imag:.3e}"
        )
    return float(total.real)


def internal_energy(state: ThermalState, spec: Spectrum) -> float:
    """<H> = sum_n p_n E_n."""
    return float(np.dot(state.probabilities, spec.eigenvalues))


def fluctuation(state: ThermalState, spec: Spectrum) -> float:
    """(Delta H)^2 = <H^2> - <H>^2, evaluated as sum p (E - <H>)^2 >= 0."""
    mean = internal_energy(state, spec)
    return float(np.dot(state.probabilities, (spec.eigenvalues - mean) ** 2))


def von_neumann_entropy(state: ThermalState, k: float = 1.0) -> float:
    """S = -k sum_n p_n ln p_n with 0 ln 0 := 0; zero for pure weights."""
    p = state.probabilities
    p = p[p > 0.0]
    return float(-k * np.dot(p, np.log(p)))


def free_energy(state: ThermalState) -> float:
    """Helmholtz free energy F = -(1/beta) ln Z."""
    return -state.log_partition / state.beta


def thermo_identities(
    state: ThermalState, spec: Spectrum, k: float = 1.0
) -> tuple[CheckResult, CheckResult]:
    """Consistency of the same Gibbs weights along two algebraic routes.

    Checks F = <H> - T S and S = <H>/T + k ln Z, each to 1e-10 relative.
    """
    temp = 1.0 / (k * state.beta)
    mean = internal_energy(state, spec)
    entropy = von_neumann_entropy(state, k)
    context = {"beta": state.beta, "k": k}
    first = make_check(
        "free_energy_identity",
        lhs=free_energy(state),
        rhs=mean - temp * entropy,
        tolerance=1e-10,
        context=context,
    )
    second = make_check(
        "entropy_identity",
        lhs=entropy,
        rhs=mean / temp + k * state.log_partition,
        tolerance=1e-10,
        context=context,
    )
    return first, second


def thermal_scalars(
    eigenvalues: np.ndarray, beta: float, k: float = 1.0
) -> dict[str, float]:
    """Internal energy, entropy, fluctuation, ln Z and F from eigenvalues.

    Shared fast path for the truncation ladder and the derivative
    verifier, which work from eigenvalues alone.
    """
    p, log_partition = gibbs_weights(eigenvalues, beta)
    energies = np.asarray(eigenvalues, dtype=float)
    mean = float(np.dot(p, energies))
    var = float(np.dot(p, (energies - mean) ** 2))
    positive = p[p > 0.0]
    entropy = float(-k * np.dot(positive, np.log(positive)))
    return {
        "internal_energy": mean,
        "entropy": entropy,
        "fluctuation": var,
        "log_partition": log_partition,
        "free_energy": -log_partition / beta,
        "tail_mass": float(p[-1]),
    }


def _eigenvalues_at(params: CircuitParams, N: int) -> np.ndarray:
    return np.linalg.eigvalsh(build_hamiltonian(params, N).entries)


def _evaluate_observable(
    params: CircuitParams, beta: float, observable: str, N: int
) -> tuple[float, float]:
    """(value, tail_mass) of one tagged observable at truncation N."""
    if observable in ("internal_energy", "entropy", "fluctuation", "free_energy"):
        scalars = thermal_scalars(_eigenvalues_at(params, N), beta, params.k)
        return scalars[observable], scalars["tail_mass"]
    if observable == "omega":
        eigenvalues = _eigenvalues_at(params, N)
        p, _ = gibbs_weights(eigenvalues, beta)
        return float(eigenvalues[1] - eigenvalues[0]) / params.hbar, float(p[-1])
    if observable in ("pq_plus_qp", "resistor_energy"):
        spec = diagonalize(build_hamiltonian(params, N), validate=False)
        state = thermal_state(spec, beta)
        forms = build_quadratic_forms(params, N)
        value = ensemble_average(state, spec, forms.pq_plus_qp)
        if observable == "resistor_energy":
            value *= params.R / (2.0 * params.L)
        return value, float(state.probabilities[-1])
    raise ValueError(f"unknown observable tag {observable!r}")


def converged_observable(
    params: CircuitParams,
    beta: float,
    observable: str,
    tol: float,
    *,
    n_start: int = LADDER_START,
    n_cap: int = LADDER_CAP,
    tail_tol: float = TAIL_TOLERANCE,
    trace: list[dict] | None = None,
) -> tuple[float, ConvergenceReport]:
    """Evaluate an observable on a doubling truncation ladder.

    N runs over n_start, 2 n_start, ... up to n_cap until the relative
    change between consecutive values drops below ``tol`` and the weight
    of the last kept level is below ``tail_tol``.  A ladder that hits
    the cap returns its best value flagged ``converged=False``; it is
    never silently treated as converged.  Pass a list as ``trace`` to
    record one dict per rung.
    """
    params.require_underdamped()
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    value = math.nan
    change = math.inf
    tail = math.inf
    N = n_start
    previous = None
    while True:
        value, tail = _evaluate_observable(params, beta, observable, N)
        if previous is not None:
            change = abs(value - previous) / max(abs(value), RESIDUAL_FLOOR_VALUE)
        if trace is not None:
            trace.append(
                {"N": N, "value": value, "tail_mass": tail, "successive_change": change}
            )
        converged = previous is not None and change < tol and tail < tail_tol
        if converged or N >= n_cap:
            return value, ConvergenceReport(
                N_used=N,
                tail_mass=tail,
                successive_change=change,
                converged=converged,
            )
        previous = value
        N = min(2 * N, n_cap)
