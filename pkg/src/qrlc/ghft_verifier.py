"""Numerical verification of the thermal Hellmann-Feynman identities.

Each check pits two independently computed sides against each other:
finite-difference derivatives of exact-diagonalization observables on
one side, operator expectation values (or closed forms) on the other.

Frozen-basis contract
---------------------
All parameter derivatives are taken with the operator representation
frozen at the centre-point basis: the Hamiltonian family is

    H(chi) = c_p(chi) p^2 + c_q(chi) q^2 + c_x(chi) (pq+qp)

with the three matrix blocks fixed and only the scalar coefficients
varying.  The parameter-derivative operators of
:func:`qrlc.fock_operators.build_parameter_derivative` are exactly the
derivatives of this family, so every identity checked here holds for
the truncated system as a finite-dimensional quantum system in its own
right; truncation only controls how well that system approximates the
untruncated circuit.  Derivatives over beta reuse the centre spectrum
(no re-diagonalization), so their only noise is the beta stencil.

Stencils are h = 1e-4 max(1, |x|) for parameter derivatives and
h = 1e-4 beta for beta derivatives, each Richardson-refined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .checks import CheckResult, make_check
from .closed_forms import (
    characteristic_invariants,
    dS_dR_cf,
    omega,
)
from .fock_operators import (
    CircuitParams,
    OverdampedError,
    QuadraticForms,
    build_hamiltonian,
    build_quadratic_forms,
    hamiltonian_coefficients,
)
from .thermal_oracle import (
    ConvergenceReport,
    converged_observable,
    diagonalize,
    ensemble_average,
    gibbs_weights,
    internal_energy,
    thermal_scalars,
    thermal_state,
    von_neumann_entropy,
)

PARAMETER_STEP = 1e-4
IDENTITY_TOL = 1e-5
PDE_TOL = 1e-4
CHARACTERISTIC_TOL = 1e-6
PURE_HF_TOL = 1e-6
COMMUTATOR_SCALE_TOL = 1e-6

#: a cap-bound ladder still counts as certified when the geometric
#: contraction of its successive changes bounds the remaining error
#: below this
CERTIFICATION_BOUND = 1e-7
#: rungs whose remaining ladder drift is below this may serve as the
#: working truncation
WORKING_DRIFT = 1e-8
#: Gibbs weights below this are dropped from eigenbasis expectation sums
OCCUPANCY_CUTOFF = 1e-20


class StencilDomainError(ValueError):
    """A finite-difference stencil point left the valid domain."""


class CharacteristicMismatchError(ValueError):
    """Two parameter sets do not share the characteristic invariant c2."""


@dataclass(frozen=True)
class DerivativeEstimate:
    """Richardson-refined central difference with an error estimate."""

    value: float
    step: float
    error_estimate: float


def finite_diff(f: Callable[[float], float], x: float, h: float) -> DerivativeEstimate:
    """Central difference of f at x, Richardson-extrapolated with h/2.

    The error estimate is the disagreement between the h and h/2
    estimates; stencil points outside f's domain raise
    StencilDomainError naming the offending point.
    """
    if h <= 0.0:
        raise ValueError(f"step must be positive, got h={h}")
    values = {}
    for point in (x + h, x - h, x + h / 2, x - h / 2):
        try:
            values[point] = f(point)
        except (OverdampedError, ValueError) as exc:
            raise StencilDomainError(
                f"stencil point {point!r} is outside the domain: {exc}"
            ) from exc
    coarse = (values[x + h] - values[x - h]) / (2.0 * h)
    fine = (values[x + h / 2] - values[x - h / 2]) / h
    value = (4.0 * fine - coarse) / 3.0
    return DerivativeEstimate(value=value, step=h, error_estimate=abs(fine - coarse) / 3.0)


def _parameter_step(x: float) -> float:
    return PARAMETER_STEP * max(1.0, abs(x))


def _remaining_error_bound(trace: list[dict]) -> float | None:
    """Error bound for a cap-bound ladder from its observed contraction.

    Truncation errors of these spectra shrink faster than geometrically
    with each doubling (the successive changes contract at an
    accelerating rate), so modelling the unobserved future changes as a
    geometric tail with the last observed ratio over-estimates the true
    remaining error.  Returns None when fewer than two finite changes
    are available or the contraction is too weak to trust.
    """
    changes = [entry["successive_change"] for entry in trace]
    finite = [c for c in changes if np.isfinite(c)]
    if len(finite) < 2:
        return None
    last, previous = finite[-1], finite[-2]
    if previous <= 0.0:
        return 0.0 if last == 0.0 else None
    ratio = last / previous
    if ratio >= 0.5:
        return None
    return last * ratio / (1.0 - ratio)


def _working_dimension(trace: list[dict], tail_tol: float) -> int:
    """Smallest ladder rung whose value has essentially stopped moving.

    Walking back from the final rung, a rung may serve as the working
    truncation when the summed successive changes after it stay below
    WORKING_DRIFT and its tail mass satisfies the tail tolerance.  The
    ladder frequently overshoots (it needs one extra doubling to
    observe a small change); the physics is converged one rung
    earlier.
    """
    choice = trace[-1]["N"]
    drift = 0.0
    for k in range(len(trace) - 1, 0, -1):
        drift += trace[k]["successive_change"]
        if drift > WORKING_DRIFT or trace[k - 1]["tail_mass"] >= tail_tol:
            break
        choice = trace[k - 1]["N"]
    return int(choice)


class PointWorkspace:
    """Everything the checks need at one (params, beta) point, cached.

    Runs the internal-energy doubling ladder to settle the truncation,
    freezes the quadratic-form blocks at the centre parameters, holds
    the validated centre spectrum/state and memoizes the frozen-family
    eigenvalue solves the finite-difference stencils require.

    ``certified`` is True when the ladder converged at its tolerance,
    or when it hit the cap but the observed contraction of successive
    changes bounds the remaining truncation error below
    CERTIFICATION_BOUND (recorded as ``truncation_bound``).  Checks are
    conclusive only for certified workspaces.
    """

    def __init__(
        self,
        params: CircuitParams,
        beta: float,
        *,
        oracle_tol: float = 1e-9,
        n_start: int = 32,
        n_cap: int = 1024,
        tail_tol: float = 1e-14,
    ):
        params.require_underdamped()
        if beta <= 0.0:
            raise ValueError(f"beta must be positive, got {beta}")
        self.params = params
        self.beta = beta
        trace: list[dict] = []
        _, report = converged_observable(
            params,
            beta,
            "internal_energy",
            oracle_tol,
            n_start=n_start,
            n_cap=n_cap,
            tail_tol=tail_tol,
            trace=trace,
        )
        self.report: ConvergenceReport = report
        self.truncation_bound: float | None = None
        if report.converged:
            self.certified = True
        else:
            self.truncation_bound = _remaining_error_bound(trace)
            self.certified = (
                self.truncation_bound is not None
                and self.truncation_bound < CERTIFICATION_BOUND
                and report.tail_mass < tail_tol
            )
        self.N = _working_dimension(trace, tail_tol)
        self.forms: QuadraticForms = build_quadratic_forms(params, self.N)
        self.spectrum = diagonalize(build_hamiltonian(params, self.N))
        self.state = thermal_state(self.spectrum, beta)
        self.U = internal_energy(self.state, self.spectrum)
        self.S = von_neumann_entropy(self.state, params.k)
        p = self.state.probabilities
        self.occupied = max(int(np.count_nonzero(p > OCCUPANCY_CUTOFF)), 1)
        self._coefficient_scalars: dict[tuple[float, float, float], dict[str, float]] = {}
        self._dchi_diagonals: dict[str, np.ndarray] = {}

    # -- frozen-basis coefficient family ---------------------------------

    def scalars_at_coefficients(
        self, cp: float, cq: float, cx: float
    ) -> dict[str, float]:
        """Thermal scalars of H = cp p^2 + cq q^2 + cx (pq+qp), frozen blocks."""
        key = (cp, cq, cx)
        cached = self._coefficient_scalars.get(key)
        if cached is None:
            if cp <= 0.0 or cq <= 0.0 or 4.0 * (cp * cq - cx * cx) <= 0.0:
                raise OverdampedError(
                    f"coefficients (cp={cp}, cq={cq}, cx={cx}) leave the "
                    "oscillatory domain"
                )
            entries = (
                cp * self.forms.p_squared.entries
                + cq * self.forms.q_squared.entries
                + cx * self.forms.pq_plus_qp.entries
            )
            eigenvalues = np.linalg.eigvalsh(entries)
            cached = thermal_scalars(eigenvalues, self.beta, self.params.k)
            self._coefficient_scalars[key] = cached
        return cached

    def _coefficients_for(self, chi: str, value: float) -> tuple[float, float, float]:
        L, C, R = self.params.L, self.params.C, self.params.R
        if chi == "L":
            L = value
        elif chi == "C":
            C = value
        elif chi == "R":
            R = value
        else:
            raise ValueError(f"unknown parameter tag {chi!r}")
        if L <= 0.0 or C <= 0.0:
            raise OverdampedError(f"{chi}={value} makes the circuit unphysical")
        return 1.0 / (2.0 * L), 1.0 / (2.0 * C), R / (2.0 * L)

    def scalars_at(self, chi: str, value: float) -> dict[str, float]:
        return self.scalars_at_coefficients(*self._coefficients_for(chi, value))

    def center_value(self, chi: str) -> float:
        return getattr(self.params, chi)

    # -- derivatives over circuit parameters -----------------------------

    def du_dchi(self, chi: str) -> DerivativeEstimate:
        x0 = self.center_value(chi)
        return finite_diff(
            lambda v: self.scalars_at(chi, v)["internal_energy"],
            x0,
            _parameter_step(x0),
        )

    def ds_dchi(self, chi: str) -> DerivativeEstimate:
        x0 = self.center_value(chi)
        return finite_diff(
            lambda v: self.scalars_at(chi, v)["entropy"], x0, _parameter_step(x0)
        )

    # -- dH/dchi in the centre eigenbasis ---------------------------------

    def _dchi_entries(self, chi: str) -> np.ndarray:
        L, C, R = self.params.L, self.params.C, self.params.R
        if chi == "L":
            return (
                -self.forms.p_squared.entries / (2.0 * L * L)
                - (R / (2.0 * L * L)) * self.forms.pq_plus_qp.entries
            )
        if chi == "C":
            return -self.forms.q_squared.entries / (2.0 * C * C)
        if chi == "R":
            return self.forms.pq_plus_qp.entries / (2.0 * L)
        raise ValueError(f"unknown parameter tag {chi!r}")

    def dchi_diagonal(self, chi: str) -> np.ndarray:
        """<v_n| dH/dchi |v_n> for the thermally occupied centre eigenvectors.

        Restricted to weights above OCCUPANCY_CUTOFF; the dropped terms
        lie far below every tolerance in the suite.
        """
        diag = self._dchi_diagonals.get(chi)
        if diag is None:
            vecs = self.spectrum.eigenvectors[:, : self.occupied]
            diag = np.einsum(
                "in,in->n", vecs.conj(), self._dchi_entries(chi) @ vecs
            ).real
            self._dchi_diagonals[chi] = diag
        return diag

    def avg_dchi(self, chi: str, beta: float | None = None) -> float:
        """<dH/dchi> at the centre spectrum, any inverse temperature."""
        diag = self.dchi_diagonal(chi)
        if beta is None:
            p = self.state.probabilities
        else:
            p, _ = gibbs_weights(self.spectrum.eigenvalues, beta)
        return float(np.dot(p[: self.occupied], diag))

    def dbeta_avg_dchi(self, chi: str) -> DerivativeEstimate:
        return finite_diff(
            lambda b: self.avg_dchi(chi, b), self.beta, PARAMETER_STEP * self.beta
        )

    def u_at_beta(self, beta: float) -> float:
        return thermal_scalars(self.spectrum.eigenvalues, beta, self.params.k)[
            "internal_energy"
        ]

    def dbeta_u(self) -> DerivativeEstimate:
        return finite_diff(self.u_at_beta, self.beta, PARAMETER_STEP * self.beta)

    # -- centre observables ----------------------------------------------

    def fluctuation(self) -> float:
        mean = self.U
        return float(
            np.dot(self.state.probabilities, (self.spectrum.eigenvalues - mean) ** 2)
        )

    def pq_plus_qp_average(self) -> float:
        return ensemble_average(self.state, self.spectrum, self.forms.pq_plus_qp)

    def context(self, **extra: Any) -> dict[str, Any]:
        base = {
            "L": self.params.L,
            "C": self.params.C,
            "R": self.params.R,
            "beta": self.beta,
            "N": self.N,
            "ladder_N": self.report.N_used,
            "ladder_converged": self.report.converged,
        }
        if self.truncation_bound is not None:
            base["truncation_bound"] = self.truncation_bound
        base.update(extra)
        return base


def _workspace(
    params: CircuitParams, beta: float, workspace: PointWorkspace | None
) -> PointWorkspace:
    if workspace is not None:
        return workspace
    return PointWorkspace(params, beta)


def check_ghft_weighted_average(
    params: CircuitParams,
    beta: float,
    chi: str,
    *,
    workspace: PointWorkspace | None = None,
    tolerance: float = IDENTITY_TOL,
) -> CheckResult:
    """d<H>/dchi against <(1 + beta<H> - beta H) dH/dchi>."""
    ws = _workspace(params, beta, workspace)
    lhs = ws.du_dchi(chi).value
    occ = ws.occupied
    p = ws.state.probabilities[:occ]
    energies = ws.spectrum.eigenvalues[:occ]
    weight = p * (1.0 + beta * ws.U - beta * energies)
    rhs = float(np.dot(weight, ws.dchi_diagonal(chi)))
    return make_check(
        "ghft_weighted_average",
        lhs,
        rhs,
        tolerance,
        conclusive=ws.certified,
        context=ws.context(chi=chi),
    )


def check_ghft_correlation(
    params: CircuitParams,
    beta: float,
    chi: str,
    *,
    workspace: PointWorkspace | None = None,
    tolerance: float = IDENTITY_TOL,
) -> CheckResult:
    """<H dH/dchi> against -d_beta<dH/dchi> + <dH/dchi><H>.

    The product average is evaluated in the energy basis,
    sum_n p_n E_n <v_n|dH/dchi|v_n>, which equals tr(rho H dH/dchi)
    because rho and H share eigenvectors.
    """
    ws = _workspace(params, beta, workspace)
    diag = ws.dchi_diagonal(chi)
    occ = ws.occupied
    p = ws.state.probabilities[:occ]
    energies = ws.spectrum.eigenvalues[:occ]
    lhs = float(np.dot(p * energies, diag))
    rhs = -ws.dbeta_avg_dchi(chi).value + ws.avg_dchi(chi) * ws.U
    return make_check(
        "ghft_correlation",
        lhs,
        rhs,
        tolerance,
        conclusive=ws.certified,
        context=ws.context(chi=chi),
    )


def check_ghft_beta_form(
    params: CircuitParams,
    beta: float,
    chi: str,
    *,
    workspace: PointWorkspace | None = None,
    tolerance: float = IDENTITY_TOL,
) -> CheckResult:
    """d<H>/dchi against (1 + beta d_beta) <dH/dchi>."""
    ws = _workspace(params, beta, workspace)
    lhs = ws.du_dchi(chi).value
    rhs = ws.avg_dchi(chi) + beta * ws.dbeta_avg_dchi(chi).value
    return make_check(
        "ghft_beta_form",
        lhs,
        rhs,
        tolerance,
        conclusive=ws.certified,
        context=ws.context(chi=chi),
    )


def check_fluctuation_identity(
    params: CircuitParams,
    beta: float,
    *,
    workspace: PointWorkspace | None = None,
    tolerance: float = IDENTITY_TOL,
) -> CheckResult:
    """(Delta H)^2 against -d<H>/d_beta on the centre spectrum."""
    ws = _workspace(params, beta, workspace)
    lhs = ws.fluctuation()
    rhs = -ws.dbeta_u().value
    return make_check(
        "fluctuation_beta_derivative",
        lhs,
        rhs,
        tolerance,
        conclusive=ws.certified,
        context=ws.context(),
    )


ENTROPY_VARIATION_FORMS = ("difference", "beta_derivative")


def check_entropy_variation(
    params: CircuitParams,
    beta: float,
    chi: str,
    form: str,
    *,
    workspace: PointWorkspace | None = None,
    tolerance: float = IDENTITY_TOL,
) -> CheckResult:
    """Entropy-variation identities in either of their two forms.

    ``difference``:       dS/dchi = (1/T)(d<H>/dchi - <dH/dchi>)
    ``beta_derivative``:  T dS/dchi = beta d_beta <dH/dchi>
    """
    ws = _workspace(params, beta, workspace)
    k = params.k
    if form == "difference":
        lhs = ws.ds_dchi(chi).value
        rhs = k * beta * (ws.du_dchi(chi).value - ws.avg_dchi(chi))
        name = "entropy_variation_difference"
    elif form == "beta_derivative":
        lhs = ws.ds_dchi(chi).value / (k * beta)
        rhs = beta * ws.dbeta_avg_dchi(chi).value
        name = "entropy_variation_beta_form"
    else:
        raise ValueError(
            f"unknown entropy-variation form {form!r}; "
            f"expected one of {ENTROPY_VARIATION_FORMS}"
        )
    return make_check(
        name,
        lhs,
        rhs,
        tolerance,
        conclusive=ws.certified,
        context=ws.context(chi=chi, form=form),
    )


def check_characteristic_pde(
    params: CircuitParams,
    beta: float,
    *,
    workspace: PointWorkspace | None = None,
    tolerance: float = PDE_TOL,
) -> CheckResult:
    """Residual of the parameter-flow PDE, regularized by 2R.

    2R L^2 d<H>/dL + 2R C^2 d<H>/dC + (2LR^2 - L^2/C - L) d<H>/dR = 0;
    the residual is measured relative to the largest term.  At R = 0
    all terms collapse and the near-zero absolute rule applies.
    """
    ws = _workspace(params, beta, workspace)
    L, C, R = params.L, params.C, params.R
    term_l = 2.0 * R * L * L * ws.du_dchi("L").value
    term_c = 2.0 * R * C * C * ws.du_dchi("C").value
    term_r = (2.0 * L * R * R - L * L / C - L) * ws.du_dchi("R").value
    residual = term_l + term_c + term_r
    scale = max(abs(term_l), abs(term_c), abs(term_r))
    context = ws.context(
        term_L=term_l, term_C=term_c, term_R=term_r, term_scale=scale
    )
    if scale <= 1e-9:
        return make_check(
            "characteristic_pde",
            residual,
            0.0,
            1e-9,
            mode="absolute",
            conclusive=ws.certified,
            context=context,
        )
    result = make_check(
        "characteristic_pde",
        residual,
        0.0,
        tolerance * scale,
        mode="absolute",
        conclusive=ws.certified,
        context=context,
    )
    # report the scale-relative residual, which is what the tolerance means
    return CheckResult(
        name=result.name,
        lhs=result.lhs,
        rhs=result.rhs,
        abs_residual=result.abs_residual,
        rel_residual=abs(residual) / scale,
        tolerance=tolerance,
        passed=result.passed,
        conclusive=result.conclusive,
        context=result.context,
    )


def check_commutator_average(
    params: CircuitParams,
    beta: float,
    *,
    workspace: PointWorkspace | None = None,
    scale_tolerance: float = COMMUTATOR_SCALE_TOL,
) -> CheckResult:
    """Thermal average of the commutator bracket vanishes.

    Algebraically [q^2 - p^2, H] = i hbar [(1/L + 1/C)(pq+qp)
    + (2R/L)(p^2 + q^2)]; dividing by i leaves the Hermitian bracket
    B = hbar [(1/L + 1/C)(pq+qp) + (2R/L)(p^2 + q^2)], whose weighted
    average <(1 + beta<H> - beta H) B> is exactly zero for the
    untruncated circuit.  The tolerance is absolute, scaled by the
    bracket's average magnitude (the identity's exact value is zero).
    """
    ws = _workspace(params, beta, workspace)
    L, C, R = params.L, params.C, params.R
    hbar = params.hbar
    occ = ws.occupied
    vecs = ws.spectrum.eigenvectors[:, :occ]
    first = hbar * (1.0 / L + 1.0 / C) * ws.forms.pq_plus_qp.entries
    second = (2.0 * hbar * R / L) * (
        ws.forms.p_squared.entries + ws.forms.q_squared.entries
    )
    diag_first = np.einsum("in,in->n", vecs.conj(), first @ vecs).real
    diag_second = np.einsum("in,in->n", vecs.conj(), second @ vecs).real
    p = ws.state.probabilities[:occ]
    weight = 1.0 + beta * ws.U - beta * ws.spectrum.eigenvalues[:occ]
    average = float(np.dot(p * weight, diag_first + diag_second))
    magnitude = float(
        np.dot(p * np.abs(weight), np.abs(diag_first) + np.abs(diag_second))
    )
    tolerance = max(scale_tolerance * magnitude, 1e-9)
    return make_check(
        "commutator_thermal_average",
        average,
        0.0,
        tolerance,
        mode="absolute",
        conclusive=ws.certified,
        context=ws.context(bracket_magnitude=magnitude),
    )


def check_pure_state_hf(
    params: CircuitParams,
    N: int,
    n: int,
    chi: str,
    *,
    tolerance: float = PURE_HF_TOL,
) -> CheckResult:
    """Eigenstate Hellmann-Feynman: dE_n/dchi vs <psi_n|dH/dchi|psi_n>.

    The eigenvalue derivative is a frozen-basis finite difference with
    tracking by index, legitimate here because the spectrum is equally
    spaced (gap hbar omega).  If the local gap is not safely larger
    than the maximal first-order shift across the stencil the result is
    marked inconclusive rather than failed.
    """
    params.require_underdamped()
    if not 0 <= n < N // 4:
        raise ValueError(f"level index n={n} must satisfy 0 <= n < N/4 = {N // 4}")
    forms = build_quadratic_forms(params, N)
    spectrum = diagonalize(build_hamiltonian(params, N))
    d_entries = _dchi_entries_from_forms(forms, params, chi)
    vec = spectrum.eigenvectors[:, n]
    rhs = float(np.real(vec.conj() @ (d_entries @ vec)))

    x0 = getattr(params, chi)
    h = _parameter_step(x0)

    def level(value: float) -> float:
        cp, cq, cx = _coefficients(params, chi, value)
        entries = (
            cp * forms.p_squared.entries
            + cq * forms.q_squared.entries
            + cx * forms.pq_plus_qp.entries
        )
        return float(np.linalg.eigvalsh(entries)[n])

    estimate = finite_diff(level, x0, h)

    energies = spectrum.eigenvalues
    gap = energies[n + 1] - energies[n]
    if n > 0:
        gap = min(gap, energies[n] - energies[n - 1])
    shift_scale = float(np.linalg.norm(d_entries @ vec))
    conclusive = gap >= 10.0 * h * shift_scale
    return make_check(
        "pure_state_hf",
        estimate.value,
        rhs,
        tolerance,
        conclusive=conclusive,
        context={
            "L": params.L,
            "C": params.C,
            "R": params.R,
            "chi": chi,
            "n": n,
            "N": N,
            "gap": float(gap),
        },
    )


def _coefficients(
    params: CircuitParams, chi: str, value: float
) -> tuple[float, float, float]:
    L, C, R = params.L, params.C, params.R
    if chi == "L":
        L = value
    elif chi == "C":
        C = value
    elif chi == "R":
        R = value
    else:
        raise ValueError(f"unknown parameter tag {chi!r}")
    if L <= 0.0 or C <= 0.0:
        raise OverdampedError(f"{chi}={value} makes the circuit unphysical")
    return 1.0 / (2.0 * L), 1.0 / (2.0 * C), R / (2.0 * L)


def _dchi_entries_from_forms(
    forms: QuadraticForms, params: CircuitParams, chi: str
) -> np.ndarray:
    L, C, R = params.L, params.C, params.R
    if chi == "L":
        return (
            -forms.p_squared.entries / (2.0 * L * L)
            - (R / (2.0 * L * L)) * forms.pq_plus_qp.entries
        )
    if chi == "C":
        return -forms.q_squared.entries / (2.0 * C * C)
    if chi == "R":
        return forms.pq_plus_qp.entries / (2.0 * L)
    raise ValueError(f"unknown parameter tag {chi!r}")


def params_on_characteristic(
    params: CircuitParams, l_scale: float, damping_ratio: float | None = None
) -> CircuitParams:
    """A second parameter set sharing the invariant c2 = -omega^2.

    L is scaled by ``l_scale``; the new damping ratio R'/L' defaults to
    (R/L)/l_scale and C' is solved from 1/(L'C') = (R'/L')^2 + omega^2.
    """
    if l_scale <= 0.0:
        raise ValueError(f"l_scale must be positive, got {l_scale}")
    w2 = omega(params).omega ** 2
    new_L = l_scale * params.L
    ratio = (
        damping_ratio if damping_ratio is not None else params.R / params.L / l_scale
    )
    if ratio < 0.0:
        raise ValueError(f"damping ratio must be non-negative, got {ratio}")
    new_C = 1.0 / (new_L * (ratio * ratio + w2))
    return CircuitParams(new_L, new_C, ratio * new_L, params.hbar, params.k)


def check_characteristics_invariance(
    params_a: CircuitParams,
    params_b: CircuitParams,
    beta: float,
    *,
    tolerance: float = CHARACTERISTIC_TOL,
    oracle_tol: float = 1e-9,
) -> CheckResult:
    """<H> agrees between two parameter sets sharing c2.

    Each side is a fully converged, independently diagonalized oracle
    run in its own reference basis.
    """
    c2_a = characteristic_invariants(params_a).c2
    c2_b = characteristic_invariants(params_b).c2
    if abs(c2_a - c2_b) >= 1e-12:
        raise CharacteristicMismatchError(
            f"characteristic invariants differ: c2={c2_a!r} vs {c2_b!r}"
        )
    value_a, report_a = converged_observable(
        params_a, beta, "internal_energy", oracle_tol
    )
    value_b, report_b = converged_observable(
        params_b, beta, "internal_energy", oracle_tol
    )
    return make_check(
        "characteristics_invariance",
        value_a,
        value_b,
        tolerance,
        conclusive=report_a.converged and report_b.converged,
        context={
            "L_a": params_a.L,
            "C_a": params_a.C,
            "R_a": params_a.R,
            "L_b": params_b.L,
            "C_b": params_b.C,
            "R_b": params_b.R,
            "beta": beta,
            "c2": c2_a,
            "N_a": report_a.N_used,
            "N_b": report_b.N_used,
        },
    )


def probe_linear_coupling_entropy(
    params: CircuitParams,
    beta: float,
    *,
    workspace: PointWorkspace | None = None,
) -> dict[str, Any]:
    """Entropy derivatives over the linear couplings of H, reported raw.

    Writing H = chi1 p^2 + chi2 q^2 + chi3 (pq+qp) with chi1 = 1/(2L),
    chi2 = 1/(2C), chi3 = R/(2L), this reports finite-difference
    dS/dchi_i for each coupling next to the closed-form dS/dR (whose
    chain-rule image is dS/dchi3 = 2L dS/dR).  No pass/fail: the point
    of the probe is to record that these derivatives are generally
    nonzero for couplings of non-commuting terms.
    """
    ws = _workspace(params, beta, workspace)
    cp, cq, cx = hamiltonian_coefficients(params)
    couplings = {"p_squared": cp, "q_squared": cq, "pq_plus_qp": cx}
    derivatives: dict[str, dict[str, float]] = {}
    for index, name in enumerate(couplings):
        center = couplings[name]

        def entropy_at(value: float, index: int = index) -> float:
            coeffs = [cp, cq, cx]
            coeffs[index] = value
            return ws.scalars_at_coefficients(*coeffs)["entropy"]

        estimate = finite_diff(entropy_at, center, _parameter_step(center))
        derivatives[name] = {
            "value": estimate.value,
            "step": estimate.step,
            "error_estimate": estimate.error_estimate,
        }
    ds_dr = dS_dR_cf(params, beta)
    return {
        "params": {"L": params.L, "C": params.C, "R": params.R},
        "beta": beta,
        "N": ws.N,
        "couplings": couplings,
        "entropy_derivatives": derivatives,
        "ds_dr_closed_form": ds_dr,
        "chi3_implied_by_closed_form": 2.0 * params.L * ds_dr,
        "certified": ws.certified,
        "ladder_converged": ws.report.converged,
    }
