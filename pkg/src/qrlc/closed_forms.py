"""Closed-form thermodynamics of the underdamped quantized RLC circuit.

Every quantity depends on the circuit through the effective mode
frequency

    omega = sqrt(1/(LC) - R^2/L^2) = omega0 sqrt(1 - R^2 C / L),

real for R < sqrt(L/C).  The circuit behaves as a single oscillator of
that frequency, so the mean thermal energy is (hbar omega / 2)
coth(hbar omega beta / 2), and entropy, fluctuation and the
resistor-dissipation average all follow from it.  Temperature is always
derived as T = 1/(k beta); there is no independent temperature field.

Numerical policy: expressions are written in expm1/log1p form so they
stay accurate from beta*hbar*omega ~ 1e-300 up to the overflow edge;
explicit small-argument series and large-argument asymptotics take over
below 1e-6 and above ~700 where stated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fock_operators import CircuitParams, OverdampedError

SMALL_ARGUMENT = 1e-6
LARGE_ARGUMENT = 700.0


@dataclass(frozen=True)
class ModeFrequency:
    """Reference frequency omega0 = 1/sqrt(LC) and effective omega."""

    omega0: float
    omega: float


@dataclass(frozen=True)
class CharacteristicInvariants:
    """Quantities conserved along the characteristics of the parameter flow.

    c1 = 1/L - 1/C and c2 = R^2/L^2 - 1/(LC) = -omega^2; two parameter
    sets sharing c2 share every thermal observable that depends on the
    circuit only through omega.
    """

    c1: float
    c2: float


def omega(params: CircuitParams) -> ModeFrequency:
    """Effective mode frequency; raises OverdampedError for R >= sqrt(L/C)."""
    params.require_underdamped()
    omega0 = params.omega0
    omega_sq = 1.0 / (params.L * params.C) - (params.R / params.L) ** 2
    return ModeFrequency(omega0=omega0, omega=math.sqrt(omega_sq))


def characteristic_invariants(params: CircuitParams) -> CharacteristicInvariants:
    """c1 = 1/L - 1/C, c2 = R^2/L^2 - 1/(LC)."""
    c1 = 1.0 / params.L - 1.0 / params.C
    c2 = (params.R / params.L) ** 2 - 1.0 / (params.L * params.C)
    return CharacteristicInvariants(c1=c1, c2=c2)


def _coth_half(x: float) -> float:
    """coth(x/2) for x > 0, overflow-safe."""
    if x > LARGE_ARGUMENT:
        return 1.0 + 2.0 * math.exp(-x)
    return 1.0 + 2.0 / math.expm1(x)


def _log1mexp(x: float) -> float:
    """ln(1 - exp(-x)) for x > 0, accurate at both ends."""
    if x <= 0.6931471805599453:
        return math.log(-math.expm1(-x))
    return math.log1p(-math.exp(-x))


def _mean_energy(mode_omega: float, beta: float, hbar: float) -> float:
    x = beta * hbar * mode_omega
    if x < SMALL_ARGUMENT:
        # leading series of (hbar w / 2) coth(hbar w beta / 2)
        return 1.0 / beta + beta * (hbar * mode_omega) ** 2 / 12.0
    return 0.5 * hbar * mode_omega * _coth_half(x)


def internal_energy_cf(params: CircuitParams, beta: float) -> float:
    """Mean thermal energy (hbar omega / 2) coth(hbar omega beta / 2)."""
    _require_beta(beta)
    return _mean_energy(omega(params).omega, beta, params.hbar)


def fluctuation_cf(params: CircuitParams, beta: float) -> float:
    """Energy variance (hbar omega)^2 / (4 sinh^2(beta hbar omega / 2)).

    Equals minus the beta-derivative of the mean energy.
    """
    _require_beta(beta)
    w = omega(params).omega
    x = beta * params.hbar * w
    e = math.exp(-x)
    if e == 0.0:
        return 0.0
    return (params.hbar * w) ** 2 * e / math.expm1(-x) ** 2


def dH_dR_average_cf(params: CircuitParams, beta: float) -> float:
    """Thermal average of dH/dR = (pq+qp)/(2L).

    Closed form -hbar R / (2 omega L^2) coth(hbar omega beta / 2);
    non-positive, and zero only at R = 0.
    """
    _require_beta(beta)
    w = omega(params).omega
    x = beta * params.hbar * w
    return -params.hbar * params.R / (2.0 * w * params.L**2) * _coth_half(x)


def resistor_energy_cf(params: CircuitParams, beta: float) -> float:
    """Mean energy consumed by the resistor, (R/2L)<pq+qp>.

    Exactly R times ``dH_dR_average_cf``; strictly negative for R > 0,
    the signature of a dissipative element.
    """
    return params.R * dH_dR_average_cf(params, beta)


def dS_dR_cf(params: CircuitParams, beta: float) -> float:
    """Entropy derivative with respect to resistance.

    beta R hbar^2 / (4 T L^2 sinh^2(beta hbar omega / 2)) with
    T = 1/(k beta); strictly positive for R > 0.
    """
    _require_beta(beta)
    w = omega(params).omega
    x = beta * params.hbar * w
    e = math.exp(-x)
    if e == 0.0:
        return 0.0
    return (
        params.k
        * (beta * params.hbar / params.L) ** 2
        * params.R
        * e
        / math.expm1(-x) ** 2
    )


def entropy_cf(params: CircuitParams, beta: float) -> float:
    """Thermal entropy of the effective oscillator.

    With x = beta hbar omega:

        S / k = x / (e^x - 1) - ln(1 - e^{-x}),

    the overflow-safe rearrangement of
    -k ln(e^x - 1) + k x e^x / (e^x - 1).  Diverges like -k ln x as the
    mode softens (R -> sqrt(L/C)) and vanishes as beta -> infinity.
    """
    _require_beta(beta)
    x = beta * params.hbar * omega(params).omega
    return params.k * _entropy_over_k(x)


def _entropy_over_k(x: float) -> float:
    if x < SMALL_ARGUMENT:
        return 1.0 - math.log(x) + x * x / 24.0
    if x > 709.0:
        # x/expm1(x) overflows past here; both terms collapse to the
        # leading exponential tail
        return (x + 1.0) * math.exp(-x)
    return x / math.expm1(x) - _log1mexp(x)


def single_mode_log_partition(mode_omega: float, beta: float, hbar: float) -> float:
    """ln Z of one oscillator: -beta hbar omega / 2 - ln(1 - e^{-beta hbar omega})."""
    x = beta * hbar * mode_omega
    return -0.5 * x - _log1mexp(x)


def f_of_xy(x: float, y: float, beta: float, hbar: float) -> float:
    """General solution of the parameter-flow PDE evaluated at (x, y).

    Equals (hbar sqrt(-y) / 2) coth(hbar beta sqrt(-y) / 2); requires
    y < 0.  The first argument does not enter -- the mean energy depends
    on the characteristic invariants through c2 alone -- but is kept so
    the call signature matches the invariant pair (c1, c2).
    """
    if y >= 0.0:
        raise OverdampedError(f"f_of_xy requires y < 0, got y={y}")
    _require_beta(beta)
    return _mean_energy(math.sqrt(-y), beta, hbar)


def _require_beta(beta: float) -> None:
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
