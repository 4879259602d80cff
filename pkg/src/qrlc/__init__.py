"""Verification-grade thermodynamics of the quantized RLC circuit.

Closed-form internal energy, fluctuation, resistor dissipation, entropy
and entropy-variation of the underdamped quantized series RLC circuit,
cross-validated against an exact-diagonalization Gibbs oracle on a
truncated number basis, together with numerical verification of the
thermal Hellmann-Feynman identities the closed forms rest on.
"""

from .checks import CheckResult, make_check
from .closed_forms import (
    CharacteristicInvariants,
    ModeFrequency,
    characteristic_invariants,
    dH_dR_average_cf,
    dS_dR_cf,
    entropy_cf,
    f_of_xy,
    fluctuation_cf,
    internal_energy_cf,
    omega,
    resistor_energy_cf,
)
from .fock_operators import (
    BasisMismatchError,
    CircuitParams,
    HermiticityError,
    OverdampedError,
    QuadraticForms,
    TruncatedOperator,
    build_hamiltonian,
    build_ladder,
    build_parameter_derivative,
    build_quadratic_forms,
    build_quadratures,
    commutator,
    leading_block,
)
from .ghft_verifier import (
    CharacteristicMismatchError,
    DerivativeEstimate,
    PointWorkspace,
    StencilDomainError,
    check_characteristic_pde,
    check_characteristics_invariance,
    check_commutator_average,
    check_entropy_variation,
    check_fluctuation_identity,
    check_ghft_beta_form,
    check_ghft_correlation,
    check_ghft_weighted_average,
    check_pure_state_hf,
    finite_diff,
    params_on_characteristic,
    probe_linear_coupling_entropy,
)
from .thermal_oracle import (
    ConvergenceReport,
    EigensolverError,
    Spectrum,
    ThermalState,
    converged_observable,
    diagonalize,
    ensemble_average,
    fluctuation,
    free_energy,
    internal_energy,
    thermal_state,
    thermo_identities,
    von_neumann_entropy,
)

__version__ = "0.1.0"
