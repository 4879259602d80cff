"""Gibbs oracle: diagonalization, thermal state, observables, convergence.

Reference values are frozen from independent series summations (the
geometric series of the equally spaced spectrum), not from the code
under test.
"""

import math

import numpy as np
import pytest

from qrlc.closed_forms import dH_dR_average_cf, omega
from qrlc.fock_operators import (
    CircuitParams,
    HermiticityError,
    TruncatedOperator,
    build_hamiltonian,
    build_quadratic_forms,
)
from qrlc.thermal_oracle import (
    Spectrum,
    ThermalState,
    converged_observable,
    diagonalize,
    ensemble_average,
    fluctuation,
    free_energy,
    gibbs_weights,
    internal_energy,
    thermal_state,
    thermo_identities,
    von_neumann_entropy,
)

CANONICAL = CircuitParams(1.0, 1.0, 0.5)

# geometric-series values for E_n = n + 1/2 at beta = 1
P0_HARMONIC = 0.6321205588285577  # 1 - e^{-1}
LOG_Z_HARMONIC = -0.04132485461291807  # -1/2 - ln(1 - e^{-1})
U_BOSE = 1.0819767068693265  # (1/2) coth(1/2)


def harmonic_spectrum(N=64):
    return diagonalize(build_hamiltonian(CircuitParams(1.0, 1.0, 0.0), N))


def two_level_spectrum():
    return Spectrum(
        eigenvalues=np.array([0.0, 1.0]),
        eigenvectors=np.eye(2, dtype=complex),
        dim=2,
        basis_tag="two-level",
    )


class TestDiagonalize:
    def test_harmonic_levels_exact(self):
        spec = harmonic_spectrum(64)
        np.testing.assert_array_equal(spec.eigenvalues, np.arange(64) + 0.5)

    def test_level_spacing_matches_mode_frequency(self):
        spec = diagonalize(build_hamiltonian(CANONICAL, 256))
        gap = spec.eigenvalues[1] - spec.eigenvalues[0]
        assert gap == pytest.approx(math.sqrt(0.75), rel=1e-8)

    def test_eigenvalue_sum_is_trace(self):
        H = build_hamiltonian(CircuitParams(0.7, 1.4, 0.5), 96)
        spec = diagonalize(H)
        assert spec.eigenvalues.sum() == pytest.approx(
            np.trace(H.entries).real, rel=1e-8
        )

    def test_orthonormal_eigenvectors(self):
        spec = diagonalize(build_hamiltonian(CANONICAL, 128))
        gram = spec.eigenvectors.conj().T @ spec.eigenvectors
        np.testing.assert_allclose(gram, np.eye(128), atol=1e-10)

    def test_residuals(self):
        H = build_hamiltonian(CANONICAL, 128)
        spec = diagonalize(H)
        residual = H.entries @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues
        norms = np.linalg.norm(residual, axis=0)
        bounds = 1e-10 * np.maximum(1.0, np.abs(spec.eigenvalues))
        assert (norms < bounds).all()

    def test_rejects_non_hermitian(self):
        a = TruncatedOperator(
            2, np.array([[0, 1], [0, 0]], dtype=complex), "t", hermitian=False
        )
        with pytest.raises(HermiticityError):
            diagonalize(a)


class TestThermalState:
    def test_infinite_temperature_limit(self):
        state = thermal_state(two_level_spectrum(), 1e-12)
        np.testing.assert_allclose(state.probabilities, [0.5, 0.5], atol=1e-9)

    def test_ground_weight_harmonic(self):
        state = thermal_state(harmonic_spectrum(200), 1.0)
        assert state.probabilities[0] == pytest.approx(P0_HARMONIC, rel=1e-12)

    def test_log_partition_harmonic(self):
        state = thermal_state(harmonic_spectrum(200), 1.0)
        assert state.log_partition == pytest.approx(LOG_Z_HARMONIC, rel=1e-10)

    def test_rejects_nonpositive_beta(self):
        with pytest.raises(ValueError):
            thermal_state(two_level_spectrum(), 0.0)
        with pytest.raises(ValueError):
            gibbs_weights(np.array([0.0, 1.0]), -1.0)

    def test_no_overflow_at_large_beta_energy(self):
        # beta * E up to ~1e4
        state = thermal_state(harmonic_spectrum(32), 1e4)
        assert state.probabilities[0] == pytest.approx(1.0, abs=1e-12)
        assert np.isfinite(state.log_partition)

    def test_weights_sum_to_one_and_decrease(self):
        state = thermal_state(harmonic_spectrum(128), 0.3)
        assert state.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
        assert (np.diff(state.probabilities) <= 0).all()


class TestEnsembleAverage:
    def test_identity_normalization(self):
        spec = diagonalize(build_hamiltonian(CANONICAL, 64))
        state = thermal_state(spec, 1.0)
        eye = TruncatedOperator(
            64, np.eye(64, dtype=complex), spec.basis_tag, hermitian=True
        )
        assert ensemble_average(state, spec, eye) == pytest.approx(1.0, rel=1e-12)

    def test_hamiltonian_average_is_internal_energy(self):
        H = build_hamiltonian(CANONICAL, 96)
        spec = diagonalize(H)
        state = thermal_state(spec, 0.7)
        assert ensemble_average(state, spec, H) == pytest.approx(
            internal_energy(state, spec), rel=1e-12
        )

    def test_anticommutator_average_matches_closed_form(self):
        # <pq+qp> = 2L <dH/dR>; adaptively converged oracle vs closed form
        value, report = converged_observable(CANONICAL, 1.0, "pq_plus_qp", 1e-9)
        assert report.converged
        expected = 2.0 * CANONICAL.L * dH_dR_average_cf(CANONICAL, 1.0)
        assert value == pytest.approx(expected, rel=1e-8)
        assert value < 0

    def test_rejects_non_hermitian_observable(self):
        spec = diagonalize(build_hamiltonian(CANONICAL, 16))
        state = thermal_state(spec, 1.0)
        skew = np.zeros((16, 16), dtype=complex)
        skew[0, 2] = 1.0
        bad = TruncatedOperator(16, skew, spec.basis_tag, hermitian=False)
        with pytest.raises(HermiticityError):
            ensemble_average(state, spec, bad)

    def test_rejects_basis_mismatch(self):
        spec = diagonalize(build_hamiltonian(CANONICAL, 16))
        state = thermal_state(spec, 1.0)
        other = build_quadratic_forms(CircuitParams(2.0, 1.0, 0.0), 16).pq_plus_qp
        with pytest.raises(ValueError):
            ensemble_average(state, spec, other)


class TestThermodynamics:
    def test_bose_internal_energy(self):
        spec = harmonic_spectrum(200)
        state = thermal_state(spec, 1.0)
        assert internal_energy(state, spec) == pytest.approx(U_BOSE, rel=1e-12)

    def test_fluctuation_non_negative_and_consistent(self):
        spec = diagonalize(build_hamiltonian(CANONICAL, 128))
        state = thermal_state(spec, 1.0)
        var = fluctuation(state, spec)
        assert var >= 0.0
        # independent route: <H^2> - <H>^2 from the raw moments
        p, E = state.probabilities, spec.eigenvalues
        moments = float(p @ E**2) - float(p @ E) ** 2
        assert var == pytest.approx(moments, rel=1e-10)

    def test_pure_state_entropy_is_zero(self):
        state = ThermalState(
            beta=1.0, log_partition=0.0, probabilities=np.array([1.0, 0.0, 0.0])
        )
        assert von_neumann_entropy(state) == 0.0

    def test_uniform_two_level_entropy(self):
        state = ThermalState(
            beta=1.0, log_partition=0.0, probabilities=np.array([0.5, 0.5])
        )
        assert von_neumann_entropy(state) == pytest.approx(math.log(2), rel=1e-15)
        assert von_neumann_entropy(state, k=2.0) == pytest.approx(
            2 * math.log(2), rel=1e-15
        )

    def test_free_energy_harmonic(self):
        state = thermal_state(harmonic_spectrum(200), 1.0)
        assert free_energy(state) == pytest.approx(-LOG_Z_HARMONIC, rel=1e-10)

    def test_free_energy_reaches_ground_state_at_low_temperature(self):
        spec = harmonic_spectrum(32)
        state = thermal_state(spec, 200.0)
        assert free_energy(state) == pytest.approx(0.5, abs=1e-12)

    def test_thermo_identities_hold(self):
        spec = diagonalize(build_hamiltonian(CANONICAL, 160))
        state = thermal_state(spec, 0.8)
        first, second = thermo_identities(state, spec, k=1.0)
        assert first.passed and second.passed
        assert first.rel_residual < 1e-10
        assert second.rel_residual < 1e-10

    @pytest.mark.parametrize(
        "params",
        [CircuitParams(1.0, 1.0, 0.0), CircuitParams(1.0, 1.0, 0.5), CircuitParams(2.0, 0.5, 0.4)],
    )
    def test_energy_and_entropy_increase_with_temperature(self, params):
        betas = [4.0, 2.0, 1.0, 0.5, 0.25]
        spec = diagonalize(build_hamiltonian(params, 256))
        energies = []
        entropies = []
        for beta in betas:
            state = thermal_state(spec, beta)
            energies.append(internal_energy(state, spec))
            entropies.append(von_neumann_entropy(state, params.k))
        assert all(b > a for a, b in zip(energies, energies[1:]))
        assert all(b > a for a, b in zip(entropies, entropies[1:]))


class TestLevelSpacing:
    @pytest.mark.parametrize("fraction", [0.0, 0.3, 0.6])
    def test_equal_spacing_at_256(self, fraction):
        params = CircuitParams(1.0, 1.0, fraction)
        energies = np.linalg.eigvalsh(build_hamiltonian(params, 256).entries)
        target = params.hbar * omega(params).omega
        gaps = np.diff(energies)[:64]
        assert (np.abs(gaps - target) / target).max() < 1e-8

    def test_strong_damping_needs_larger_truncation(self):
        # at R = 0.9 sqrt(L/C) the reference-basis eigenvectors spread by
        # ~ e^{2r} = sqrt(19); the first 64 spacings converge at N = 512
        params = CircuitParams(1.0, 1.0, 0.9)
        energies = np.linalg.eigvalsh(build_hamiltonian(params, 512).entries)
        target = omega(params).omega
        gaps = np.diff(energies)[:64]
        assert (np.abs(gaps - target) / target).max() < 1e-8


class TestConvergedObservable:
    def test_cold_system_converges_quickly(self):
        value, report = converged_observable(
            CircuitParams(1.0, 1.0, 0.0), 10.0, "internal_energy", 1e-9
        )
        assert report.converged
        assert report.N_used <= 64
        assert value == pytest.approx(0.5 / math.tanh(5.0), rel=1e-9)

    def test_hot_point_records_doubling_trace(self):
        trace = []
        params = CircuitParams(1.0, 1.0, 0.9)
        value, report = converged_observable(
            params, 0.1, "internal_energy", 1e-8, trace=trace
        )
        ns = [entry["N"] for entry in trace]
        assert ns == [32 * 2**i for i in range(len(ns))]
        assert len(ns) >= 3
        assert report.tail_mass < 1e-14
        assert np.isfinite(value)

    def test_self_consistency_against_capped_reference(self):
        params = CircuitParams(1.0, 1.0, 0.5)
        value, report = converged_observable(params, 1.0, "internal_energy", 1e-8)
        assert report.converged
        H = build_hamiltonian(params, 1024)
        energies = np.linalg.eigvalsh(H.entries)
        p, _ = gibbs_weights(energies, 1.0)
        reference = float(p @ energies)
        assert abs(value - reference) / abs(reference) < 1e-8

    def test_cap_flags_non_convergence(self):
        value, report = converged_observable(
            CircuitParams(1.0, 1.0, 0.9),
            0.23,
            "internal_energy",
            1e-12,
            n_cap=128,
        )
        assert not report.converged
        assert report.N_used == 128
        assert np.isfinite(value)

    def test_overdamped_rejected(self):
        with pytest.raises(ValueError):
            converged_observable(CircuitParams(1.0, 1.0, 1.5), 1.0, "entropy", 1e-8)

    def test_unknown_observable(self):
        with pytest.raises(ValueError):
            converged_observable(CANONICAL, 1.0, "heat_capacity", 1e-8)

    def test_omega_gap_observable(self):
        value, report = converged_observable(CANONICAL, 1.0, "omega", 1e-10)
        assert report.converged
        assert value == pytest.approx(omega(CANONICAL).omega, rel=1e-10)
