"""Operator construction: ladder algebra, quadratures, Hamiltonian blocks."""

import math

import numpy as np
import pytest

from qrlc.fock_operators import (
    BasisMismatchError,
    CircuitParams,
    HermiticityError,
    TruncatedOperator,
    build_hamiltonian,
    build_ladder,
    build_parameter_derivative,
    build_quadratic_forms,
    build_quadratures,
    commutator,
    leading_block,
)

CANONICAL = CircuitParams(1.0, 1.0, 0.5)


class TestCircuitParams:
    def test_rejects_nonpositive_lc(self):
        with pytest.raises(ValueError):
            CircuitParams(0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            CircuitParams(1.0, -2.0, 0.0)

    def test_rejects_negative_resistance(self):
        with pytest.raises(ValueError):
            CircuitParams(1.0, 1.0, -0.1)

    def test_underdamped_boundary(self):
        assert CircuitParams(1.0, 1.0, 0.999).is_underdamped()
        assert not CircuitParams(1.0, 1.0, 1.0).is_underdamped()

    def test_reference_frequency(self):
        assert CircuitParams(2.0, 0.5, 0.0).omega0 == pytest.approx(1.0, rel=1e-15)

    def test_basis_tag_ignores_resistance(self):
        a = CircuitParams(1.0, 1.0, 0.0).basis_tag()
        b = CircuitParams(1.0, 1.0, 0.7).basis_tag()
        assert a == b


class TestLadder:
    def test_two_level_annihilator(self):
        a, adag = build_ladder(2)
        np.testing.assert_array_equal(a.entries, [[0, 1], [0, 0]])
        np.testing.assert_array_equal(adag.entries, [[0, 0], [1, 0]])

    def test_superdiagonal_is_sqrt_n(self):
        a, _ = build_ladder(3)
        assert a.entries[1, 2] == pytest.approx(math.sqrt(2), rel=1e-15)
        assert a.entries[0, 1] == 1.0
        assert np.count_nonzero(a.entries) == 2

    def test_number_operator(self):
        a, adag = build_ladder(2)
        number = adag @ a
        np.testing.assert_allclose(number.entries, np.diag([0.0, 1.0]), atol=1e-15)

    def test_larger_number_operator(self):
        a, adag = build_ladder(9)
        np.testing.assert_allclose(
            (adag @ a).entries, np.diag(np.arange(9.0)), atol=1e-13
        )

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            build_ladder(1)


class TestQuadratures:
    def test_charge_scale_unit_params(self):
        q, _ = build_quadratures(CircuitParams(1.0, 1.0, 0.0), 4)
        assert q.entries[0, 1] == pytest.approx(math.sqrt(0.5), rel=1e-15)

    def test_charge_scale_follows_impedance(self):
        # sqrt(hbar / (2 L omega0)) = 0.5 for L=2, C=0.5
        q, _ = build_quadratures(CircuitParams(2.0, 0.5, 0.0), 4)
        assert q.entries[0, 1] == pytest.approx(0.5, rel=1e-15)

    def test_hermitian(self):
        q, p = build_quadratures(CANONICAL, 32)
        assert q.hermitian and p.hermitian

    @pytest.mark.parametrize(
        "params",
        [
            CircuitParams(1.0, 1.0, 0.0),
            CircuitParams(2.0, 0.5, 0.3),
            CircuitParams(0.5, 2.0, 0.1, hbar=2.0),
        ],
    )
    def test_canonical_commutator_interior(self, params):
        N = 16
        q, p = build_quadratures(params, N)
        comm = commutator(q, p).entries
        expected = 1j * params.hbar * np.eye(N - 1)
        np.testing.assert_allclose(comm[: N - 1, : N - 1], expected, atol=1e-12)

    def test_products_match_exact_anticommutator(self):
        # pq + qp from truncated products agrees with the exact block
        # everywhere (the level-N paths cancel in the sum)
        N = 12
        q, p = build_quadratures(CANONICAL, N)
        forms = build_quadratic_forms(CANONICAL, N)
        product = (p @ q).entries + (q @ p).entries
        np.testing.assert_allclose(product, forms.pq_plus_qp.entries, atol=1e-13)


class TestQuadraticForms:
    def test_squares_match_products_except_last_diagonal(self):
        N = 10
        q, p = build_quadratures(CANONICAL, N)
        forms = build_quadratic_forms(CANONICAL, N)
        prod = (q @ q).entries
        diff = np.abs(prod - forms.q_squared.entries)
        # only the (N-1, N-1) entry is corrupted by truncation
        assert diff[: N - 1, : N - 1].max() < 1e-13
        assert diff[N - 1, N - 1] > 0.1

    def test_blocks_are_hermitian(self):
        forms = build_quadratic_forms(CircuitParams(0.5, 2.0, 0.4), 20)
        for op in (forms.p_squared, forms.q_squared, forms.pq_plus_qp):
            assert op.hermitian


class TestHamiltonian:
    def test_reference_oscillator_is_diagonal(self):
        H = build_hamiltonian(CircuitParams(1.0, 1.0, 0.0), 64)
        np.testing.assert_allclose(
            H.entries, np.diag(np.arange(64) + 0.5), atol=1e-14
        )

    def test_hermitian(self):
        H = build_hamiltonian(CircuitParams(1.3, 0.7, 0.6), 64)
        np.testing.assert_allclose(H.entries, H.entries.conj().T, atol=1e-12)

    def test_ground_state_energy(self):
        # E_0 = hbar * omega / 2 with omega = sqrt(1/(LC) - R^2/L^2)
        H = build_hamiltonian(CANONICAL, 256)
        lowest = np.linalg.eigvalsh(H.entries)[0]
        assert lowest == pytest.approx(math.sqrt(0.75) / 2, abs=1e-9)

    def test_pentadiagonal(self):
        H = build_hamiltonian(CANONICAL, 32).entries
        for offset in (1, 3, 4, 5):
            np.testing.assert_allclose(np.diag(H, offset), 0.0, atol=1e-15)
        assert np.abs(np.diag(H, 2)).max() > 0


class TestParameterDerivative:
    def test_resistance_derivative_is_half_anticommutator(self):
        N = 16
        derivative = build_parameter_derivative(CANONICAL, N, "R")
        forms = build_quadratic_forms(CANONICAL, N)
        np.testing.assert_allclose(
            derivative.entries, forms.pq_plus_qp.entries / 2.0, atol=1e-14
        )

    def test_capacitance_derivative(self):
        N = 16
        derivative = build_parameter_derivative(CANONICAL, N, "C")
        forms = build_quadratic_forms(CANONICAL, N)
        np.testing.assert_allclose(
            derivative.entries, -forms.q_squared.entries / 2.0, atol=1e-14
        )

    @pytest.mark.parametrize("which", ["L", "C", "R"])
    def test_matches_finite_difference_of_frozen_family(self, which):
        # (H(chi+h) - H(chi-h)) / 2h with the blocks held fixed
        N = 12
        params = CircuitParams(1.2, 0.8, 0.5)
        forms = build_quadratic_forms(params, N)
        h = 1e-5

        def entries_at(value):
            kwargs = {"L": params.L, "C": params.C, "R": params.R}
            kwargs[which] = value
            cp = 1.0 / (2.0 * kwargs["L"])
            cq = 1.0 / (2.0 * kwargs["C"])
            cx = kwargs["R"] / (2.0 * kwargs["L"])
            return (
                cp * forms.p_squared.entries
                + cq * forms.q_squared.entries
                + cx * forms.pq_plus_qp.entries
            )

        center = getattr(params, which)
        fd = (entries_at(center + h) - entries_at(center - h)) / (2 * h)
        exact = build_parameter_derivative(params, N, which).entries
        scale = np.abs(exact).max()
        np.testing.assert_allclose(fd, exact, atol=5e-9 * max(scale, 1.0))

    def test_unknown_tag(self):
        with pytest.raises(ValueError):
            build_parameter_derivative(CANONICAL, 8, "T")


class TestCommutator:
    def test_self_commutator_vanishes(self):
        H = build_hamiltonian(CANONICAL, 32)
        np.testing.assert_array_equal(commutator(H, H).entries, 0.0)

    def test_dimension_mismatch(self):
        a16, _ = build_ladder(16)
        a8, _ = build_ladder(8)
        with pytest.raises(BasisMismatchError):
            commutator(a16, a8)

    @pytest.mark.parametrize(
        "params",
        [
            CircuitParams(1.0, 2.0, 0.3),
            CircuitParams(1.0, 1.0, 0.5),
            CircuitParams(0.8, 1.1, 0.4, hbar=2.0),
        ],
    )
    def test_quadrature_difference_commutator_identity(self, params):
        # [q^2 - p^2, H] = i hbar (1/L + 1/C)(pq+qp)
        #                  + 2 i hbar (R/L)(p^2 + q^2)
        # on the interior block (products corrupt the truncation edge)
        N = 64
        q, p = build_quadratures(params, N)
        H = build_hamiltonian(params, N)
        forms = build_quadratic_forms(params, N)
        lhs = commutator(q @ q - p @ p, H)
        hbar, L, C, R = params.hbar, params.L, params.C, params.R
        rhs = (
            1j * hbar * (1.0 / L + 1.0 / C) * forms.pq_plus_qp.entries
            + 2j * hbar * (R / L) * (forms.p_squared.entries + forms.q_squared.entries)
        )
        block = N // 2
        deviation = np.abs(lhs.entries[:block, :block] - rhs[:block, :block]).max()
        assert deviation < 1e-10


class TestTruncatedOperator:
    def test_hermiticity_enforced_on_construction(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(HermiticityError):
            TruncatedOperator(2, bad, "tag", hermitian=True)

    def test_entries_are_read_only(self):
        q, _ = build_quadratures(CANONICAL, 4)
        with pytest.raises(ValueError):
            q.entries[0, 0] = 1.0

    def test_basis_mismatch_on_addition(self):
        q1, _ = build_quadratures(CircuitParams(1.0, 1.0, 0.0), 4)
        q2, _ = build_quadratures(CircuitParams(2.0, 1.0, 0.0), 4)
        with pytest.raises(BasisMismatchError):
            _ = q1 + q2

    def test_leading_block(self):
        H = build_hamiltonian(CANONICAL, 8)
        np.testing.assert_array_equal(leading_block(H, 3), H.entries[:3, :3])
        with pytest.raises(ValueError):
            leading_block(H, 9)
