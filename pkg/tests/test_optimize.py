import math

import numpy as np
import pytest

from metrolab import (
    PairAxis,
    build_basis,
    correlated_three_mode,
    estimated_parameter,
    general_probe,
    lossy_probe,
    noon,
    number_covariance,
    number_op,
    optimal_weights,
    optimal_zeta,
    qfi_mixed,
    schwinger_j,
    sweep_qfi_vs_zeta,
    two_mode_fixed_n,
    variance,
    weighted_number,
)


def random_profile(rng, length):
    c = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    return c / np.linalg.norm(c)


def random_pure(rng, basis):
    from metrolab import PureState

    v = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
    return PureState(basis, v, normalize=True)


def noon_probe_with_environment(n_total):
    c = np.zeros((n_total + 1, n_total + 1), dtype=complex)
    c[n_total, 0] = c[0, n_total] = 1 / math.sqrt(2)
    return general_probe(c, n_total)


def correlated_probe_with_environment(n_total):
    c = np.zeros((n_total + 1, n_total + 1), dtype=complex)
    for n in range(n_total // 2 + 1):
        c[n, n] = 1.0
    c /= np.linalg.norm(c)
    return general_probe(c, n_total)


class TestOptimalZeta:
    def test_correlated_state_gives_pi_over_four(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            coeffs = random_profile(rng, 4)
            state = correlated_three_mode(coeffs, 7)
            result = optimal_zeta(state)
            assert abs(result.zeta_opt - math.pi / 4) < 1e-10
            assert result.var_perp <= 1e-10

    def test_fock_product_is_degenerate(self):
        basis = build_basis(3, 5)
        state = basis.basis_state((2, 1, 2))
        result = optimal_zeta(state)
        assert result.degenerate
        assert result.zeta_opt == 0.0
        assert result.var_max == 0.0

    def test_anti_correlated_state(self):
        rng = np.random.default_rng(1)
        coeffs = random_profile(rng, 6)
        state = two_mode_fixed_n(coeffs, 5)
        result = optimal_zeta(state)
        assert abs(result.zeta_opt - 3 * math.pi / 4) < 1e-10
        assert result.var_perp <= 1e-10  # n0 + n1 is constant on the fixed sector

    def test_var_max_is_top_covariance_eigenvalue(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            basis = build_basis(3, 4)
            state = random_pure(rng, basis)
            result = optimal_zeta(state)
            eigvals = np.linalg.eigvalsh(result.cov)
            assert abs(result.var_max - eigvals[-1]) < 1e-10
            assert abs(result.var_perp - max(eigvals[0], 0.0)) < 1e-10

    def test_sum_rule_at_optimum(self):
        rng = np.random.default_rng(3)
        state = random_pure(rng, build_basis(2, 6))
        result = optimal_zeta(state)
        n0, n1 = number_op(state.basis, 0), number_op(state.basis, 1)
        total = variance(state, n0) + variance(state, n1)
        assert abs(result.var_max + result.var_perp - total) < 1e-10

    def test_needs_two_modes(self):
        with pytest.raises(ValueError):
            optimal_zeta(build_basis(1, 3).basis_state((1,)))


class TestSumRule:
    def test_random_states_and_angles(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            num_modes = int(rng.integers(2, 4))
            basis = build_basis(num_modes, int(rng.integers(1, 6)))
            state = random_pure(rng, basis)
            zeta = rng.uniform(0, 2 * math.pi)
            n_zeta, n_perp = weighted_number(basis, zeta)
            lhs = variance(state, n_zeta) + variance(state, n_perp)
            n0, n1 = number_op(basis, 0), number_op(basis, 1)
            rhs = variance(state, n0) + variance(state, n1)
            assert abs(lhs - rhs) < 1e-10


class TestOptimalWeights:
    def test_two_mode_special_case(self):
        rng = np.random.default_rng(5)
        state = random_pure(rng, build_basis(2, 5))
        zeta_result = optimal_zeta(state)
        weight_result = optimal_weights(state, (0, 1))
        expected = np.array([math.cos(zeta_result.zeta_opt), math.sin(zeta_result.zeta_opt)])
        aligned = min(
            np.max(np.abs(weight_result.weights - expected)),
            np.max(np.abs(weight_result.weights + expected)),
        )
        assert aligned < 1e-10
        assert abs(weight_result.var_max - zeta_result.var_max) < 1e-10

    def test_three_mode_weights_beat_any_pairwise_zeta(self):
        rng = np.random.default_rng(6)
        state = random_pure(rng, build_basis(3, 4))
        result = optimal_weights(state, (0, 1, 2))
        assert np.isclose(np.linalg.norm(result.weights), 1.0)
        sweep = sweep_qfi_vs_zeta(state, np.linspace(0, math.pi, 64))
        assert 4 * result.var_max >= np.max(sweep[:, 1]) - 1e-8


class TestEstimatedParameter:
    def test_balanced_case(self):
        phi = 0.31
        value = estimated_parameter(math.pi / 4, phi, phi)
        assert np.isclose(value, (phi + phi) / math.sqrt(2), atol=1e-12)

    def test_zeta_zero(self):
        assert np.isclose(estimated_parameter(0.0, 0.8, 0.0), 0.8)

    def test_inconsistent_rejected(self):
        with pytest.raises(ValueError):
            estimated_parameter(0.0, 0.8, 0.3)

    def test_zeta_pi_over_two(self):
        assert np.isclose(estimated_parameter(math.pi / 2, 0.0, 0.6), 0.6)


class TestLossyProbe:
    def test_zero_coupling_keeps_purity(self):
        probe = noon_probe_with_environment(3)
        rho = lossy_probe(probe, 0, 0.0)
        assert abs(rho.purity() - 1.0) < 1e-10

    def test_full_transfer_at_pi(self):
        n_total = 4
        c = np.zeros((n_total + 1, n_total + 1), dtype=complex)
        c[1, 0] = 1.0  # |1, 0, N-1, 0>
        probe = general_probe(c, n_total)
        rho = lossy_probe(probe, 0, math.pi)
        target = build_basis(3, n_total).basis_state((0, 0, n_total - 1))
        overlap = float(
            np.real(np.vdot(target.amplitudes, rho.matrix @ target.amplitudes))
        )
        assert abs(overlap - 1.0) < 1e-10

    def test_qfi_decreases_with_coupling(self):
        probe = noon_probe_with_environment(3)
        previous = math.inf
        for kappa in np.linspace(0, math.pi / 2, 5):
            rho = lossy_probe(probe, 0, float(kappa))
            gen = schwinger_j(rho.basis, PairAxis(0, 2, beta=0.0))
            q = qfi_mixed(rho, gen).qfi
            assert q <= previous + 1e-8
            previous = q

    def test_never_exceeds_lossless(self):
        probe = correlated_probe_with_environment(4)
        gen_axis = PairAxis(0, 2, beta=0.0)
        rho0 = lossy_probe(probe, 0, 0.0)
        baseline = qfi_mixed(rho0, schwinger_j(rho0.basis, gen_axis)).qfi
        for kappa in np.linspace(0, math.pi, 7):
            rho = lossy_probe(probe, 0, float(kappa))
            q = qfi_mixed(rho, schwinger_j(rho.basis, gen_axis)).qfi
            assert q <= baseline + 1e-8

    def test_outputs_valid_mixed_states(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n_total = int(rng.integers(1, 4))
            c = np.zeros((n_total + 1, n_total + 1), dtype=complex)
            for n1 in range(n_total + 1):
                for n2 in range(n_total + 1 - n1):
                    c[n1, n2] = rng.standard_normal() + 1j * rng.standard_normal()
            c /= np.linalg.norm(c)
            probe = general_probe(c, n_total)
            mode = int(rng.integers(0, 3))
            rho = lossy_probe(probe, mode, float(rng.uniform(0, math.pi)))
            assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
            assert np.max(np.abs(rho.matrix - rho.matrix.conj().T)) < 1e-12
            assert float(np.linalg.eigvalsh(rho.matrix)[0]) > -1e-10

    def test_axis_parameter(self):
        probe = noon_probe_with_environment(2)
        for axis in ("x", "y", "z", (0.4, 1.1)):
            rho = lossy_probe(probe, 0, 0.6, axis=axis)
            assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
        # z-axis coupling commutes with the initial occupation: no decoherence
        rho_z = lossy_probe(probe, 0, 0.9, axis="z")
        assert abs(rho_z.purity() - 1.0) < 1e-10
        with pytest.raises(ValueError):
            lossy_probe(probe, 0, 0.5, axis="q")

    def test_rejects_wrong_arity(self):
        with pytest.raises(ValueError):
            lossy_probe(noon(2), 0, 0.3)
        probe = noon_probe_with_environment(2)
        with pytest.raises(ValueError):
            lossy_probe(probe, 3, 0.3)


class TestSweep:
    def test_single_point(self):
        rng = np.random.default_rng(8)
        state = random_pure(rng, build_basis(2, 4))
        rows = sweep_qfi_vs_zeta(state, [0.0])
        expected = 4 * variance(state, number_op(state.basis, 0))
        assert rows.shape == (1, 2)
        assert abs(rows[0, 1] - expected) < 1e-10

    def test_grid_max_below_closed_form(self):
        rng = np.random.default_rng(9)
        state = random_pure(rng, build_basis(3, 4))
        result = optimal_zeta(state)
        rows = sweep_qfi_vs_zeta(state, np.linspace(0, math.pi, 1000, endpoint=False))
        assert np.max(rows[:, 1]) <= 4 * result.var_max + 1e-8

    def test_correlated_max_near_pi_over_four(self):
        state = correlated_three_mode(np.array([1, 1, 1]) / math.sqrt(3), 5)
        grid = np.linspace(0, math.pi, 129)
        rows = sweep_qfi_vs_zeta(state, grid)
        best = rows[np.argmax(rows[:, 1]), 0]
        assert abs(best - math.pi / 4) <= grid[1] - grid[0]

    def test_sum_rule_constant_across_grid(self):
        rng = np.random.default_rng(10)
        state = random_pure(rng, build_basis(2, 5))
        totals = []
        for zeta in np.linspace(0, math.pi, 16):
            n_zeta, n_perp = weighted_number(state.basis, float(zeta))
            totals.append(variance(state, n_zeta) + variance(state, n_perp))
        assert np.max(totals) - np.min(totals) < 1e-10

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            sweep_qfi_vs_zeta(noon(2), [])


class TestNumberCovariance:
    def test_matches_operator_route(self):
        rng = np.random.default_rng(11)
        state = random_pure(rng, build_basis(3, 4))
        cov = number_covariance(state, (0, 1, 2))
        for m in range(3):
            assert abs(cov[m, m] - variance(state, number_op(state.basis, m))) < 1e-12

    def test_mixed_state_input(self):
        from metrolab import partial_trace

        rho = partial_trace(correlated_three_mode(np.array([1, 1]) / math.sqrt(2), 3), keep={0, 1})
        cov = number_covariance(rho, (0, 1))
        assert abs(cov[0, 0] - cov[1, 1]) < 1e-12
        assert abs(cov[0, 1] - cov[0, 0]) < 1e-12  # perfectly correlated
