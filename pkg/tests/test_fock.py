import itertools
import math

import numpy as np
import pytest

from metrolab import (
    FockBasis,
    MixedState,
    PureState,
    build_basis,
    coherent_cutoff,
    coherent_truncated,
    correlated_three_mode,
    fidelity,
    noon,
    partial_trace,
    rotated_fock,
    tensor_product,
    with_reference,
)


def brute_force_dim(num_modes, n_total):
    return sum(
        1
        for occ in itertools.product(range(n_total + 1), repeat=num_modes)
        if sum(occ) <= n_total
    )


def random_pure(rng, basis):
    v = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
    return PureState(basis, v, normalize=True)


class TestBasis:
    def test_single_mode_dim(self):
        assert build_basis(1, 5).dim == 6

    @pytest.mark.parametrize("num_modes,n_total", [(2, 4), (4, 3), (3, 6)])
    def test_dim_matches_enumeration(self, num_modes, n_total):
        basis = build_basis(num_modes, n_total)
        assert basis.dim == brute_force_dim(num_modes, n_total)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            FockBasis(0, 3)
        with pytest.raises(ValueError):
            FockBasis(2, -1)

    def test_vacuum_is_index_zero(self):
        for basis in (build_basis(1, 4), build_basis(3, 5)):
            assert basis.rank((0,) * basis.num_modes) == 0

    def test_rank_unrank_roundtrip(self):
        basis = build_basis(4, 8)
        rng = np.random.default_rng(7)
        for index in rng.integers(0, basis.dim, size=1000):
            assert basis.rank(basis.unrank(int(index))) == int(index)

    def test_graded_ordering(self):
        basis = build_basis(2, 2)
        totals = [sum(basis.unrank(k)) for k in range(basis.dim)]
        assert totals == sorted(totals)
        sector1 = basis.sector_slice(1)
        r10, r01 = basis.rank((1, 0)), basis.rank((0, 1))
        assert r10 != r01
        assert sector1.start <= r10 < sector1.stop
        assert sector1.start <= r01 < sector1.stop

    def test_occupations_agree_with_unrank(self):
        basis = build_basis(3, 4)
        table = basis.occupations()
        for k in range(basis.dim):
            assert tuple(table[k]) == basis.unrank(k)

    def test_rank_rejects_invalid_occupations(self):
        basis = build_basis(2, 3)
        with pytest.raises(ValueError):
            basis.rank((1, 1, 1))
        with pytest.raises(ValueError):
            basis.rank((2, 2))
        with pytest.raises(ValueError):
            basis.rank((-1, 1))

    @pytest.mark.parametrize("num_modes,n_total", [(1, 7), (2, 9), (3, 5), (5, 4)])
    def test_sector_dims_sum_to_dim(self, num_modes, n_total):
        basis = build_basis(num_modes, n_total)
        assert sum(basis.sector_dim(s) for s in range(n_total + 1)) == basis.dim


class TestStates:
    def test_pure_state_rejects_unnormalized(self):
        basis = build_basis(1, 2)
        with pytest.raises(ValueError):
            PureState(basis, [1.0, 1.0, 0.0])
        state = PureState(basis, [1.0, 1.0, 0.0], normalize=True)
        assert np.isclose(np.linalg.norm(state.amplitudes), 1.0)

    def test_pure_state_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            PureState(build_basis(1, 2), [1.0, 0.0])

    def test_mixed_state_validation(self):
        basis = build_basis(1, 1)
        with pytest.raises(ValueError):
            MixedState(basis, [[0.5, 0.5j], [0.5j, 0.5]])  # not Hermitian
        with pytest.raises(ValueError):
            MixedState(basis, [[0.7, 0], [0, 0.7]])  # trace 1.4
        with pytest.raises(ValueError):
            MixedState(basis, [[1.5, 0], [0, -0.5]])  # negative eigenvalue

    def test_expand_cutoff_preserves_amplitudes(self):
        state = noon(3)
        bigger = state.expand_cutoff(5)
        assert bigger.basis.n_total == 5
        assert np.isclose(bigger.amplitude((3, 0)), state.amplitude((3, 0)))
        assert np.isclose(bigger.amplitude((0, 3)), state.amplitude((0, 3)))

    def test_sector_masses(self):
        state = noon(4)
        masses = state.sector_masses()
        assert np.isclose(masses[4], 1.0)
        assert np.allclose(masses[:4], 0.0)


class TestFidelity:
    def test_self_fidelity_one(self):
        rng = np.random.default_rng(0)
        state = random_pure(rng, build_basis(2, 5))
        assert np.isclose(fidelity(state, state), 1.0)

    def test_orthogonal_fock_states(self):
        basis = build_basis(2, 1)
        a = basis.basis_state((1, 0))
        b = basis.basis_state((0, 1))
        assert fidelity(a, b) == 0.0

    def test_symmetric_and_phase_invariant(self):
        rng = np.random.default_rng(1)
        basis = build_basis(2, 4)
        a, b = random_pure(rng, basis), random_pure(rng, basis)
        assert np.isclose(fidelity(a, b), fidelity(b, a))
        rotated = PureState(basis, np.exp(0.7j) * a.amplitudes)
        assert np.isclose(fidelity(a, rotated), 1.0)
        assert fidelity(a, b) < 1.0 - 1e-6

    def test_basis_mismatch_raises(self):
        with pytest.raises(ValueError):
            fidelity(noon(2), noon(3))

    def test_uhlmann_consistent_with_pure(self):
        rng = np.random.default_rng(2)
        basis = build_basis(2, 3)
        a, b = random_pure(rng, basis), random_pure(rng, basis)
        assert np.isclose(fidelity(a.to_mixed(), b.to_mixed()), fidelity(a, b), atol=1e-10)
        assert np.isclose(fidelity(a, b.to_mixed()), fidelity(a, b), atol=1e-12)

    def test_rotated_fock_close_to_embedded_coherent(self):
        # independent oracle: overlap of binomial amplitudes with the
        # renormalized Poisson profile, summed directly
        n_total, alpha = 40, 1.0
        theta = 2 * math.asin(alpha / math.sqrt(n_total))
        cutoff = coherent_cutoff(alpha)
        k_max = min(cutoff, n_total)
        poisson = np.array(
            [math.exp(-(alpha**2) / 2) * alpha**k / math.sqrt(math.factorial(k)) for k in range(k_max + 1)]
        )
        poisson /= np.linalg.norm(poisson)
        half = theta / 2
        binom = np.array(
            [
                math.sqrt(math.comb(n_total, k)) * math.cos(half) ** (n_total - k) * math.sin(half) ** k
                for k in range(k_max + 1)
            ]
        )
        expected = abs(np.dot(binom, poisson)) ** 2

        value = fidelity(
            rotated_fock(n_total, theta, 0.0),
            with_reference(coherent_truncated(alpha, cutoff), n_total),
        )
        assert value > 0.99
        assert np.isclose(value, expected, atol=1e-12)


class TestPartialTrace:
    def test_product_state_reduces_to_projector(self):
        basis = build_basis(2, 4)
        state = basis.basis_state((4, 0))
        reduced = partial_trace(state, keep={0})
        expected = np.zeros((5, 5))
        expected[4, 4] = 1.0
        np.testing.assert_allclose(reduced.matrix, expected, atol=1e-14)

    def test_noon_reduction(self):
        reduced = partial_trace(noon(3), keep={0})
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[3, 3] = 0.5
        np.testing.assert_allclose(reduced.matrix, expected, atol=1e-14)

    def test_schmidt_purity(self):
        rng = np.random.default_rng(3)
        c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        c /= np.linalg.norm(c)
        state = correlated_three_mode(c, 6)
        reduced = partial_trace(state, keep={0})
        assert np.isclose(reduced.purity(), float(np.sum(np.abs(c) ** 4)), atol=1e-12)

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError):
            partial_trace(noon(2), keep=set())
        with pytest.raises(ValueError):
            partial_trace(noon(2), keep={0, 5})

    def test_random_states_stay_valid(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            num_modes = int(rng.integers(2, 4))
            n_total = int(rng.integers(1, 6))
            basis = build_basis(num_modes, n_total)
            state = random_pure(rng, basis)
            keep = sorted(
                rng.choice(num_modes, size=int(rng.integers(1, num_modes)), replace=False)
            )
            reduced = partial_trace(state, keep=keep)
            assert abs(np.trace(reduced.matrix) - 1.0) < 1e-12
            assert np.max(np.abs(reduced.matrix - reduced.matrix.conj().T)) < 1e-12
            assert float(np.linalg.eigvalsh(reduced.matrix)[0]) > -1e-10

    def test_product_reduces_to_factor(self):
        rng = np.random.default_rng(5)
        a = random_pure(rng, build_basis(2, 2))
        b = random_pure(rng, build_basis(1, 3))
        product = tensor_product(a, b)
        reduced = partial_trace(product, keep={0, 1})
        expected = a.expand_cutoff(product.basis.n_total).to_mixed()
        np.testing.assert_allclose(reduced.matrix, expected.matrix, atol=1e-12)

    def test_keep_all_modes_is_density(self):
        state = noon(2)
        full = partial_trace(state, keep={0, 1})
        np.testing.assert_allclose(full.matrix, state.density_matrix(), atol=1e-14)

    def test_mixed_input(self):
        rho = partial_trace(correlated_three_mode([1 / math.sqrt(2), 0, 1 / math.sqrt(2)], 4), keep={0, 1})
        again = partial_trace(rho, keep={0})
        assert abs(np.trace(again.matrix) - 1.0) < 1e-12
        assert float(np.linalg.eigvalsh(again.matrix)[0]) > -1e-10


class TestTensorProduct:
    def test_default_cutoff_loses_nothing(self):
        rng = np.random.default_rng(6)
        a = random_pure(rng, build_basis(1, 2))
        b = random_pure(rng, build_basis(1, 3))
        product = tensor_product(a, b)
        assert product.basis.n_total == 5
        assert np.isclose(
            product.amplitude((2, 3)), a.amplitudes[2] * b.amplitudes[3], atol=1e-12
        )

    def test_explicit_cutoff_truncates_and_renormalizes(self):
        basis = build_basis(1, 1)
        plus = PureState(basis, np.array([1, 1]) / math.sqrt(2))
        product = tensor_product(plus, plus, n_total=1)
        # the |1,1> branch is cut; three equal-weight branches remain
        assert np.isclose(np.linalg.norm(product.amplitudes), 1.0)
        assert np.isclose(abs(product.amplitude((0, 0))) ** 2, 1 / 3, atol=1e-12)
