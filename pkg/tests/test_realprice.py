import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nets import ALPHAS, C52, U52, net52, random_setup
from spendnet import (
    DynamicSpendingSetup,
    Reducible,
    SpendingNetwork,
    ZeroMarginalUtility,
    finite_diff_real_price,
    marginal_utilities,
    real_price_dynamic,
    real_price_fixed,
    solve_stationary,
)
from spendnet.realprice import dynamic_sensitivity

BASE_A = (0.0, 2.0, 0.0)


def rel(a, b):
    return abs(a - b) / abs(b)


class TestFixed:
    def test_two_agent_swap_is_twice_label_price(self):
        net = SpendingNetwork([[0, 1], [1, 0]], [[0, 0], [3, 0]], [[1, 1], [0.7, 1]], [1, 1])
        res = real_price_fixed(net, 0, 1)
        assert res.rp == pytest.approx(2 * 0.7, rel=1e-14)
        assert res.label_price == 0.7
        np.testing.assert_allclose(res.dx_da, [0.5, 0.5], atol=1e-15)

    def test_larger_share_means_lower_price(self):
        def rp(b):
            return real_price_fixed(SpendingNetwork([[0, b], [1, 1 - b]], [[0, 0], [3, 0]], [[1, 1], [2, 1]], [1, 1]), 0, 1).rp

        prices = [rp(b) for b in (0.2, 0.4, 0.6, 0.8, 1.0)]
        assert all(q < p for p, q in zip(prices, prices[1:]))

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    def test_against_finite_differences(self, alpha):
        net = net52(alpha)
        res = real_price_fixed(net, 0, 1)
        fd = finite_diff_real_price(net, DynamicSpendingSetup(BASE_A, target_k=1), mode="fixed")
        assert rel(res.rp, fd.rp) <= 1e-7
        assert res.rp > 0

    def test_literal_variant_drops_allocation_weights(self):
        net = net52(0.5)
        xhat = solve_stationary(net).shares
        lit = real_price_fixed(net, 0, 1, literal_formula=True)
        assert lit.literal
        assert lit.dW_da == pytest.approx(xhat[0] * net.utility_ratios(0).sum(), rel=1e-14)
        assert not real_price_fixed(net, 0, 1).literal

    def test_zero_utility_is_reported(self):
        net = SpendingNetwork([[0, 1], [1, 0]], np.zeros((2, 2)), np.ones((2, 2)), [1, 1])
        with pytest.raises(ZeroMarginalUtility):
            real_price_fixed(net, 0, 1)

    def test_reducible(self):
        with pytest.raises(Reducible):
            real_price_fixed(SpendingNetwork(np.eye(2), np.ones((2, 2)), np.ones((2, 2)), [1, 1]), 0, 1)


class TestDynamic:
    @pytest.mark.parametrize("k", [1, 2])
    def test_second_data_set_sweep_against_finite_differences(self, k):
        setup = DynamicSpendingSetup(BASE_A, target_k=k)
        worst = 0.0
        for alpha in ALPHAS:
            net = net52(alpha)
            res = real_price_dynamic(net, setup)
            fd = finite_diff_real_price(net, setup, epsilon=1e-6)
            worst = max(worst, rel(res.rp, fd.rp))
            np.testing.assert_allclose(res.dx_da, fd.dx_da, rtol=1e-5, atol=1e-7)
        assert worst <= 1e-5

    @settings(max_examples=100, deadline=None)
    @given(st.integers(3, 6), st.integers(0, 2**32 - 1))
    def test_random_setups_against_finite_differences(self, n, seed):
        net, setup = random_setup(np.random.default_rng(seed), n)
        res = real_price_dynamic(net, setup)
        fd = finite_diff_real_price(net, setup, epsilon=1e-6)
        assert rel(res.rp, fd.rp) <= 1e-5
        assert res.rp * res.dW_da == pytest.approx(net.U[setup.target_k, 0], rel=1e-10)

    def test_definitional_identity(self):
        for alpha in (0.05, 0.5, 0.95):
            for k in range(3):
                res = real_price_dynamic(net52(alpha), DynamicSpendingSetup(BASE_A, target_k=k))
                assert res.rp * res.dW_da == pytest.approx(U52[k, 0], rel=1e-10)
                assert res.label_price == C52[k, 0]

    def test_sensitivity_sums_to_one(self):
        _, dx = dynamic_sensitivity(net52(0.3), DynamicSpendingSetup(BASE_A, target_k=1))
        assert dx.sum() == pytest.approx(1.0, abs=1e-13)

    def test_drop_row_invariance(self):
        setup = DynamicSpendingSetup(BASE_A, target_k=1)
        for alpha in ALPHAS:
            net = net52(alpha)
            ref = dynamic_sensitivity(net, setup)[1]
            for row in range(3):
                np.testing.assert_allclose(dynamic_sensitivity(net, setup, drop=row)[1], ref, rtol=0, atol=1e-10)

    def test_richardson_order(self):
        net, setup = net52(0.5), DynamicSpendingSetup(BASE_A, target_k=2)
        exact = real_price_dynamic(net, setup).dW_da
        e1 = finite_diff_real_price(net, setup, epsilon=0.02).dW_da - exact
        e2 = finite_diff_real_price(net, setup, epsilon=0.01).dW_da - exact
        assert e1 / e2 == pytest.approx(4.0, rel=0.02)

    def test_large_step_conserves_currency(self):
        fd = finite_diff_real_price(net52(0.5), DynamicSpendingSetup(BASE_A, target_k=1), epsilon=1.5)
        assert fd.dx_da.sum() == pytest.approx(1.0, abs=1e-12)

    def test_permutation_invariance(self):
        net, setup = net52(0.4), DynamicSpendingSetup(BASE_A, target_k=1)
        perm = np.array([2, 0, 1])  # new index of each old agent
        inv = np.argsort(perm)
        Pp = net.P[np.ix_(inv, inv)]
        moved = SpendingNetwork(Pp, net.U[np.ix_(inv, inv)], net.C[np.ix_(inv, inv)], net.x0[inv])
        moved_setup = DynamicSpendingSetup(np.asarray(BASE_A)[inv], target_k=int(perm[1]), agent=int(perm[0]))
        a, b = real_price_dynamic(net, setup), real_price_dynamic(moved, moved_setup)
        assert b.rp == pytest.approx(a.rp, rel=1e-12)
        np.testing.assert_allclose(b.dx_da, a.dx_da[inv], atol=1e-13)

    def test_setup_replaces_buyer_column(self):
        net = net52(0.5)
        other = net.with_column(0, [0.2, 0.5, 0.3])
        setup = DynamicSpendingSetup(BASE_A, target_k=1)
        assert real_price_dynamic(other, setup).rp == real_price_dynamic(net, setup).rp

    def test_negative_marginal_is_flagged(self):
        res = real_price_dynamic(net52(0.97), DynamicSpendingSetup(BASE_A, target_k=2))
        assert res.dW_da < 0
        assert res.rp < 0
        assert res.negative_marginal

    def test_reducible_setup(self):
        with pytest.raises(Reducible):
            real_price_dynamic(net52(0.5), DynamicSpendingSetup((1, 0, 0), target_k=1))

    def test_setup_validation(self):
        with pytest.raises(ValueError):
            DynamicSpendingSetup((0, 0, 0))
        with pytest.raises(ValueError):
            DynamicSpendingSetup((1, -1, 2))
        with pytest.raises(ValueError):
            DynamicSpendingSetup((0, 2, 0), target_k=3)

    def test_explicit_total(self):
        setup = DynamicSpendingSetup(BASE_A, target_k=1, total=20.0)
        res = real_price_dynamic(net52(0.5), setup)
        fd = finite_diff_real_price(net52(0.5), setup)
        assert rel(res.rp, fd.rp) <= 1e-5
        # a = (0, 2, 0) is already pure on provider 2, so only k = 3 feels the total
        assert res.rp == real_price_dynamic(net52(0.5), DynamicSpendingSetup(BASE_A, target_k=1)).rp
        k3 = setup.for_provider(2)
        assert real_price_dynamic(net52(0.5), k3).rp != real_price_dynamic(net52(0.5), DynamicSpendingSetup(BASE_A, 2)).rp
        assert rel(real_price_dynamic(net52(0.5), k3).rp, finite_diff_real_price(net52(0.5), k3).rp) <= 1e-5


class TestMarginalUtilities:
    def test_matches_oracle(self):
        net, setup = net52(0.3), DynamicSpendingSetup(BASE_A)
        np.testing.assert_allclose(marginal_utilities(net, setup), marginal_utilities(net, setup, oracle=True), rtol=1e-5)

    def test_provider_without_utility_keeps_reallocation_term(self):
        U = U52.copy()
        U[2, 0] = 0.0
        net = SpendingNetwork(net52(0.5).P, U, C52, [2, 4, 4])
        setup = DynamicSpendingSetup(BASE_A, target_k=2)
        x, dx = dynamic_sensitivity(net, setup)
        cg = setup.column @ net.utility_ratios(0)
        expected = dx[0] * cg - x[0] * cg / setup.a.sum()
        assert marginal_utilities(net, setup)[2] == pytest.approx(expected, rel=1e-12)

    def test_zero_marginal_becomes_zero(self):
        net = SpendingNetwork(net52(0.5).P, np.zeros((3, 3)), C52, [2, 4, 4])
        np.testing.assert_array_equal(marginal_utilities(net, DynamicSpendingSetup(BASE_A)), 0.0)
