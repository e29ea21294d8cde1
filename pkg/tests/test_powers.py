import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poweralm.powers import (
    NormFamily,
    PowerParams,
    conjugate_exponent,
    dual_norm,
    epi_scaled_value,
    phi_conj_grad,
    phi_conj_value,
    phi_grad,
    phi_value,
    primal_norm,
    uniform_convexity_slack,
)
from poweralm.rng import Stream

BOTH_NORMS = [NormFamily.EUCLIDEAN, NormFamily.SEPARABLE_POWER]
POWERS = [1.0, 1.25, 1.0 / 0.7, 2.0]


def params_for(p, norm, lam=1.0):
    return PowerParams(p=p, lam=lam, norm=norm)


class TestConjugateExponent:
    def test_quadratic_self_conjugate(self):
        assert conjugate_exponent(1.0) == 1.0

    def test_p_two(self):
        q = conjugate_exponent(2.0)
        assert q == 0.5
        assert 1 / 3 + 1 / 1.5 == pytest.approx(1.0)

    def test_experiment_power(self):
        # q = 0.7 pairs with p = 1/0.7
        assert conjugate_exponent(1.0 / 0.7) == pytest.approx(0.7, abs=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            conjugate_exponent(0.5)

    def test_holder_identity(self):
        for p in POWERS:
            q = conjugate_exponent(p)
            assert 1 / (p + 1) + 1 / (q + 1) == pytest.approx(1.0, abs=5e-16)


class TestPowerParams:
    def test_inconsistent_pair_rejected(self):
        with pytest.raises(ValueError):
            PowerParams(p=2.0, lam=1.0, q=0.7)

    def test_consistent_pair_accepted(self):
        assert PowerParams(p=2.0, lam=1.0, q=0.5).q == 0.5

    def test_from_q(self):
        params = PowerParams.from_q(0.8, 0.1)
        assert params.p == pytest.approx(1.25)
        assert params.lam == 0.1

    def test_bad_lambda(self):
        with pytest.raises(ValueError):
            PowerParams(p=1.0, lam=0.0)


class TestPhiValues:
    def test_zero(self):
        for norm in BOTH_NORMS:
            assert phi_value(np.zeros(3), params_for(2.0, norm)) == 0.0

    def test_euclidean_p1(self):
        assert phi_value([3.0, 4.0], params_for(1.0, NormFamily.EUCLIDEAN)) == pytest.approx(12.5)

    def test_separable_p2(self):
        val = phi_value([2.0, -1.0], params_for(2.0, NormFamily.SEPARABLE_POWER))
        assert val == pytest.approx(3.0)

    def test_conj_zero(self):
        for norm in BOTH_NORMS:
            assert phi_conj_value(np.zeros(2), params_for(2.0, norm)) == 0.0

    def test_conj_euclidean_self_dual(self):
        assert phi_conj_value([3.0, 4.0], params_for(1.0, NormFamily.EUCLIDEAN)) == pytest.approx(12.5)

    def test_conj_separable(self):
        val = phi_conj_value([4.0, -9.0], params_for(2.0, NormFamily.SEPARABLE_POWER))
        assert val == pytest.approx((8.0 + 27.0) / 1.5)


class TestGradients:
    def test_euclidean_p2(self):
        g = phi_grad([3.0, 4.0], params_for(2.0, NormFamily.EUCLIDEAN))
        np.testing.assert_allclose(g, [15.0, 20.0])

    def test_separable_p2(self):
        g = phi_grad([2.0, -1.0], params_for(2.0, NormFamily.SEPARABLE_POWER))
        np.testing.assert_allclose(g, [4.0, -1.0])

    def test_zero_is_minimizer(self):
        for norm in BOTH_NORMS:
            for p in POWERS:
                np.testing.assert_array_equal(phi_grad(np.zeros(3), params_for(p, norm)), 0.0)
                np.testing.assert_array_equal(phi_conj_grad(np.zeros(3), params_for(p, norm)), 0.0)

    def test_conj_grad_unit_vector_fixed_point(self):
        v = np.array([0.6, 0.8])
        for p in POWERS:
            out = phi_conj_grad(v, params_for(p, NormFamily.EUCLIDEAN))
            np.testing.assert_allclose(out, v, atol=1e-14)

    def test_conj_grad_separable(self):
        out = phi_conj_grad([4.0, -9.0], params_for(2.0, NormFamily.SEPARABLE_POWER))
        np.testing.assert_allclose(out, [2.0, -3.0])


class TestEpiScaling:
    def test_lambda_one_is_phi(self):
        x = Stream(0, 0).normal(5)
        for norm in BOTH_NORMS:
            assert epi_scaled_value(x, params_for(2.0, norm)) == phi_value(x, params_for(2.0, norm))

    def test_euclidean_p1(self):
        assert epi_scaled_value([3.0, 4.0], params_for(1.0, NormFamily.EUCLIDEAN, lam=2.0)) == pytest.approx(6.25)

    def test_separable_p2(self):
        val = epi_scaled_value([2.0, -1.0], params_for(2.0, NormFamily.SEPARABLE_POWER, lam=0.5))
        assert val == pytest.approx(12.0)


class TestIdentities:
    def test_conjugacy_roundtrip(self):
        v = Stream(3, 0).normal(4000).reshape(1000, 4)
        for norm in BOTH_NORMS:
            for p in POWERS:
                params = params_for(p, norm)
                back = phi_grad(phi_conj_grad(v, params), params)
                err = np.linalg.norm(back - v, axis=-1)
                assert np.all(err <= 1e-10 * (1.0 + np.linalg.norm(v, axis=-1)))

    def test_dual_norm_of_gradient(self):
        x = Stream(4, 0).normal(4000).reshape(1000, 4)
        for norm in BOTH_NORMS:
            for p in POWERS:
                params = params_for(p, norm)
                lhs = dual_norm(phi_grad(x, params), params)
                rhs = primal_norm(x, params) ** p
                np.testing.assert_allclose(lhs, rhs, rtol=1e-10)

    def test_fenchel_young_equality(self):
        x = Stream(5, 0).normal(4000).reshape(1000, 4)
        for norm in BOTH_NORMS:
            for p in POWERS:
                params = params_for(p, norm)
                g = phi_grad(x, params)
                lhs = phi_value(x, params) + phi_conj_value(g, params)
                rhs = np.sum(x * g, axis=-1)
                np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-300)

    def test_homogeneity(self):
        x = Stream(6, 0).normal(6)
        for norm in BOTH_NORMS:
            for p in POWERS:
                params = params_for(p, norm)
                for alpha in (-2.0, 0.5, 3.0):
                    lhs = phi_value(alpha * x, params)
                    rhs = abs(alpha) ** (p + 1.0) * phi_value(x, params)
                    assert lhs == pytest.approx(rhs, rel=1e-12)


class TestUniformConvexity:
    def test_p1_euclidean_exact_equality(self):
        x = Stream(7, 0).normal(5)
        y = Stream(7, 1).normal(5)
        slack = uniform_convexity_slack(x, y, params_for(1.0, NormFamily.EUCLIDEAN))
        assert abs(slack) <= 1e-12

    def test_same_point(self):
        x = Stream(8, 0).normal(5)
        for norm in BOTH_NORMS:
            assert uniform_convexity_slack(x, x, params_for(2.0, norm)) == pytest.approx(0.0, abs=1e-14)

    def test_randomized_nonnegative(self):
        for norm in BOTH_NORMS:
            for p in (1.0, 1.5, 2.0, 3.0):
                params = params_for(p, norm)
                x = Stream(9, 0).normal(4000).reshape(1000, 4)
                y = Stream(9, 1).normal(4000).reshape(1000, 4)
                slack = uniform_convexity_slack(x, y, params)
                scale = np.maximum(1.0, np.maximum(phi_value(x, params), phi_value(y, params)))
                assert np.all(slack >= -1e-10 * scale)

    # golden values computed with a 50-digit mpmath evaluation of the same
    # expression (the oracle is re-run below to keep the numbers honest)
    GOLDEN = {
        (False, 0): 4.3598839539944678,
        (False, 1): 3.2594860841083815,
        (False, 2): 17.721423042436162,
        (True, 0): 2.9583551170243017,
        (True, 1): 2.6084925758220875,
        (True, 2): 12.480590542350907,
    }

    @pytest.mark.parametrize("sep", [False, True])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_golden_slack_p2(self, sep, seed):
        norm = NormFamily.SEPARABLE_POWER if sep else NormFamily.EUCLIDEAN
        x = Stream(seed, 10).normal(4)
        y = Stream(seed, 11).normal(4)
        mine = uniform_convexity_slack(x, y, params_for(2.0, norm))
        assert mine == pytest.approx(self.GOLDEN[(sep, seed)], rel=1e-12)
        assert mine == pytest.approx(self._slack_mp(x, y, 2, sep), rel=1e-12)

    @staticmethod
    def _slack_mp(x, y, p, sep):
        with mp.workdps(50):
            xs = [mp.mpf(float(v)) for v in x]
            ys = [mp.mpf(float(v)) for v in y]
            if sep:
                phi = lambda z: sum(abs(t) ** (p + 1) for t in z) / (p + 1)
                grad = lambda z: [mp.sign(t) * abs(t) ** p for t in z]
            else:
                nrm = lambda z: mp.sqrt(sum(t * t for t in z))
                phi = lambda z: nrm(z) ** (p + 1) / (p + 1)
                grad = lambda z: [nrm(z) ** (p - 1) * t for t in z]
            gy = grad(ys)
            inner = sum(g * (a - b) for g, a, b in zip(gy, xs, ys))
            diff = [a - b for a, b in zip(xs, ys)]
            out = phi(xs) - phi(ys) - inner - mp.mpf(2) ** (1 - p) * phi(diff)
            return float(out)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=6),
    st.sampled_from(POWERS),
    st.sampled_from(BOTH_NORMS),
)
def test_gradient_inverse_property(vec, p, norm):
    v = np.asarray(vec)
    params = PowerParams(p=p, lam=1.0, norm=norm)
    back = phi_grad(phi_conj_grad(v, params), params)
    assert np.linalg.norm(back - v) <= 1e-10 * (1.0 + np.linalg.norm(v))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-20, 20, allow_nan=False), min_size=2, max_size=5),
    st.lists(st.floats(-20, 20, allow_nan=False), min_size=2, max_size=5),
    st.sampled_from([1.0, 1.5, 2.0, 3.0]),
    st.sampled_from(BOTH_NORMS),
)
def test_uniform_convexity_property(xs, ys, p, norm):
    d = min(len(xs), len(ys))
    x, y = np.asarray(xs[:d]), np.asarray(ys[:d])
    params = PowerParams(p=p, lam=1.0, norm=norm)
    slack = uniform_convexity_slack(x, y, params)
    scale = max(1.0, phi_value(x, params), phi_value(y, params))
    assert slack >= -1e-10 * scale
