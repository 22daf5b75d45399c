"""Mixture density head: activations, closed-form densities, NLL, sampling."""

import numpy as np
import pytest

from choreo.mdn import (
    MdnError,
    MdnParams,
    mdn_activate,
    mdn_density,
    mdn_log_density,
    mdn_nll,
    mdn_sample,
    raw_dim,
)
from choreo.tensor import GradientTape, Tensor

from .test_tensor import numeric_grad, rel_err


def random_params(rng, m=3, c=2, spread=1.0):
    raw = rng.uniform(-spread, spread, size=raw_dim(m, c))
    return mdn_activate(raw, m, c)


class TestActivate:
    def test_zero_raw(self):
        params = mdn_activate(np.zeros(raw_dim(2, 1)), 2, 1)
        np.testing.assert_allclose(params.alpha, [0.5, 0.5], atol=1e-15)
        np.testing.assert_array_equal(params.mu, [[0.0], [0.0]])
        np.testing.assert_array_equal(params.sigma, [1.0, 1.0])

    def test_logit_shift_invariance(self):
        rng = np.random.default_rng(0)
        raw = rng.normal(size=raw_dim(4, 3))
        shifted = raw.copy()
        shifted[:4] += 7.5
        a = mdn_activate(raw, 4, 3)
        b = mdn_activate(shifted, 4, 3)
        np.testing.assert_allclose(a.alpha, b.alpha, atol=1e-12)

    def test_sigma_clamped_at_floor(self):
        raw = np.zeros(raw_dim(1, 1))
        raw[2] = -20.0
        params = mdn_activate(raw, 1, 1)
        assert params.sigma[0] == 1e-4

    def test_wrong_length_rejected(self):
        with pytest.raises(MdnError):
            mdn_activate(np.zeros(5), 2, 1)


class TestDensity:
    def test_standard_normal_peak(self):
        params = MdnParams(alpha=[1.0], mu=[[0.0]], sigma=[1.0])
        np.testing.assert_allclose(mdn_density(params, [0.0]),
                                   1.0 / np.sqrt(2 * np.pi), atol=1e-9)

    def test_bivariate_peak(self):
        params = MdnParams(alpha=[1.0], mu=[[0.0, 0.0]], sigma=[1.0])
        np.testing.assert_allclose(mdn_density(params, [0.0, 0.0]),
                                   1.0 / (2 * np.pi), atol=1e-9)

    def test_identical_components_collapse(self):
        single = MdnParams(alpha=[1.0], mu=[[0.3, -0.2]], sigma=[0.7])
        double = MdnParams(alpha=[0.3, 0.7], mu=[[0.3, -0.2]] * 2, sigma=[0.7, 0.7])
        t = np.array([0.1, 0.4])
        np.testing.assert_allclose(mdn_density(double, t), mdn_density(single, t), atol=1e-12)

    def test_univariate_density_integrates_to_one(self):
        """Quadrature oracle over a wide grid for c=1 mixtures."""
        rng = np.random.default_rng(1)
        for _ in range(5):
            params = random_params(rng, m=3, c=1, spread=1.5)
            lo = params.mu.min() - 50 * params.sigma.max()
            hi = params.mu.max() + 50 * params.sigma.max()
            xs = np.linspace(lo, hi, 200_001)
            # vectorized evaluation of the same mixture for the quadrature
            ys = (params.alpha[:, None]
                  / (np.sqrt(2 * np.pi) * params.sigma[:, None])
                  * np.exp(-((xs[None, :] - params.mu[:, 0:1]) ** 2)
                           / (2 * params.sigma[:, None] ** 2))).sum(axis=0)
            # grid values agree with the public density path
            for i in rng.choice(xs.size, size=20, replace=False):
                np.testing.assert_allclose(mdn_density(params, [xs[i]]), ys[i], atol=1e-12)
            integral = np.trapezoid(ys, xs)
            assert abs(integral - 1.0) < 1e-3

    def test_component_permutation_invariance(self):
        rng = np.random.default_rng(2)
        params = random_params(rng, m=4, c=2)
        perm = np.array([2, 0, 3, 1])
        permuted = MdnParams(alpha=params.alpha[perm], mu=params.mu[perm],
                             sigma=params.sigma[perm])
        t = rng.normal(size=2)
        np.testing.assert_allclose(mdn_log_density(permuted, t),
                                   mdn_log_density(params, t), atol=1e-12)

    def test_far_target_with_tiny_sigma_stays_finite(self):
        params = MdnParams(alpha=[1.0], mu=[[0.0]], sigma=[1e-4])
        assert np.isfinite(mdn_log_density(params, [1e3]))


class TestNll:
    def test_peak_nll_closed_form(self):
        raw = Tensor(np.zeros((1, raw_dim(1, 1))))
        loss = mdn_nll(raw, np.zeros((1, 1)), 1, 1)
        np.testing.assert_allclose(loss.item(), 0.5 * np.log(2 * np.pi), atol=1e-12)

    def test_exp_neg_nll_equals_density(self):
        """Single-sample NLL against the direct density evaluation."""
        rng = np.random.default_rng(3)
        for _ in range(10):
            m, c = 3, 2
            raw_np = rng.uniform(-1.5, 1.5, size=(1, raw_dim(m, c)))
            t = rng.normal(size=(1, c))
            loss = mdn_nll(Tensor(raw_np), t, m, c)
            params = mdn_activate(raw_np[0], m, c)
            np.testing.assert_allclose(np.exp(-loss.item()),
                                       mdn_density(params, t[0]), atol=1e-9)

    def test_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(4)
        m, c = 2, 3
        raw = Tensor(rng.uniform(-1, 1, size=(4, raw_dim(m, c))))
        targets = rng.normal(size=(4, c))

        def build():
            return mdn_nll(raw, targets, m, c)

        raw.zero_grad()
        with GradientTape() as tape:
            loss = build()
        tape.backward(loss)
        num = numeric_grad(lambda: build().item(), raw.data)
        assert rel_err(raw.grad, num).max() < 1e-4

    def test_nll_lower_near_mode_than_far(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            params = random_params(rng, m=2, c=1)
            idx = int(np.argmax(params.alpha))
            near = params.mu[idx]
            far = near + 10.0 * params.sigma.max()
            assert mdn_log_density(params, near) >= mdn_log_density(params, far)


class TestSample:
    def test_temperature_zero_returns_dominant_mean(self):
        params = MdnParams(alpha=[0.9, 0.1], mu=[[1.0, 2.0], [-1.0, -2.0]],
                           sigma=[0.5, 0.5])
        rng = np.random.default_rng(6)
        for _ in range(5):
            np.testing.assert_array_equal(mdn_sample(params, rng, 0.0), [1.0, 2.0])

    def test_sample_mean_matches_mixture_mean(self):
        rng = np.random.default_rng(7)
        params = random_params(rng, m=3, c=2, spread=1.2)
        draws = np.stack([mdn_sample(params, rng, 1.0) for _ in range(100_000)])
        expected = (params.alpha[:, None] * params.mu).sum(axis=0)
        second = (params.alpha[:, None] * (params.sigma[:, None] ** 2 + params.mu ** 2)).sum(axis=0)
        var = second - expected ** 2
        se = np.sqrt(var / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - expected) <= 3 * se)

    def test_single_component_sample_variance(self):
        params = MdnParams(alpha=[1.0], mu=[[0.5, -0.5, 1.0]], sigma=[0.8])
        rng = np.random.default_rng(8)
        draws = np.stack([mdn_sample(params, rng, 1.0) for _ in range(100_000)])
        emp = draws.var(axis=0)
        assert np.all(np.abs(emp - 0.8 ** 2) / 0.8 ** 2 < 0.05)

    def test_seeded_reproducibility(self):
        rng = np.random.default_rng(9)
        params = random_params(rng, m=2, c=2)
        a = mdn_sample(params, np.random.default_rng(1234), 1.0)
        b = mdn_sample(params, np.random.default_rng(1234), 1.0)
        np.testing.assert_array_equal(a, b)
