import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hilbert_ksd.errors import InvalidArgumentError
from hilbert_ksd.experiments import BROWNIAN_EXPERIMENTS, median_context_builder
from hilbert_ksd.gof import (
    TestConfig,
    bootstrap_replicate,
    bootstrap_replicates,
    bootstrap_threshold,
    make_rng,
    multinomial_weights,
    power_study,
    power_study_many,
    run_test,
    substream,
    test_from_gram,
)
from hilbert_ksd.stein import SteinGram, build_gram


def _random_gram(seed, n):
    r = np.random.default_rng(seed)
    A = r.standard_normal((n, n + 2))
    return SteinGram(A @ A.T)


class TestReplicate:
    @given(st.integers(0, 2**31), st.integers(2, 12))
    def test_uniform_weights_zero(self, seed, n):
        assert bootstrap_replicate(_random_gram(seed, n), np.ones(n, int)) == 0.0

    def test_two_point(self):
        H = np.array([[5.0, 1.5], [1.5, 9.0]])
        assert bootstrap_replicate(SteinGram(H), [2, 0]) == pytest.approx(-1.5 / 2)

    def test_two_point_expectation(self):
        H = np.array([[5.0, 1.5], [1.5, 9.0]])
        G = SteinGram(H)
        mean = 0.25 * bootstrap_replicate(G, [2, 0]) + 0.5 * bootstrap_replicate(G, [1, 1]) \
            + 0.25 * bootstrap_replicate(G, [0, 2])
        assert mean == -1.5 / 4

    def test_bad_weights(self):
        G = _random_gram(0, 3)
        for w in ([1, 1, 2], [3, 0, -0], [2, -1, 2], [1.5, 0.5, 1], [1, 2]):
            if sum(w) == 3 and all(v >= 0 for v in w) and all(float(v).is_integer() for v in w) \
                    and len(w) == 3:
                continue
            with pytest.raises(InvalidArgumentError):
                bootstrap_replicate(G, w)

    def test_multinomial_finite_and_vectorised(self):
        G = _random_gram(1, 7)
        W = multinomial_weights(make_rng(3), 7, 50)
        assert W.shape == (50, 7) and np.all(W.sum(axis=1) == 7)
        vec = bootstrap_replicates(G, W)
        loop = np.array([bootstrap_replicate(G, w) for w in W])
        assert np.all(np.isfinite(vec))
        np.testing.assert_allclose(vec, loop, rtol=1e-12, atol=1e-14)


class TestThreshold:
    def test_order_statistic(self):
        reps = np.arange(1.0, 2001.0)[::-1]
        # ceil(0.95 * 2000) = 1900, 1-based
        assert bootstrap_threshold(reps, 0.05) == 1900.0
        assert bootstrap_threshold(np.arange(1.0, 11.0), 0.25) == 8.0

    def test_alpha_near_one_gives_min(self):
        reps = np.random.default_rng(0).standard_normal(100)
        assert bootstrap_threshold(reps, 1 - 1e-9) == reps.min()

    @given(st.integers(0, 2**31), st.floats(0.001, 0.999), st.floats(0.001, 0.999))
    def test_monotone_in_alpha(self, seed, a1, a2):
        a1, a2 = sorted((a1, a2))
        reps = np.random.default_rng(seed).standard_normal(333)
        assert bootstrap_threshold(reps, a1) >= bootstrap_threshold(reps, a2)

    def test_config_validation(self):
        for kw in ({"alpha": 0.0}, {"alpha": 1.0}, {"alpha": 1.5}, {"n_bootstrap": 0}):
            with pytest.raises(InvalidArgumentError):
                TestConfig(**kw)


@pytest.fixture(scope="module")
def data(bsetting):
    X = BROWNIAN_EXPERIMENTS["exp1"].draw(make_rng(4), bsetting.grid, 30)
    ctx = median_context_builder(bsetting, "SE", "T1")(X)
    return X, ctx


class TestRunTest:
    def test_deterministic(self, data):
        X, ctx = data
        cfg = TestConfig(500, 0.05, 11)
        assert run_test(X, ctx, cfg) == run_test(X, ctx, cfg)

    def test_result_invariants(self, data):
        X, ctx = data
        res = run_test(X, ctx, TestConfig(400, 0.1, 2))
        assert res.replicates.shape == (400,)
        assert res.threshold == bootstrap_threshold(res.replicates, 0.1)
        assert res.reject == (res.statistic > res.threshold)
        assert res.gamma_used == ctx.kernel.gamma

    def test_alpha_near_one_rejects(self, data):
        X, ctx = data
        res = run_test(X, ctx, TestConfig(200, 1 - 1e-9, 0))
        assert res.threshold == res.replicates.min()

    def test_needs_two(self, data):
        X, ctx = data
        with pytest.raises(InvalidArgumentError):
            run_test(X[:1], ctx, TestConfig())

    def test_gram_route(self, data):
        X, ctx = data
        cfg = TestConfig(300, 0.05, 5)
        a = run_test(X, ctx, cfg)
        b = test_from_gram(build_gram(ctx, X), cfg, gamma_used=ctx.kernel.gamma)
        assert a == b


class TestPowerStudy:
    def _parts(self, bsetting):
        def sampler(rng):
            return BROWNIAN_EXPERIMENTS["exp6"].draw(rng, bsetting.grid, 15)

        return sampler, median_context_builder(bsetting, "IMQ", "T1")

    def test_zero_repetitions(self, bsetting):
        sampler, builder = self._parts(bsetting)
        with pytest.raises(InvalidArgumentError):
            power_study(sampler, builder, TestConfig(100), 0)

    def test_parallel_matches_serial(self, bsetting):
        sampler, builder = self._parts(bsetting)
        cfg = TestConfig(200, 0.05, 3)
        a = power_study(sampler, builder, cfg, 8, detail=True)
        b = power_study(sampler, builder, cfg, 8, n_jobs=4, detail=True)
        assert a == b
        assert power_study(sampler, builder, cfg, 8) == a.rate == np.mean(a.rejections)

    def test_many_matches_single(self, bsetting):
        sampler, builder = self._parts(bsetting)
        cfg = TestConfig(200, 0.05, 3)
        single = power_study(sampler, builder, cfg, 5, detail=True)
        many = power_study_many(sampler, {"x": lambda X: (X, builder(X))}, cfg, 5, n_jobs=2)
        assert many["x"] == single

    def test_substreams_distinct(self):
        a = substream(1, 0, 0).standard_normal(4)
        b = substream(1, 0, 1).standard_normal(4)
        c = substream(1, 1, 0).standard_normal(4)
        assert not np.allclose(a, b) and not np.allclose(a, c)
        np.testing.assert_array_equal(a, substream(1, 0, 0).standard_normal(4))
