import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hilbert_ksd.errors import DegenerateBandwidthError, IncompatibleGridError, InvalidArgumentError
from hilbert_ksd.fn_space import FunctionSample, make_uniform_grid
from hilbert_ksd.kernels import (
    KernelConfig,
    KernelFamily,
    kernel_eval,
    median_bandwidth,
    median_of_distances,
    pairwise_sqdist,
    t2_whitening,
)
from hilbert_ksd.samplers import sample_bm
from hilbert_ksd.targets import brownian_motion_eigensystem

FAMILIES = [KernelFamily.SE, KernelFamily.IMQ]


def _const(grid, c):
    return FunctionSample(grid, np.full(grid.m, float(c)))


class TestKernelEval:
    @pytest.mark.parametrize("fam", FAMILIES)
    def test_identical_is_one(self, fam, grid100, rng):
        x = FunctionSample(grid100, rng.standard_normal(100))
        assert kernel_eval(KernelConfig(fam), x, x) == 1.0

    def test_imq_value(self, grid100):
        # constants differing by sqrt(3) on [0, 1] are sqrt(3) apart in L2
        x, y = _const(grid100, 0), _const(grid100, np.sqrt(3))
        assert kernel_eval(KernelConfig("IMQ"), x, y) == pytest.approx(0.5, rel=1e-12)

    def test_se_value(self, grid100):
        x, y = _const(grid100, 0), _const(grid100, np.sqrt(2))
        assert kernel_eval(KernelConfig("SE"), x, y) == pytest.approx(np.exp(-1), rel=1e-12)

    def test_bandwidth(self, grid100):
        x, y = _const(grid100, 0), _const(grid100, 2.0)
        assert kernel_eval(KernelConfig("SE", gamma=2.0), x, y) == pytest.approx(np.exp(-0.5))

    def test_grid_mismatch(self, grid100):
        with pytest.raises(IncompatibleGridError):
            kernel_eval(KernelConfig("SE"), _const(grid100, 0), _const(make_uniform_grid(0, 2, 100), 0))

    def test_bad_config(self):
        with pytest.raises(InvalidArgumentError):
            KernelConfig("SE", gamma=0.0)
        with pytest.raises(InvalidArgumentError):
            KernelConfig("RBF")

    @given(st.integers(0, 2**31), st.sampled_from(FAMILIES), st.floats(0.05, 20), st.booleans())
    def test_symmetric_bounded(self, seed, fam, gamma, use_t2):
        grid = make_uniform_grid(0, 1, 40)
        r = np.random.default_rng(seed)
        T = t2_whitening(brownian_motion_eigensystem(grid, 10), 5) if use_t2 else None
        cfg = KernelConfig(fam, T, gamma)
        x = FunctionSample(grid, r.standard_normal(40))
        y = FunctionSample(grid, r.standard_normal(40))
        kxy = kernel_eval(cfg, x, y)
        assert kxy == kernel_eval(cfg, y, x)
        # SE underflows to exactly 0.0 for far-apart whitened inputs
        assert 0 <= kxy <= 1

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_gram_psd(self, fam, grid100):
        X = sample_bm(3, grid100, size=50)
        xs = [FunctionSample(grid100, v) for v in X]
        K = np.array([[kernel_eval(KernelConfig(fam, gamma=0.7), a, b) for b in xs] for a in xs])
        ev = np.linalg.eigvalsh(K)
        assert ev.min() >= -1e-8 * ev.max()


class TestMedian:
    def test_odd_count(self):
        assert median_of_distances([9, 1, 2]) == 2

    def test_even_count(self):
        assert median_of_distances([1, 3]) == 2

    def test_identical_samples(self, grid100):
        x = _const(grid100, 1.0)
        with pytest.raises(DegenerateBandwidthError):
            median_bandwidth([x, x])

    def test_three_constants(self, grid100):
        # pairwise L2 distances between constants 0, 1, 10 on [0, 1] are 1, 9, 10
        xs = [_const(grid100, c) for c in (0, 1, 10)]
        assert median_bandwidth(xs) == pytest.approx(9.0, rel=1e-12)

    def test_pairwise_sqdist(self, grid100, rng):
        X = rng.standard_normal((6, 100))
        D = pairwise_sqdist(X, grid100.weights)
        brute = np.array([[np.sum((a - b) ** 2 * grid100.weights) for b in X] for a in X])
        np.testing.assert_allclose(D, brute, rtol=1e-10, atol=1e-12)
        assert np.all(np.diag(D) == 0)

    @given(st.integers(0, 2**31), st.booleans())
    def test_permutation_invariant(self, seed, use_t2):
        grid = make_uniform_grid(0, 1, 50)
        r = np.random.default_rng(seed)
        X = r.standard_normal((9, 50))
        T = t2_whitening(brownian_motion_eigensystem(grid, 20), 10) if use_t2 else None
        perm = r.permutation(9)
        a = median_bandwidth(X, T, grid)
        b = median_bandwidth(X[perm], T, grid)
        assert a == pytest.approx(b, rel=1e-12)


class TestT2:
    def test_cutoff_zero_is_identity(self, grid100):
        T = t2_whitening(brownian_motion_eigensystem(grid100, 10), 0)
        np.testing.assert_array_equal(T.matrix, np.eye(100))

    def test_mode_past_cutoff_unchanged(self, grid512):
        es = brownian_motion_eigensystem(grid512, 200)
        T = t2_whitening(es, 50)
        e60 = es.vectors[59]
        np.testing.assert_allclose(T.apply_rows(e60[None])[0], e60, atol=1e-9)

    def test_cutoff_too_large(self, grid100):
        with pytest.raises(InvalidArgumentError):
            t2_whitening(brownian_motion_eigensystem(grid100, 10), 11)
