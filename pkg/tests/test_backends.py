import os
import subprocess
import sys

import numpy as np
import pytest

from hilbert_ksd import _backend, _fallback
from hilbert_ksd.experiments import brownian_setting, median_context_builder
from hilbert_ksd.gof import make_rng
from hilbert_ksd.samplers import sample_bm

IMPLS = _backend.implementations()
needs_core = pytest.mark.skipif("compiled" not in IMPLS, reason="compiled core not built")


def _forms(seed, n):
    r = np.random.default_rng(seed)
    mats = []
    for _ in range(5):
        A = r.standard_normal((n, 7))
        mats.append(A @ A.T if len(mats) in (0, 3, 4) else A @ r.standard_normal((7, n)))
    return mats


def test_fallback_always_available():
    assert IMPLS["python"] is _fallback
    assert _backend.BACKEND in ("compiled", "python")


@needs_core
@pytest.mark.parametrize("family", [_backend.SE_CODE, _backend.IMQ_CODE])
@pytest.mark.parametrize("n", [1, 2, 17])
def test_gram_pairs_agree(family, n):
    bb, q, r, p, z = _forms(n, n)
    z = z / 10
    a = IMPLS["python"].stein_gram_pairs(family, bb, q, r, p, z, 0.3)
    b = np.asarray(IMPLS["compiled"].stein_gram_pairs(family, bb, q, r, p, z, 0.3))
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)
    assert np.array_equal(b, b.T)


@needs_core
@pytest.mark.parametrize("steps,batch", [(8, 1), (64, 500), (1024, 3000)])
def test_em_accept_agree(steps, batch):
    dt = 50.0 / steps
    inc = make_rng(steps).standard_normal((steps, batch)) * np.sqrt(dt)
    a = IMPLS["python"].em_sine_accept(inc, 0.0, dt, 0.7, 0.5)
    b = np.asarray(IMPLS["compiled"].em_sine_accept(inc, 0.0, dt, 0.7, 0.5))
    assert a.shape == b.shape and a.shape[1] == steps + 1
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


def test_em_accept_semantics():
    inc = np.zeros((4, 3))
    inc[:, 1] = 1.0  # path 1 ends far from zero
    out = _fallback.em_sine_accept(inc, 0.0, 0.5, 0.0, 0.1)
    assert out.shape == (2, 5) and not out.any()


def test_pure_switch_selects_fallback():
    env = dict(os.environ, HILBERT_KSD_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import hilbert_ksd; print(hilbert_ksd.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_core
def test_end_to_end_statistic_agrees():
    # same Gram through both backends inside a full context
    setting = brownian_setting(60)
    X = sample_bm(1, setting.grid, size=20)
    ctx = median_context_builder(setting, "IMQ", "T2")(X)
    from hilbert_ksd import stein

    H_core = stein.build_gram(ctx, X).entries
    saved = _backend.stein_gram_pairs
    try:
        _backend.stein_gram_pairs = _fallback.stein_gram_pairs
        H_py = stein.build_gram(ctx, X).entries
    finally:
        _backend.stein_gram_pairs = saved
    np.testing.assert_allclose(H_core, H_py, rtol=1e-10, atol=1e-12 * np.abs(H_py).max())
