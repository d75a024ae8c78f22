import numpy as np
import pytest

from hilbert_ksd.experiments import (
    BROWNIAN_EXPERIMENTS,
    CELLS,
    em_study,
    gibbs_setting,
    run_brownian_cell,
    run_brownian_table,
    run_gibbs_cell,
    run_gibbs_table,
)
from hilbert_ksd.gof import TestConfig


def test_experiment_registry():
    assert sorted(BROWNIAN_EXPERIMENTS) == [f"exp{i}" for i in range(1, 8)]
    assert [BROWNIAN_EXPERIMENTS[f"exp{i}"].n for i in range(1, 8)] == [50, 50, 25, 50, 50, 25, 25]


def test_table_matches_cells(bsetting):
    cfg = TestConfig(200, 0.05, 9)
    table = run_brownian_table(["exp7"], CELLS, 3, cfg, setting=bsetting)
    for fam, tc in CELLS:
        single = run_brownian_cell("exp7", fam, tc, 3, cfg, setting=bsetting)
        assert table[("exp7", fam, tc)] == single


def test_gibbs_table_matches_cells():
    setting = gibbs_setting(65)
    cfg = TestConfig(100, 0.05, 2)
    table = run_gibbs_table([0.0, 0.2], [("IMQ", "T2")], 2, cfg, n=10, setting=setting, em_steps=64)
    for d in (0.0, 0.2):
        single = run_gibbs_cell(d, "IMQ", "T2", 2, cfg, n=10, setting=setting, em_steps=64)
        assert table[(d, "IMQ", "T2")] == single


def test_gibbs_t2_uses_bridge_basis():
    s = gibbs_setting(129)
    es = s.target.eigensystem
    assert es.eigenvalues[0] == pytest.approx((50 / np.pi) ** 2)
    e1 = es.vectors[0]
    np.testing.assert_allclose(s.operators["T2"].apply_rows(e1[None])[0], e1 / es.eigenvalues[0],
                               rtol=1e-8, atol=1e-12)


def test_em_study_shape():
    out = em_study(steps=(4, 8), n=20, m=33, seed=1)
    assert [s for s, _ in out] == [4, 8]
    assert all(v >= 0 for _, v in out)
