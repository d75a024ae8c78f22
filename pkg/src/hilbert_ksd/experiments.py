"""Experiment presets: Brownian-motion target, sine Gibbs target, EM study.

These wire samplers, targets and kernels together the same way for the CLI,
the benchmark script and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fn_space import Grid, GridOperator, make_uniform_grid
from .gof import PowerStudyResult, TestConfig, power_study, power_study_many, substream
from .kernels import KernelConfig, KernelFamily, median_bandwidth, t2_whitening
from .samplers import (
    sample_bm,
    sample_clipped_bm,
    sample_conditioned_sde,
    sample_mean_shift,
    sample_ou,
    sample_scaled,
)
from .stein import SteinContext, build_gram, make_context, v_statistic
from .targets import Target, brownian_motion_target, sine_gibbs_target

__all__ = [
    "Setting",
    "BrownianExperiment",
    "BROWNIAN_EXPERIMENTS",
    "CELLS",
    "T2_CUTOFF",
    "brownian_setting",
    "gibbs_setting",
    "median_context_builder",
    "run_brownian_cell",
    "run_gibbs_cell",
    "run_brownian_table",
    "run_gibbs_table",
    "TABLE3_DELTAS",
    "gibbs_sampler",
    "em_study",
]

T2_CUTOFF = 50
GIBBS_HORIZON = 50.0
GIBBS_EM_STEPS = 1024

TABLE3_DELTAS = (0.0, 0.05, 0.1, 0.15, 0.2)

CELLS: Tuple[Tuple[str, str], ...] = (("SE", "T1"), ("SE", "T2"), ("IMQ", "T1"), ("IMQ", "T2"))


@dataclass(frozen=True)
class Setting:
    grid: Grid
    target: Target
    operators: Dict[str, Optional[GridOperator]]

    def kernel(self, family, t_choice: str, gamma: float = 1.0) -> KernelConfig:
        return KernelConfig(KernelFamily.parse(family), self.operators[t_choice.upper()], gamma)


def brownian_setting(m: int = 100) -> Setting:
    grid = make_uniform_grid(0.0, 1.0, m)
    target = brownian_motion_target(grid)
    T2 = t2_whitening(target.eigensystem, T2_CUTOFF)
    return Setting(grid, target, {"T1": None, "T2": T2})


def gibbs_setting(m: int = 129) -> Setting:
    """Sine Gibbs target on ``[0, 50]``; T2 whitens the bridge eigenbasis."""
    grid = make_uniform_grid(0.0, GIBBS_HORIZON, m)
    target = sine_gibbs_target(grid)
    T2 = t2_whitening(target.eigensystem, T2_CUTOFF)
    return Setting(grid, target, {"T1": None, "T2": T2})


def median_context_builder(
    setting: Setting, family, t_choice: str
) -> Callable[[np.ndarray], SteinContext]:
    """Context builder that picks the bandwidth by the median heuristic."""
    base = setting.kernel(family, t_choice)

    def build(X: np.ndarray) -> SteinContext:
        gamma = median_bandwidth(X, base.T, setting.grid)
        return make_context(setting.target, base.with_gamma(gamma))

    return build


@dataclass(frozen=True)
class BrownianExperiment:
    name: str
    n: int
    description: str
    draw: Callable[[np.random.Generator, Grid, int], np.ndarray]


BROWNIAN_EXPERIMENTS: Dict[str, BrownianExperiment] = {
    e.name: e
    for e in [
        BrownianExperiment("exp1", 50, "Brownian motion (null)",
                           lambda rng, g, n: sample_bm(rng, g, size=n)),
        BrownianExperiment("exp2", 50, "Brownian motion clipped to 5 frequencies",
                           lambda rng, g, n: sample_clipped_bm(rng, g, 5, size=n)),
        BrownianExperiment("exp3", 25, "OU dX = 0.5(5 - X)dt + dB",
                           lambda rng, g, n: sample_ou(rng, g, size=n)),
        BrownianExperiment("exp4", 50, "(1 + t^2) B_t",
                           lambda rng, g, n: sample_scaled(rng, g, lambda t: 1.0 + t**2, size=n)),
        BrownianExperiment("exp5", 50, "(1 + sin(2 pi t)) B_t",
                           lambda rng, g, n: sample_scaled(
                               rng, g, lambda t: 1.0 + np.sin(2.0 * np.pi * t), size=n)),
        BrownianExperiment("exp6", 25, "2 B_t",
                           lambda rng, g, n: sample_scaled(rng, g, lambda t: 2.0 + 0.0 * t, size=n)),
        BrownianExperiment("exp7", 25, "B_t + 1.5 t (t - 1)",
                           lambda rng, g, n: sample_mean_shift(rng, g, size=n)),
    ]
}


def run_brownian_cell(
    experiment: str,
    family,
    t_choice: str,
    repetitions: int,
    cfg: TestConfig,
    n: Optional[int] = None,
    setting: Optional[Setting] = None,
    n_jobs: int = 1,
) -> PowerStudyResult:
    """Power study for one (experiment, kernel, T) cell.

    Sample sets depend only on ``(cfg.seed, repetition)``, so all cells of a
    table see the same data.
    """
    setting = setting or brownian_setting()
    exp = BROWNIAN_EXPERIMENTS[experiment]
    n = exp.n if n is None else n

    def sampler(rng):
        return exp.draw(rng, setting.grid, n)

    builder = median_context_builder(setting, family, t_choice)
    return power_study(sampler, builder, cfg, repetitions, n_jobs=n_jobs, detail=True)


def gibbs_sampler(setting: Setting, n: int, delta: float, em_steps: int = GIBBS_EM_STEPS,
                  eps: float = 0.1):
    def sampler(rng):
        return sample_conditioned_sde(rng, setting.grid, em_steps, eps, delta, size=n)

    return sampler


def run_gibbs_cell(
    delta: float,
    family,
    t_choice: str,
    repetitions: int,
    cfg: TestConfig,
    n: int = 100,
    setting: Optional[Setting] = None,
    em_steps: int = GIBBS_EM_STEPS,
    n_jobs: int = 1,
) -> PowerStudyResult:
    setting = setting or gibbs_setting()
    builder = median_context_builder(setting, family, t_choice)
    return power_study(gibbs_sampler(setting, n, delta, em_steps), builder, cfg,
                       repetitions, n_jobs=n_jobs, detail=True)


def run_brownian_table(
    experiments: Sequence[str],
    cells: Sequence[Tuple[str, str]],
    repetitions: int,
    cfg: TestConfig,
    n: Optional[int] = None,
    setting: Optional[Setting] = None,
    n_jobs: int = 1,
) -> Dict[Tuple[str, str, str], PowerStudyResult]:
    """Every requested cell for each experiment, sharing sample sets."""
    setting = setting or brownian_setting()
    out = {}
    for name in experiments:
        exp = BROWNIAN_EXPERIMENTS[name]
        size = exp.n if n is None else n

        def sampler(rng, exp=exp, size=size):
            return exp.draw(rng, setting.grid, size)

        cases = {}
        for fam, tc in cells:
            builder = median_context_builder(setting, fam, tc)
            cases[(name, fam, tc)] = lambda X, b=builder: (X, b(X))
        out.update(power_study_many(sampler, cases, cfg, repetitions, n_jobs))
    return out


def run_gibbs_table(
    deltas: Sequence[float],
    cells: Sequence[Tuple[str, str]],
    repetitions: int,
    cfg: TestConfig,
    n: int = 100,
    setting: Optional[Setting] = None,
    em_steps: int = GIBBS_EM_STEPS,
    eps: float = 0.1,
    n_jobs: int = 1,
) -> Dict[Tuple[float, str, str], PowerStudyResult]:
    """Gibbs-target table; the drifted sets reuse each repetition's null paths.

    Equivalent to calling :func:`run_gibbs_cell` per (delta, cell) with the
    same ``cfg``, because the drift is added after sampling.
    """
    setting = setting or gibbs_setting()
    ramp = setting.grid.points / setting.grid.b
    cases = {}
    for delta in deltas:
        for fam, tc in cells:
            builder = median_context_builder(setting, fam, tc)

            def case(X, b=builder, d=float(delta)):
                Y = X + d * ramp if d else X
                return Y, b(Y)

            cases[(float(delta), fam, tc)] = case
    return power_study_many(gibbs_sampler(setting, n, 0.0, em_steps, eps), cases, cfg,
                            repetitions, n_jobs)


def em_study(
    steps: Sequence[int] = (5, 10, 15, 20, 25),
    n: int = 2000,
    family="IMQ",
    t_choice: str = "T2",
    gamma: float = 1.0,
    m: int = 100,
    seed: int = 0,
    eps: float = 0.1,
) -> List[Tuple[int, float]]:
    """V-statistic KSD of accepted EM trajectories for each step count."""
    setting = gibbs_setting(m)
    ctx = make_context(setting.target, setting.kernel(family, t_choice, gamma))
    out = []
    for i, k in enumerate(steps):
        X = sample_conditioned_sde(substream(seed, i), setting.grid, int(k), eps, 0.0,
                                   max_attempts=10**8, size=n)
        out.append((int(k), v_statistic(build_gram(ctx, X))))
    return out
