"""Multinomial-bootstrap goodness-of-fit test and Monte Carlo power studies.

Random streams
--------------
Every generator is a Philox counter-based bit generator keyed by a
:class:`numpy.random.SeedSequence`. For a run seeded with ``seed``:

* ``run_test`` draws its bootstrap weights from ``SeedSequence(seed)``.
* repetition ``r`` of ``power_study`` samples data from
  ``SeedSequence(seed, spawn_key=(r, 0))`` and bootstraps from
  ``SeedSequence(seed, spawn_key=(r, 1))``.

Substreams depend only on ``(seed, r)``, so repetitions can run in any order
or in parallel and reproduce the serial result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .stein import SteinContext, SteinGram, build_gram, u_statistic

__all__ = [
    "TestConfig",
    "TestResult",
    "PowerStudyResult",
    "make_rng",
    "substream",
    "bootstrap_replicate",
    "bootstrap_replicates",
    "multinomial_weights",
    "bootstrap_threshold",
    "run_test",
    "test_from_gram",
    "power_study",
    "power_study_many",
]


def make_rng(seed) -> np.random.Generator:
    """Philox generator from an int seed or a ``SeedSequence``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def substream(seed: int, *key: int) -> np.random.Generator:
    return make_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class TestConfig:
    n_bootstrap: int = 2000
    alpha: float = 0.05
    seed: int = 0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if int(self.n_bootstrap) != self.n_bootstrap or self.n_bootstrap < 1:
            raise InvalidArgumentError(f"n_bootstrap must be >= 1, got {self.n_bootstrap}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    replicates: np.ndarray = field(repr=False)
    threshold: float
    reject: bool
    gamma_used: float

    __test__ = False

    def __eq__(self, other):
        if not isinstance(other, TestResult):
            return NotImplemented
        return (
            self.statistic == other.statistic
            and self.threshold == other.threshold
            and self.reject == other.reject
            and self.gamma_used == other.gamma_used
            and np.array_equal(self.replicates, other.replicates)
        )


def _check_weights(n: int, w: np.ndarray) -> None:
    if w.shape[-1] != n:
        raise InvalidArgumentError(f"expected {n} weights, got {w.shape[-1]}")
    if np.any(w < 0) or np.any(w != np.round(w)):
        raise InvalidArgumentError("bootstrap weights must be non-negative integers")
    if np.any(w.sum(axis=-1) != n):
        raise InvalidArgumentError(f"bootstrap weights must sum to n={n}")


def bootstrap_replicate(gram: SteinGram, weights: Sequence[int]) -> float:
    """``n^-2 sum_{i != j} (w_i - 1)(w_j - 1) H[i, j]``."""
    w = np.asarray(weights, dtype=float)
    _check_weights(gram.n, w)
    H = gram.entries
    c = w - 1.0
    return float((c @ H @ c - np.sum(c * c * np.diag(H))) / gram.n**2)


def bootstrap_replicates(gram: SteinGram, weights: np.ndarray) -> np.ndarray:
    """Vectorised :func:`bootstrap_replicate` over the rows of ``weights``."""
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    _check_weights(gram.n, W)
    H = gram.entries
    c = W - 1.0
    quad = np.einsum("bi,bi->b", c @ H, c)
    diag = (c * c) @ np.diag(H)
    return (quad - diag) / gram.n**2


def multinomial_weights(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """``size`` draws of ``Multinomial(n; 1/n, ..., 1/n)``."""
    return rng.multinomial(n, np.full(n, 1.0 / n), size=size)


def bootstrap_threshold(replicates: np.ndarray, alpha: float) -> float:
    """Order statistic ``ceil((1 - alpha) B)`` (1-based) of the replicates."""
    r = np.sort(np.asarray(replicates, dtype=float))
    B = r.size
    k = max(1, min(B, math.ceil((1.0 - alpha) * B - 1e-12)))
    return float(r[k - 1])


def test_from_gram(gram: SteinGram, cfg: TestConfig, rng=None, gamma_used: float = float("nan")) -> TestResult:
    rng = make_rng(cfg.seed) if rng is None else rng
    stat = u_statistic(gram)
    W = multinomial_weights(rng, gram.n, cfg.n_bootstrap)
    reps = bootstrap_replicates(gram, W)
    thr = bootstrap_threshold(reps, cfg.alpha)
    return TestResult(stat, reps, thr, bool(stat > thr), float(gamma_used))


test_from_gram.__test__ = False


def run_test(samples, ctx: SteinContext, cfg: TestConfig, rng=None) -> TestResult:
    """Bootstrap KSD test of ``samples`` against ``ctx.target``."""
    gram = build_gram(ctx, samples)
    if gram.n < 2:
        raise InvalidArgumentError("the test needs at least two samples")
    return test_from_gram(gram, cfg, rng, ctx.kernel.gamma)


@dataclass
class PowerStudyResult:
    rejections: List[bool]
    statistics: List[float]
    thresholds: List[float]
    gammas: List[float]

    @property
    def rate(self) -> float:
        return float(np.mean(self.rejections))

    @property
    def repetitions(self) -> int:
        return len(self.rejections)


def power_study(
    sampler: Callable[[np.random.Generator], np.ndarray],
    ctx_builder: Callable[[np.ndarray], SteinContext],
    cfg: TestConfig,
    repetitions: int,
    n_jobs: int = 1,
    detail: bool = False,
):
    """Rejection rate over ``repetitions`` independent tests.

    ``sampler(rng)`` returns one sample set; ``ctx_builder(samples)`` builds
    the Stein context for it, typically choosing the bandwidth with the
    median heuristic. Returns the rate, or a :class:`PowerStudyResult` when
    ``detail`` is true.
    """
    if int(repetitions) != repetitions or repetitions < 1:
        raise InvalidArgumentError(f"repetitions must be >= 1, got {repetitions}")

    def one(r: int) -> TestResult:
        X = sampler(substream(cfg.seed, r, 0))
        ctx = ctx_builder(X)
        return run_test(X, ctx, cfg, rng=substream(cfg.seed, r, 1))

    if n_jobs == 1:
        results = [one(r) for r in range(repetitions)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, range(repetitions)))
    out = PowerStudyResult(
        rejections=[res.reject for res in results],
        statistics=[res.statistic for res in results],
        thresholds=[res.threshold for res in results],
        gammas=[res.gamma_used for res in results],
    )
    return out if detail else out.rate


def power_study_many(
    sampler: Callable[[np.random.Generator], np.ndarray],
    cases,
    cfg: TestConfig,
    repetitions: int,
    n_jobs: int = 1,
):
    """Several power studies that share one sample set per repetition.

    ``cases`` maps a key to ``case(X) -> (samples, ctx)``. Each case uses the
    same substreams as :func:`power_study`, so a single case reproduces the
    stand-alone study exactly. Returns a dict of :class:`PowerStudyResult`.
    """
    if int(repetitions) != repetitions or repetitions < 1:
        raise InvalidArgumentError(f"repetitions must be >= 1, got {repetitions}")
    keys = list(cases)

    def one(r: int):
        X = sampler(substream(cfg.seed, r, 0))
        out = []
        for key in keys:
            Y, ctx = cases[key](X)
            out.append(run_test(Y, ctx, cfg, rng=substream(cfg.seed, r, 1)))
        return out

    if n_jobs == 1:
        per_rep = [one(r) for r in range(repetitions)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            per_rep = list(pool.map(one, range(repetitions)))
    result = {}
    for c, key in enumerate(keys):
        res = [row[c] for row in per_rep]
        result[key] = PowerStudyResult(
            rejections=[x.reject for x in res],
            statistics=[x.statistic for x in res],
            thresholds=[x.threshold for x in res],
            gammas=[x.gamma_used for x in res],
        )
    return result
