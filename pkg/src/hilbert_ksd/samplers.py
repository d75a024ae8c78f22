"""Seeded generators for the candidate measures used in the experiments.

Every sampler takes ``seed`` (an int, ``SeedSequence`` or ``Generator``) and an
optional ``size``; with ``size=None`` it returns one :class:`FunctionSample`,
otherwise an ``(size, m)`` array of grid values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import _backend
from .errors import AcceptanceFailureError, InvalidArgumentError
from .fn_space import FunctionSample, Grid, make_uniform_grid
from .gof import make_rng
from .targets import SINE_DRIFT, brownian_motion_eigensystem

__all__ = [
    "SamplerKind",
    "SamplerSpec",
    "interpolate_linear",
    "interp_rows",
    "sample_bm",
    "sample_clipped_bm",
    "sample_ou",
    "sample_scaled",
    "sample_mean_shift",
    "sample_conditioned_sde",
    "conditioned_sde_paths",
]


def _wrap(grid: Grid, values: np.ndarray, size):
    if size is None:
        return FunctionSample(grid, values[0])
    return values


def _n(size) -> int:
    n = 1 if size is None else int(size)
    if n < 0:
        raise InvalidArgumentError("size must be non-negative")
    return n


def interp_rows(values: np.ndarray, src: Grid, dst: Grid) -> np.ndarray:
    """Piecewise-linear interpolation of each row from ``src`` onto ``dst``."""
    tol = 1e-12 * max(1.0, abs(src.a), abs(src.b))
    if dst.a < src.a - tol or dst.b > src.b + tol:
        raise InvalidArgumentError(
            f"target span [{dst.a}, {dst.b}] not covered by [{src.a}, {src.b}]"
        )
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] != src.m:
        raise InvalidArgumentError(
            f"paths have {values.shape[1]} points, source grid has {src.m}"
        )
    if src == dst:
        return values.copy()
    pos = (dst.points - src.a) / src.spacing
    pos = np.clip(pos, 0.0, src.m - 1)
    left = np.minimum(np.floor(pos).astype(int), src.m - 2)
    frac = pos - left
    # snap onto source nodes to avoid round-off drift at coincident points
    on_node = np.isclose(frac, np.round(frac), atol=1e-9)
    frac = np.where(on_node, np.round(frac), frac)
    return values[:, left] * (1.0 - frac) + values[:, left + 1] * frac


def interpolate_linear(path, sim_grid: Grid, out_grid: Grid) -> FunctionSample:
    vals = path.values if isinstance(path, FunctionSample) else np.asarray(path)
    return FunctionSample(out_grid, interp_rows(vals, sim_grid, out_grid)[0])


def _bm_values(rng: np.random.Generator, grid: Grid, n: int) -> np.ndarray:
    dt = np.diff(grid.points)
    inc = rng.standard_normal((n, grid.m - 1)) * np.sqrt(dt)
    out = np.zeros((n, grid.m))
    np.cumsum(inc, axis=1, out=out[:, 1:])
    return out


def sample_bm(seed, grid: Grid, size: Optional[int] = None):
    """Brownian motion started at 0, exact Gaussian increments on the grid."""
    rng = make_rng(seed)
    return _wrap(grid, _bm_values(rng, grid, _n(size)), size)


def sample_clipped_bm(seed, grid: Grid, n_freq: int = 5, size: Optional[int] = None):
    """``sum_{i <= n_freq} sqrt(lambda_i) xi_i e_i`` in the Brownian eigenbasis."""
    rng = make_rng(seed)
    n = _n(size)
    if n_freq < 0:
        raise InvalidArgumentError("n_freq must be non-negative")
    if n_freq == 0:
        return _wrap(grid, np.zeros((n, grid.m)), size)
    es = brownian_motion_eigensystem(grid, n_freq)
    xi = rng.standard_normal((n, n_freq))
    return _wrap(grid, (xi * np.sqrt(es.eigenvalues)) @ es.vectors, size)


def sample_ou(
    seed,
    grid: Grid,
    theta: float = 0.5,
    mu: float = 5.0,
    x0: float = 0.0,
    sim_steps: int = 1000,
    noise_scale: float = 1.0,
    size: Optional[int] = None,
):
    """Euler-Maruyama for ``dX = theta (mu - X) dt + dB``, interpolated to ``grid``."""
    rng = make_rng(seed)
    n = _n(size)
    sim = make_uniform_grid(grid.a, grid.b, sim_steps + 1)
    dt = sim.spacing
    noise = rng.standard_normal((n, sim_steps)) * (np.sqrt(dt) * noise_scale)
    paths = np.empty((n, sim_steps + 1))
    x = np.full(n, float(x0))
    paths[:, 0] = x
    for k in range(sim_steps):
        x = x + theta * (mu - x) * dt + noise[:, k]
        paths[:, k + 1] = x
    return _wrap(grid, interp_rows(paths, sim, grid), size)


def sample_scaled(seed, grid: Grid, scale_fn: Callable, size: Optional[int] = None):
    """Brownian motion multiplied pointwise by ``scale_fn(t)``."""
    rng = make_rng(seed)
    scale = np.broadcast_to(np.asarray(scale_fn(grid.points), float), (grid.m,))
    return _wrap(grid, _bm_values(rng, grid, _n(size)) * scale, size)


def sample_mean_shift(seed, grid: Grid, size: Optional[int] = None):
    """``B_t + 1.5 t (t - 1)``."""
    rng = make_rng(seed)
    t = grid.points
    return _wrap(grid, _bm_values(rng, grid, _n(size)) + 1.5 * t * (t - 1.0), size)


def conditioned_sde_paths(
    rng: np.random.Generator,
    n: int,
    em_steps: int,
    horizon: float = 50.0,
    eps: float = 0.1,
    coef: float = SINE_DRIFT,
    noise_scale: float = 1.0,
    max_attempts: int = 10**6,
    batch: int = 4096,
    stats: Optional[dict] = None,
) -> np.ndarray:
    """``n`` accepted Euler-Maruyama paths on the ``em_steps + 1`` point grid.

    Paths start at 0 and are kept when ``|X(horizon)| < eps``. Batches of
    Brownian increments are drawn from ``rng`` and integrated by the selected
    backend; accepted paths are returned in draw order. ``max_attempts`` caps
    the total number of simulated paths.
    """
    if em_steps < 2:
        raise InvalidArgumentError(f"em_steps must be >= 2, got {em_steps}")
    dt = horizon / em_steps
    sd = np.sqrt(dt) * noise_scale
    chunks = []
    got = 0
    attempts = 0
    while got < n:
        if attempts >= max_attempts:
            raise AcceptanceFailureError(
                f"accepted {got}/{n} paths after {attempts} attempts (eps={eps})"
            )
        b = min(batch, max_attempts - attempts)
        inc = rng.standard_normal((em_steps, b))
        inc *= sd
        acc = _backend.em_sine_accept(inc, 0.0, dt, coef, eps)
        attempts += b
        if len(acc):
            chunks.append(acc[: n - got])
            got += len(chunks[-1])
    if stats is not None:
        stats["attempts"] = attempts
        stats["accepted"] = got
    if not chunks:
        return np.empty((0, em_steps + 1))
    return np.concatenate(chunks)


def sample_conditioned_sde(
    seed,
    out_grid: Grid,
    em_steps: int = 1024,
    eps: float = 0.1,
    delta: float = 0.0,
    coef: float = SINE_DRIFT,
    noise_scale: float = 1.0,
    max_attempts: int = 10**6,
    size: Optional[int] = None,
):
    """Conditioned sine SDE by Euler-Maruyama with endpoint accept/reject.

    Accepted paths are linearly interpolated onto ``out_grid`` (which starts
    at 0) and shifted by the deterministic drift ``delta t / horizon``.
    """
    rng = make_rng(seed)
    n = _n(size)
    horizon = out_grid.b
    sim = make_uniform_grid(0.0, horizon, em_steps + 1)
    paths = conditioned_sde_paths(
        rng, n, em_steps, horizon, eps, coef, noise_scale, max_attempts
    )
    vals = interp_rows(paths, sim, out_grid) if n else np.zeros((0, out_grid.m))
    if delta:
        vals = vals + delta * out_grid.points / horizon
    return _wrap(out_grid, vals, size)


class SamplerKind(str, Enum):
    BM = "BM"
    ClippedBM = "ClippedBM"
    OU = "OU"
    ScaledBM = "ScaledBM"
    TwoBM = "TwoBM"
    MeanShiftBM = "MeanShiftBM"
    ConditionedSDE = "ConditionedSDE"
    DriftedConditionedSDE = "DriftedConditionedSDE"


_SCALES = {
    "quadratic": lambda t: 1.0 + t**2,
    "sine": lambda t: 1.0 + np.sin(2.0 * np.pi * t),
    "double": lambda t: np.full_like(t, 2.0),
}


@dataclass(frozen=True)
class SamplerSpec:
    """A candidate measure ``Q`` together with its simulation settings."""

    kind: SamplerKind
    out_grid: Grid
    params: dict = field(default_factory=dict)
    sim_grid: Optional[Grid] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SamplerKind(self.kind))
        if self.sim_grid is not None and self.sim_grid.m < self.out_grid.m:
            raise InvalidArgumentError("simulation grid coarser than observation grid")

    def draw(self, rng, n: int) -> np.ndarray:
        p = self.params
        g = self.out_grid
        k = self.kind
        if k is SamplerKind.BM:
            return sample_bm(rng, g, size=n)
        if k is SamplerKind.ClippedBM:
            return sample_clipped_bm(rng, g, p.get("n_freq", 5), size=n)
        if k is SamplerKind.OU:
            steps = self.sim_grid.m - 1 if self.sim_grid is not None else 1000
            return sample_ou(
                rng, g, p.get("theta", 0.5), p.get("mu", 5.0), p.get("x0", 0.0),
                sim_steps=steps, size=n,
            )
        if k is SamplerKind.ScaledBM:
            scale = p.get("scale", "quadratic")
            fn = _SCALES[scale] if isinstance(scale, str) else scale
            return sample_scaled(rng, g, fn, size=n)
        if k is SamplerKind.TwoBM:
            return sample_scaled(rng, g, _SCALES["double"], size=n)
        if k is SamplerKind.MeanShiftBM:
            return sample_mean_shift(rng, g, size=n)
        steps = self.sim_grid.m - 1 if self.sim_grid is not None else 1024
        delta = p.get("delta", 0.0) if k is SamplerKind.DriftedConditionedSDE else 0.0
        return sample_conditioned_sde(
            rng, g, steps, p.get("eps", 0.1), delta, size=n
        )
