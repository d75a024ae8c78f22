"""Target measures: centred Gaussians ``N_C`` and Gibbs measures ``exp(-U) N_C``.

Every target exposes the drift ``x + C DU(x)`` consumed by the Stein kernel.
For Gaussian targets ``U = 0`` and the drift is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .fn_space import (
    EigenSystem,
    FunctionSample,
    Grid,
    GridOperator,
    as_values,
    integral_operator,
)

__all__ = [
    "GaussianTarget",
    "GibbsTarget",
    "Target",
    "DEFAULT_TRUNCATION",
    "brownian_motion_eigensystem",
    "brownian_bridge_eigensystem",
    "brownian_motion_target",
    "brownian_bridge_target",
    "sine_gibbs_target",
    "drift",
    "drift_rows",
    "cdu_rows",
]

DEFAULT_TRUNCATION = 200

# sine-potential conditioned SDE dX = 0.7 sin(X) dt + dB
SINE_DRIFT = 0.7


@dataclass(frozen=True)
class GaussianTarget:
    grid: Grid
    covariance_kernel: Callable
    C: GridOperator
    eigensystem: Optional[EigenSystem] = None
    label: str = "gaussian"


@dataclass(frozen=True)
class GibbsTarget:
    """``exp(-U) N_C`` with ``DU(x)(t) = du_pointwise(x(t))``."""

    base: GaussianTarget
    du_pointwise: Callable[[np.ndarray], np.ndarray]
    u: Optional[Callable[[FunctionSample], float]] = None
    label: str = "gibbs"

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def C(self) -> GridOperator:
        return self.base.C

    @property
    def eigensystem(self) -> Optional[EigenSystem]:
        return self.base.eigensystem

    def du(self, x: FunctionSample) -> FunctionSample:
        self.grid.check_same(x.grid)
        return FunctionSample(self.grid, self.du_pointwise(x.values))


Target = Union[GaussianTarget, GibbsTarget]


def brownian_motion_eigensystem(grid: Grid, count: int = DEFAULT_TRUNCATION) -> EigenSystem:
    i = np.arange(1, count + 1)
    lam = 1.0 / ((i - 0.5) * np.pi) ** 2
    return EigenSystem(grid, lam, lambda k, t: np.sqrt(2.0) * np.sin((k - 0.5) * np.pi * t))


def brownian_bridge_eigensystem(
    grid: Grid, horizon: float, count: int = DEFAULT_TRUNCATION
) -> EigenSystem:
    i = np.arange(1, count + 1)
    lam = (horizon / (i * np.pi)) ** 2
    scale = np.sqrt(2.0 / horizon)
    return EigenSystem(grid, lam, lambda k, t: scale * np.sin(k * np.pi * t / horizon))


def brownian_motion_target(grid: Grid, truncation: int = DEFAULT_TRUNCATION) -> GaussianTarget:
    def cov(s, t):
        return np.minimum(s, t)

    return GaussianTarget(
        grid=grid,
        covariance_kernel=cov,
        C=integral_operator(cov, grid),
        eigensystem=brownian_motion_eigensystem(grid, truncation),
        label="brownian_motion",
    )


def brownian_bridge_target(
    grid: Grid, horizon: float, truncation: int = DEFAULT_TRUNCATION
) -> GaussianTarget:
    horizon = float(horizon)

    def cov(s, t):
        return np.minimum(s, t) - s * t / horizon

    return GaussianTarget(
        grid=grid,
        covariance_kernel=cov,
        C=integral_operator(cov, grid),
        eigensystem=brownian_bridge_eigensystem(grid, horizon, truncation),
        label="brownian_bridge",
    )


def sine_potential_gradient(v):
    """Pointwise ``DU``: ``0.49 sin(v) cos(v) - 0.35 sin(v)``."""
    s = np.sin(v)
    return SINE_DRIFT**2 * s * np.cos(v) - 0.5 * SINE_DRIFT * s


def sine_gibbs_target(grid: Grid, truncation: int = DEFAULT_TRUNCATION) -> GibbsTarget:
    """Bridge diffusion ``dX = 0.7 sin(X) dt + dB`` pinned at ``X(0) = X(b) = 0``.

    The base measure is the Brownian bridge on the grid's interval.
    """
    base = brownian_bridge_target(grid, grid.b, truncation)
    w = grid.weights

    def u(x: FunctionSample) -> float:
        v = x.values
        integrand = SINE_DRIFT**2 * np.sin(v) ** 2 + SINE_DRIFT * np.cos(v)
        return 0.5 * float(np.sum(integrand * w))

    return GibbsTarget(base=base, du_pointwise=sine_potential_gradient, u=u, label="sine_gibbs")


def cdu_rows(target: Target, values: np.ndarray) -> np.ndarray:
    """``C DU(x)`` for each row; exact zeros for a Gaussian target."""
    values = np.atleast_2d(values)
    if isinstance(target, GaussianTarget):
        return np.zeros_like(values)
    return target.C.apply_rows(target.du_pointwise(values))


def drift_rows(target: Target, values: np.ndarray) -> np.ndarray:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if isinstance(target, GaussianTarget):
        return values
    return values + cdu_rows(target, values)


def drift(target: Target, x: FunctionSample) -> FunctionSample:
    """``x + C DU(x)``."""
    target.grid.check_same(x.grid)
    if isinstance(target, GaussianTarget):
        return x
    return FunctionSample(target.grid, drift_rows(target, as_values([x]))[0])
