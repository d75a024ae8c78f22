"""SE-T and IMQ-T kernels, the median-heuristic bandwidth and T2 whitening."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DegenerateBandwidthError, InvalidArgumentError
from .fn_space import (
    EigenSystem,
    FunctionSample,
    Grid,
    GridOperator,
    adjoint,
    as_values,
    compose,
    rank_update_operator,
)

__all__ = [
    "KernelFamily",
    "KernelConfig",
    "kernel_eval",
    "kernel_from_sqdist",
    "transform_rows",
    "pairwise_sqdist",
    "median_bandwidth",
    "median_of_distances",
    "t2_whitening",
]


class KernelFamily(str, Enum):
    SE = "SE"
    IMQ = "IMQ"

    @classmethod
    def parse(cls, value) -> "KernelFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise InvalidArgumentError(f"unknown kernel family {value!r}") from None


@dataclass(frozen=True)
class KernelConfig:
    """Kernel ``k(x, y) = f(||Tx - Ty||^2 / gamma^2)``.

    ``T=None`` stands for the identity operator.
    """

    family: KernelFamily
    T: Optional[GridOperator] = None
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily.parse(self.family))
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidArgumentError(f"bandwidth must be positive, got {self.gamma}")

    def with_gamma(self, gamma: float) -> "KernelConfig":
        return KernelConfig(self.family, self.T, gamma)

    def S_matrix(self, grid: Grid) -> Optional[np.ndarray]:
        """Matrix of ``gamma^-2 T* T``; ``None`` means ``gamma^-2 I``."""
        if self.T is None:
            return None
        self.T.grid.check_same(grid)
        return compose(adjoint(self.T), self.T).matrix / self.gamma**2


def kernel_from_sqdist(family: KernelFamily, sqdist):
    """Kernel value from the bandwidth-scaled squared distance."""
    if family is KernelFamily.SE:
        return np.exp(-0.5 * sqdist)
    return 1.0 / np.sqrt(sqdist + 1.0)


def transform_rows(T: Optional[GridOperator], values: np.ndarray) -> np.ndarray:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return values if T is None else T.apply_rows(values)


def kernel_eval(cfg: KernelConfig, x: FunctionSample, y: FunctionSample) -> float:
    x.grid.check_same(y.grid)
    if cfg.T is not None:
        cfg.T.grid.check_same(x.grid)
        d = cfg.T.matrix @ (x.values - y.values)
    else:
        d = x.values - y.values
    sq = float(np.sum(d * d * x.grid.weights)) / cfg.gamma**2
    return float(kernel_from_sqdist(cfg.family, sq))


def pairwise_sqdist(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted squared distances between all rows, symmetric with zero diagonal."""
    gram = (values * weights) @ values.T
    diag = np.diag(gram)
    sq = diag[:, None] + diag[None, :] - gram - gram.T
    np.fill_diagonal(sq, 0.0)
    return np.maximum(sq, 0.0)


def median_of_distances(distances) -> float:
    """Median with the mean-of-middle-pair convention for even counts."""
    d = np.sort(np.asarray(distances, dtype=float).ravel())
    if d.size == 0:
        raise InvalidArgumentError("no distances to take the median of")
    k = d.size // 2
    return float(d[k]) if d.size % 2 else float(0.5 * (d[k - 1] + d[k]))


def median_bandwidth(samples, T: Optional[GridOperator] = None, grid: Optional[Grid] = None) -> float:
    """Median of ``||T X_i - T X_j||`` over unordered pairs ``i < j``."""
    if grid is None:
        if isinstance(samples, np.ndarray):
            if T is None:
                raise InvalidArgumentError("a grid is needed for raw sample arrays")
            grid = T.grid
        else:
            grid = list(samples)[0].grid
    X = as_values(samples, grid)
    if X.shape[0] < 2:
        raise InvalidArgumentError("median heuristic needs at least two samples")
    Z = transform_rows(T, X)
    sq = pairwise_sqdist(Z, grid.weights)
    iu = np.triu_indices(X.shape[0], k=1)
    gamma = median_of_distances(np.sqrt(sq[iu]))
    if not gamma > 0:
        raise DegenerateBandwidthError("median pairwise distance is zero")
    return gamma


def t2_whitening(eigsys: EigenSystem, cutoff: int = 50) -> GridOperator:
    """Multiply the first ``cutoff`` eigendirections by ``1 / lambda_i``."""
    if cutoff < 0 or cutoff > eigsys.count:
        raise InvalidArgumentError(
            f"cutoff {cutoff} outside 0..{eigsys.count} available eigenpairs"
        )
    return rank_update_operator(None, eigsys, 1.0 / eigsys.eigenvalues[:cutoff])
