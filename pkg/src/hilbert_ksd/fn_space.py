"""Discretised calculus on L^2([a, b]).

Functions are represented by their values on a uniform grid, inner products
use trapezoid weights and bounded linear operators are plain ``m x m``
matrices acting on grid values, ``(A f)(t_i) = sum_j A[i, j] f(t_j)``.
Adjoints, traces and compositions are all taken with respect to the weighted
inner product ``<f, g> = sum_i w_i f_i g_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import IncompatibleGridError, InvalidArgumentError, NumericError

__all__ = [
    "Grid",
    "FunctionSample",
    "GridOperator",
    "EigenSystem",
    "make_uniform_grid",
    "inner",
    "norm",
    "integral_operator",
    "identity_operator",
    "zero_operator",
    "rank_update_operator",
    "compose",
    "adjoint",
    "op_trace",
    "as_values",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[a, b]`` with ``m`` points, endpoints included."""

    a: float
    b: float
    m: int
    points: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise InvalidArgumentError(f"grid needs at least 2 points, got m={self.m}")
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a >= self.b:
            raise InvalidArgumentError(f"grid needs a < b, got a={self.a}, b={self.b}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "m", int(self.m))
        points = np.linspace(self.a, self.b, self.m)
        h = (self.b - self.a) / (self.m - 1)
        weights = np.full(self.m, h)
        weights[0] = weights[-1] = 0.5 * h
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.m - 1)

    @property
    def length(self) -> float:
        return self.b - self.a

    def check_same(self, other: "Grid") -> None:
        if self != other:
            raise IncompatibleGridError(f"grid mismatch: {self} vs {other}")


def make_uniform_grid(a: float, b: float, m: int) -> Grid:
    return Grid(a, b, m)


@dataclass(frozen=True)
class FunctionSample:
    """A real function observed on ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.m,):
            raise InvalidArgumentError(
                f"expected {self.grid.m} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NumericError("function sample has non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, np.broadcast_to(fn(grid.points), (grid.m,)).astype(float))

    def __add__(self, other):
        if isinstance(other, FunctionSample):
            self.grid.check_same(other.grid)
            return FunctionSample(self.grid, self.values + other.values)
        return FunctionSample(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, FunctionSample):
            self.grid.check_same(other.grid)
            return FunctionSample(self.grid, self.values - other.values)
        return FunctionSample(self.grid, self.values - other)

    def __mul__(self, scalar):
        return FunctionSample(self.grid, self.values * scalar)

    __rmul__ = __mul__


Samples = Union[Sequence[FunctionSample], np.ndarray]


def as_values(samples: Samples, grid: Grid | None = None) -> np.ndarray:
    """Stack samples into an ``(n, m)`` array, checking the grid if given."""
    if isinstance(samples, FunctionSample):
        samples = [samples]
    if isinstance(samples, np.ndarray):
        arr = np.atleast_2d(np.asarray(samples, dtype=float))
        if grid is not None and arr.shape[1] != grid.m:
            raise IncompatibleGridError(
                f"sample arrays have {arr.shape[1]} columns, grid has {grid.m} points"
            )
        return arr
    samples = list(samples)
    if not samples:
        return np.empty((0, grid.m if grid is not None else 0))
    ref = grid if grid is not None else samples[0].grid
    for s in samples:
        ref.check_same(s.grid)
    return np.stack([s.values for s in samples])


def inner(f: FunctionSample, g: FunctionSample) -> float:
    f.grid.check_same(g.grid)
    return float(np.sum(f.values * g.values * f.grid.weights))


def norm(f: FunctionSample) -> float:
    return float(np.sqrt(max(inner(f, f), 0.0)))


@dataclass(frozen=True)
class GridOperator:
    """Bounded linear operator on grid functions, stored as its action matrix."""

    grid: Grid
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (self.grid.m, self.grid.m):
            raise InvalidArgumentError(
                f"operator matrix must be {self.grid.m}x{self.grid.m}, got {mat.shape}"
            )
        if not np.all(np.isfinite(mat)):
            raise NumericError("operator matrix has non-finite entries")
        object.__setattr__(self, "matrix", mat)

    def __call__(self, f: FunctionSample) -> FunctionSample:
        self.grid.check_same(f.grid)
        return FunctionSample(self.grid, self.matrix @ f.values)

    def apply_rows(self, values: np.ndarray) -> np.ndarray:
        """Apply to every row of an ``(n, m)`` array of grid values."""
        return np.asarray(values, dtype=float) @ self.matrix.T

    def __mul__(self, scalar: float) -> "GridOperator":
        return GridOperator(self.grid, self.matrix * scalar)

    __rmul__ = __mul__


def identity_operator(grid: Grid) -> GridOperator:
    return GridOperator(grid, np.eye(grid.m))


def zero_operator(grid: Grid) -> GridOperator:
    return GridOperator(grid, np.zeros((grid.m, grid.m)))


def integral_operator(kfn: Callable, grid: Grid) -> GridOperator:
    """Trapezoid discretisation of ``f -> int k(., s) f(s) ds``.

    ``kfn`` is called once with broadcast arrays ``(t[:, None], s[None, :])``;
    scalar-only callables are vectorised as a fallback.
    """
    t = grid.points
    try:
        kmat = np.asarray(kfn(t[:, None], t[None, :]), dtype=float)
        kmat = np.broadcast_to(kmat, (grid.m, grid.m))
    except (TypeError, ValueError):
        kmat = np.vectorize(kfn, otypes=[float])(t[:, None], t[None, :])
    if not np.all(np.isfinite(kmat)):
        raise NumericError("kernel function returned non-finite values on the grid")
    return GridOperator(grid, kmat * grid.weights[None, :])


def compose(A: GridOperator, B: GridOperator) -> GridOperator:
    """Operator ``A o B``."""
    A.grid.check_same(B.grid)
    return GridOperator(A.grid, A.matrix @ B.matrix)


def adjoint(A: GridOperator) -> GridOperator:
    """Adjoint under the weighted inner product, ``W^-1 A^T W``."""
    w = A.grid.weights
    return GridOperator(A.grid, A.matrix.T * w[None, :] / w[:, None])


def op_trace(A: GridOperator) -> float:
    return float(np.trace(A.matrix))


class EigenSystem:
    """Truncated eigenpairs ``(lambda_i, e_i)`` with eigenfunctions cached on a grid.

    Parameters
    ----------
    grid : Grid
        Grid the eigenfunctions are evaluated on.
    eigenvalues : array_like
        Positive, non-increasing eigenvalues.
    eigenfunction : callable
        ``eigenfunction(i, t)`` evaluates the ``i``-th eigenfunction (1-based)
        at the points ``t``.
    """

    def __init__(self, grid: Grid, eigenvalues, eigenfunction: Callable):
        lam = np.asarray(eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise InvalidArgumentError("eigenvalues must be a non-empty 1-D array")
        if np.any(lam <= 0):
            raise InvalidArgumentError("eigenvalues must be strictly positive")
        if np.any(np.diff(lam) > 0):
            raise InvalidArgumentError("eigenvalues must be non-increasing")
        self.grid = grid
        self.eigenvalues = lam
        self.eigenfunction = eigenfunction
        idx = np.arange(1, lam.size + 1)
        vecs = np.stack([np.asarray(eigenfunction(i, grid.points), float) for i in idx])
        vecs.flags.writeable = False
        self._vectors = vecs

    @property
    def count(self) -> int:
        return self.eigenvalues.size

    @property
    def vectors(self) -> np.ndarray:
        """``(count, m)`` array; row ``i`` is the ``(i+1)``-th eigenfunction."""
        return self._vectors

    def function(self, i: int) -> FunctionSample:
        """The ``i``-th eigenfunction (1-based) as a grid sample."""
        return FunctionSample(self.grid, self._vectors[i - 1])

    def coefficients(self, values: np.ndarray) -> np.ndarray:
        """Grid inner products ``<x, e_i>`` for each row of ``values``."""
        return np.atleast_2d(values) @ (self._vectors * self.grid.weights).T


def rank_update_operator(
    base: GridOperator | None, eigsys: EigenSystem, multipliers: Sequence[float]
) -> GridOperator:
    """``base + sum_i (eta_i - 1) e_i <e_i, .>`` for the leading eigenfunctions.

    With ``base`` the identity (``None``) this is ``x -> sum_i eta_i <x, e_i> e_i``
    on the span of the first ``len(multipliers)`` eigenfunctions and the identity
    on its complement.
    """
    eta = np.asarray(multipliers, dtype=float).ravel()
    if eta.size > eigsys.count:
        raise InvalidArgumentError(
            f"{eta.size} multipliers but only {eigsys.count} eigenpairs"
        )
    grid = eigsys.grid
    mat = np.eye(grid.m) if base is None else np.array(base.matrix, dtype=float)
    if base is not None:
        base.grid.check_same(grid)
    if eta.size:
        E = eigsys.vectors[: eta.size]
        mat = mat + (E.T * (eta - 1.0)) @ (E * grid.weights)
    return GridOperator(grid, mat)
