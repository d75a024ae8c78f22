"""One-dimensional spectral oracle and Langevin-Stein test functions.

On the real line with the vectorised Langevin-Stein operator, a translation
invariant kernel ``k(x, y) = E_{s ~ mu} exp(i s (x - y))`` gives

    KSD^2 = E_{s ~ mu} | E_Q[(i s + score(X)) exp(i s X)] |^2,

which is estimated here by plain Monte Carlo over ``s`` and compared with
the Gram-matrix estimator built from :func:`stein_kernel_1d`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError
from .gof import make_rng
from .kernels import KernelFamily

__all__ = [
    "ScalarModel",
    "SpectralKind",
    "SpectralMeasure",
    "Kernel1D",
    "SpectralEstimate",
    "standard_normal_model",
    "gaussian_model",
    "cubic_demo_model",
    "test_function",
    "stein_kernel_1d",
    "stein_gram_1d",
    "spectral_ksd_mc",
    "diagonal_corrected",
    "TestFunctionTable",
    "emit_testfunction_data",
]


@dataclass(frozen=True)
class ScalarModel:
    """Target on the real line, known through its score ``(log p)'``."""

    log_density_grad: Callable[[np.ndarray], np.ndarray]
    label: str = "model"

    def score(self, x):
        return self.log_density_grad(np.asarray(x, dtype=float))


def gaussian_model(mean: float = 0.0, sd: float = 1.0) -> ScalarModel:
    return ScalarModel(lambda x: -(x - mean) / sd**2, f"N({mean}, {sd ** 2})")


def standard_normal_model() -> ScalarModel:
    return gaussian_model(0.0, 1.0)


def cubic_demo_model() -> ScalarModel:
    """``p(x) ∝ exp(-((x - 3) / 3)^3)``, score ``-(x - 3)^2 / 9``."""
    return ScalarModel(lambda x: -((x - 3.0) ** 2) / 9.0, "exp(-((x-3)/3)^3)")


class SpectralKind(str, Enum):
    GAUSSIAN = "gaussian"
    STUDENT_T = "student_t"
    CAUCHY = "cauchy"


@dataclass(frozen=True)
class SpectralMeasure:
    """Spectral measure of a translation-invariant kernel on the real line.

    ``gaussian`` has scale ``1 / gamma`` so that it matches the SE kernel with
    bandwidth ``gamma``.
    """

    kind: SpectralKind = SpectralKind.GAUSSIAN
    nu: float = 2.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SpectralKind(self.kind))

    @classmethod
    def parse(cls, name: str) -> "SpectralMeasure":
        name = name.lower()
        if name in ("gaussian", "normal"):
            return cls(SpectralKind.GAUSSIAN)
        if name in ("student2", "student_t", "student"):
            return cls(SpectralKind.STUDENT_T, nu=2.0)
        if name == "cauchy":
            return cls(SpectralKind.CAUCHY)
        raise InvalidArgumentError(f"unknown spectral measure {name!r}")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind is SpectralKind.GAUSSIAN:
            s = rng.standard_normal(size)
        elif self.kind is SpectralKind.STUDENT_T:
            s = rng.standard_t(self.nu, size)
        else:
            s = rng.standard_cauchy(size)
        return self.scale * s


@dataclass(frozen=True)
class Kernel1D:
    family: KernelFamily = KernelFamily.SE
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily.parse(self.family))
        if not self.gamma > 0:
            raise InvalidArgumentError("bandwidth must be positive")


def test_function(s, x, model: ScalarModel):
    """Langevin-Stein operator applied to ``exp(i s x)``.

    ``-s^2 cos(sx) - s sin(sx) psi(x) + i (-s^2 sin(sx) + s cos(sx) psi(x))``
    with ``psi`` the model score.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    psi = model.score(x)
    c = np.cos(s * x)
    sn = np.sin(s * x)
    out = (-(s**2) * c - s * sn * psi) + 1j * (-(s**2) * sn + s * c * psi)
    return out if out.ndim else complex(out)


test_function.__test__ = False


def _kernel_parts(kernel: Kernel1D, x, y):
    r = np.asarray(x, float) - np.asarray(y, float)
    g2 = kernel.gamma**2
    if kernel.family is KernelFamily.SE:
        k = np.exp(-0.5 * r * r / g2)
        d1 = -r / g2 * k
        d12 = (1.0 / g2 - r * r / g2**2) * k
    else:
        k = 1.0 / np.sqrt(1.0 + r * r / g2)
        k3 = k**3
        d1 = -r / g2 * k3
        d12 = k3 / g2 - 3.0 * r * r / g2**2 * k**5
    return k, d1, -d1, d12


def stein_kernel_1d(x, y, model: ScalarModel, kernel: Kernel1D = Kernel1D()):
    """Langevin Stein kernel ``s(x)s(y)k + s(x) d_y k + s(y) d_x k + d_x d_y k``."""
    k, d1, d2, d12 = _kernel_parts(kernel, x, y)
    sx = model.score(x)
    sy = model.score(y)
    return sx * sy * k + sx * d2 + sy * d1 + d12


def stein_gram_1d(samples, model: ScalarModel, kernel: Kernel1D = Kernel1D()) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    H = stein_kernel_1d(x[:, None], x[None, :], model, kernel)
    return 0.5 * (H + H.T)


@dataclass(frozen=True)
class SpectralEstimate:
    value: float
    stderr: float
    n_mc: int


def spectral_ksd_mc(
    samples,
    model: ScalarModel,
    mu: SpectralMeasure = SpectralMeasure(),
    n_mc: int = 100_000,
    seed=0,
    return_stderr: bool = False,
    chunk: int = 2048,
):
    """Monte Carlo estimate of ``E_s |mean_i (i s + score(X_i)) exp(i s X_i)|^2``.

    The inner mean uses the same sample set in both factors of the modulus,
    so the result targets the V-statistic of the matching Stein kernel.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise InvalidArgumentError("spectral estimate needs at least one sample")
    if n_mc < 1:
        raise InvalidArgumentError("n_mc must be >= 1")
    rng = make_rng(seed)
    s_all = mu.sample(rng, n_mc)
    psi = model.score(x)
    vals = np.empty(n_mc)
    for start in range(0, n_mc, chunk):
        s = s_all[start : start + chunk, None]
        phase = s * x[None, :]
        c = np.cos(phase)
        sn = np.sin(phase)
        # (i s + psi)(cos + i sin) = (psi cos - s sin) + i (s cos + psi sin)
        re = (psi * c - s * sn).mean(axis=1)
        im = (s * c + psi * sn).mean(axis=1)
        vals[start : start + chunk] = re * re + im * im
    value = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else float("inf")
    if return_stderr:
        return SpectralEstimate(value, stderr, n_mc)
    return value


def diagonal_corrected(u_stat: float, diag_mean: float, n: int) -> float:
    """V-statistic rebuilt from a U-statistic and the mean diagonal entry."""
    return ((n - 1) * u_stat + diag_mean) / n


@dataclass
class TestFunctionTable:
    """Real parts of test functions on an ``x`` grid plus the score reference."""

    x: np.ndarray
    score: np.ndarray
    s_values: np.ndarray
    real_parts: np.ndarray  # (n_curves, n_x)

    __test__ = False

    def rows(self):
        """Long-format rows ``(curve_index, s_value, x, real_part, score)``.

        Without curves only the score reference is emitted, with the curve
        fields set to ``None``.
        """
        if len(self.s_values) == 0:
            return [(None, None, float(xi), None, float(sc)) for xi, sc in zip(self.x, self.score)]
        out = []
        for c, s in enumerate(self.s_values):
            for xi, re, sc in zip(self.x, self.real_parts[c], self.score):
                out.append((c, float(s), float(xi), float(re), float(sc)))
        return out


def emit_testfunction_data(
    model: ScalarModel,
    mu: SpectralMeasure,
    n_curves: int = 10,
    x_range=(-10.0, 10.0),
    n_x: int = 400,
    seed=0,
) -> TestFunctionTable:
    if n_curves < 0 or n_x < 1:
        raise InvalidArgumentError("n_curves must be >= 0 and n_x >= 1")
    rng = make_rng(seed)
    x = np.linspace(x_range[0], x_range[1], n_x)
    s = mu.sample(rng, n_curves)
    real = np.real(test_function(s[:, None], x[None, :], model)).reshape(n_curves, n_x)
    return TestFunctionTable(x=x, score=model.score(x), s_values=s, real_parts=real)
