"""Kernel Stein discrepancy for functional data on L^2 grids."""

from ._backend import BACKEND
from .errors import (
    AcceptanceFailureError,
    ConfigError,
    DegenerateBandwidthError,
    IncompatibleGridError,
    InvalidArgumentError,
    NumericError,
)
from .fn_space import (
    EigenSystem,
    FunctionSample,
    Grid,
    GridOperator,
    compose,
    inner,
    integral_operator,
    make_uniform_grid,
    op_trace,
    rank_update_operator,
)
from .gof import TestConfig, TestResult, bootstrap_replicate, power_study, run_test
from .kernels import KernelConfig, KernelFamily, kernel_eval, median_bandwidth, t2_whitening
from .stein import SteinContext, SteinGram, build_gram, make_context, stein_kernel, u_statistic, v_statistic
from .targets import (
    GaussianTarget,
    GibbsTarget,
    brownian_bridge_target,
    brownian_motion_target,
    drift,
    sine_gibbs_target,
)

__version__ = "0.1.0"
