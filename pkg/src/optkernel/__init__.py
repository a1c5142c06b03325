"""Gaussian-process regression with kernels learned as sparse convex
combinations of low-dimensional isotropic Gaussian kernels."""

from .design import Design, SolveState, d_value, dir_derivative, loss_q, mixture_matrix
from .errors import (
    DatasetError,
    InvalidConfigError,
    InvalidInputError,
    InvalidSpecError,
    NumericalSingularityError,
    OptKernelError,
)
from .gp import fit_gp, loo_cv_error, predict, predict_mean, predict_variance, select_eta
from .kernels import KernelSpec, ThetaGrid, candidate_grid, eval_kernel, kernel_matrix
from .model import FittedModel
from .selector import SelectorConfig, select_kernels
from .stagewise import Heredity, StageConfig, active_variables, expand_candidates, fit_stagewise
from .weights import WeightConfig, optimize_weights

__version__ = "0.1.0"
