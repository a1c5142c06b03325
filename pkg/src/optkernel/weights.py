"""Multiplicative weight optimization for a fixed set of support kernels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .design import SolveState, d_values, mixture_matrix, solve_state
from .errors import InvalidConfigError, InvalidInputError, NumericalSingularityError
from .kernels import KernelSpec

WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class WeightConfig:
    """Stopping rules for the weight iteration.

    ``delta`` is the exponent applied to the d-values in the update; the
    iteration stops once the relative loss change drops to ``tol`` or
    after ``max_iter`` sweeps.
    """

    delta: float = 1.0
    tol: float = 0.005
    max_iter: int = 1000

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise InvalidConfigError(f"delta must lie in (0, 1], got {self.delta}")
        if not self.tol > 0:
            raise InvalidConfigError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise InvalidConfigError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class WeightResult:
    weights: np.ndarray
    q_value: float
    iterations: int
    state: SolveState
    q_history: list[float] = field(default_factory=list)
    converged: bool = False

    def __iter__(self):
        # allows ``weights, q, iters = optimize_weights(...)``
        return iter((self.weights, self.q_value, self.iterations))


def multiplicative_step(weights: np.ndarray, d: np.ndarray, delta: float = 1.0) -> np.ndarray:
    """One simultaneous update ``w_i <- w_i d_i^delta / sum_j w_j d_j^delta``."""
    num = weights * np.power(np.maximum(d, 0.0), delta)
    total = num.sum()
    if not total > 0:
        return weights.copy()
    new = np.maximum(num / total, WEIGHT_FLOOR)
    return new / new.sum()


def optimize_weights(
    support: Sequence[KernelSpec],
    base: Mapping[KernelSpec, np.ndarray],
    y,
    eta: float,
    cfg: WeightConfig = WeightConfig(),
    init=None,
) -> WeightResult:
    """Minimize the loss over simplex weights on ``support``.

    Parameters
    ----------
    support : sequence of KernelSpec
        Kernels whose weights are optimized; matrices must be in ``base``.
    base : mapping
        Cached kernel matrices keyed by spec.
    y : array
        Centered response.
    eta : float
        Nugget.
    cfg : WeightConfig
    init : array, optional
        Strictly positive starting weights. Uniform when omitted.

    Returns
    -------
    WeightResult
        Unpacks as ``(weights, q_value, iterations)``.
    """
    m = len(support)
    if m == 0:
        raise InvalidInputError("support must contain at least one kernel")
    mats = [base[s] for s in support]
    if init is None:
        w = np.full(m, 1.0 / m)
    else:
        w = np.asarray(init, dtype=float)
        if w.shape != (m,) or np.any(w <= 0):
            raise InvalidInputError("initial weights must be positive with one entry per kernel")
        w = w / w.sum()

    state = solve_state(mixture_matrix(w, mats), y, eta)
    q = state.q_value
    history = [q]
    if q == 0.0:
        return WeightResult(np.full(m, 1.0 / m), 0.0, 0, state, history, True)

    k = 0
    converged = False
    while k < cfg.max_iter:
        d = d_values(state, mats)
        if not np.all(np.isfinite(d)):
            raise NumericalSingularityError("non-finite d-value in weight update")
        w = multiplicative_step(w, d, cfg.delta)
        state = solve_state(mixture_matrix(w, mats), y, eta)
        q_new = state.q_value
        history.append(q_new)
        k += 1
        change = abs(q_new - q) / q if q > 0 else 0.0
        q = q_new
        if change <= cfg.tol:
            converged = True
            break
    return WeightResult(w, q, k, state, history, converged)
