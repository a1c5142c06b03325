"""Designs over basic kernels and the regularized squared-error loss.

A design is a discrete probability measure on basic kernels; its mixture
kernel is the weighted sum of the support kernels. For a mixture matrix
``K`` and nugget ``eta`` the loss is

    Q = (y - K a)^T (y - K a) + eta * a^T K a,   a = (K + eta I)^{-1} y,

and the directional derivative towards a kernel ``G`` is
``-eta * (a^T G a - a^T K a)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import InvalidInputError, NumericalSingularityError
from .kernels import KernelSpec, kernel_matrix

JITTER_START = 1e-10
JITTER_MAX = 1e-6
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Design:
    """Support kernels with simplex weights."""

    support: tuple[KernelSpec, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        support = tuple(self.support)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if len(support) == 0 or len(support) != len(weights):
            raise InvalidInputError(
                f"design needs matching non-empty support/weights, got {len(support)}/{len(weights)}"
            )
        if len(set(support)) != len(support):
            raise InvalidInputError("design support kernels must be distinct")
        if any(not (0.0 < w <= 1.0) for w in weights):
            raise InvalidInputError(f"design weights must lie in (0, 1], got {weights}")
        if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL * max(1, len(weights)):
            raise InvalidInputError(f"design weights must sum to 1, got {sum(weights)!r}")

    @classmethod
    def single(cls, spec: KernelSpec) -> "Design":
        return cls((spec,), (1.0,))

    @classmethod
    def from_weights(cls, support: Sequence[KernelSpec], weights) -> "Design":
        """Build a design after renormalizing ``weights`` to sum to one."""
        w = np.asarray(weights, dtype=float)
        return cls(tuple(support), tuple(w / w.sum()))

    def __len__(self) -> int:
        return len(self.support)

    def items(self):
        return zip(self.support, self.weights)

    def mixture(self, base: Mapping[KernelSpec, np.ndarray]) -> np.ndarray:
        return mixture_matrix(self.weights, [base[s] for s in self.support])

    def cross_mixture(self, X, Z) -> np.ndarray:
        """Mixture kernel between the rows of ``X`` and ``Z``."""
        out = None
        for spec, w in self.items():
            term = w * kernel_matrix(spec, X, Z)
            out = term if out is None else out + term
        return out


def mixture_matrix(weights: Sequence[float], base: Sequence[np.ndarray]) -> np.ndarray:
    """Weighted sum of base kernel matrices."""
    if len(weights) != len(base) or len(base) == 0:
        raise InvalidInputError("weights and base matrices must have the same non-zero length")
    shape = np.shape(base[0])
    if len(shape) != 2 or shape[0] != shape[1]:
        raise InvalidInputError(f"base matrices must be square, got {shape}")
    out = np.zeros(shape)
    for w, K in zip(weights, base):
        if np.shape(K) != shape:
            raise InvalidInputError(f"base matrix shape {np.shape(K)} != {shape}")
        out += w * K
    return out


def factorize(K: np.ndarray, eta: float):
    """Cholesky factor of ``K + eta I``, escalating jitter on failure.

    Returns ``(factor, jitter)`` where ``jitter`` is the extra diagonal
    term that had to be added (0.0 if none).
    """
    n = K.shape[0]
    A = K + eta * np.eye(n)
    jitter = 0.0
    while True:
        try:
            if jitter:
                factor = cho_factor(A + jitter * np.eye(n), lower=True, check_finite=False)
            else:
                factor = cho_factor(A, lower=True, check_finite=False)
            if np.all(np.isfinite(factor[0])):
                return factor, jitter
        except LinAlgError:
            pass
        jitter = JITTER_START if jitter == 0.0 else jitter * 10
        if jitter > JITTER_MAX * (1 + 1e-9):
            raise NumericalSingularityError(
                f"K + eta*I (n={n}, eta={eta:g}) is not positive definite even with jitter {JITTER_MAX:g}"
            )


@dataclass(frozen=True, eq=False)
class SolveState:
    """Per-design quantities shared by every d-value and derivative evaluation.

    Attributes
    ----------
    K_mix : ndarray
        Mixture kernel matrix.
    factor : tuple
        Lower Cholesky factor of ``K_mix + (eta + jitter) I`` as returned by
        ``scipy.linalg.cho_factor``; ``None`` for a zero response.
    a : ndarray
        ``(K_mix + eta I)^{-1} y``.
    q_value : float
        Regularized loss.
    eta : float
    jitter : float
    d_mix : float
        ``a^T K_mix a``; equals the weighted mean of support d-values.
    """

    K_mix: np.ndarray
    factor: tuple | None
    a: np.ndarray
    q_value: float
    eta: float
    jitter: float
    d_mix: float

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve(self.factor, b, check_finite=False)


def solve_state(K_mix: np.ndarray, y, eta: float) -> SolveState:
    """Factorize ``K_mix + eta I`` and evaluate the loss at ``a``."""
    y = np.asarray(y, dtype=float)
    K_mix = np.asarray(K_mix, dtype=float)
    if eta <= 0:
        raise InvalidInputError(f"eta must be positive, got {eta}")
    n = y.shape[0]
    if K_mix.shape != (n, n):
        raise InvalidInputError(f"kernel matrix shape {K_mix.shape} does not match n={n}")
    if not np.any(y):
        return SolveState(K_mix, None, np.zeros(n), 0.0, float(eta), 0.0, 0.0)
    factor, jitter = factorize(K_mix, eta)
    a = cho_solve(factor, y, check_finite=False)
    Ka = K_mix @ a
    resid = y - Ka
    d_mix = float(a @ Ka)
    q = float(resid @ resid + eta * d_mix)
    if not np.isfinite(q):
        raise NumericalSingularityError("loss evaluated to a non-finite value")
    return SolveState(K_mix, factor, a, max(q, 0.0), float(eta), jitter, d_mix)


def loss_q(design: Design, X, y, eta: float, base: Mapping[KernelSpec, np.ndarray] | None = None):
    """Loss of ``design`` on ``(X, y)``.

    Returns ``(q_value, state)``. Kernel matrices are taken from ``base``
    when given, otherwise evaluated on ``X``.
    """
    if base is None:
        base = {s: kernel_matrix(s, X) for s in design.support}
    state = solve_state(design.mixture(base), y, eta)
    return state.q_value, state


def d_value(state: SolveState, K_spec: np.ndarray) -> float:
    """``a^T K_spec a``, the d-function of a kernel at the state's design."""
    a = state.a
    return float(a @ (K_spec @ a))


def d_values(state: SolveState, mats: Sequence[np.ndarray]) -> np.ndarray:
    a = state.a
    return np.array([a @ (K @ a) for K in mats], dtype=float)


def dir_derivative(state: SolveState, K_target: np.ndarray, K_mix: np.ndarray | None = None) -> float:
    """Directional derivative of the loss towards ``K_target``.

    Negative values mark improving directions. ``K_mix`` defaults to the
    state's own mixture matrix.
    """
    d_mix = state.d_mix if K_mix is None else d_value(state, K_mix)
    return -state.eta * (d_value(state, K_target) - d_mix)
