"""Isotropic Gaussian basic kernels on low-dimensional subsets of the inputs.

Inputs are assumed to be scaled to the unit cube before any kernel is
evaluated. Dimension indices are 1-based throughout the public API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidConfigError, InvalidSpecError

GAUSSIAN = "gaussian"


@dataclass(frozen=True, order=True)
class KernelSpec:
    """One basic kernel ``exp(-theta * sum_{j in dims} (x_j - x'_j)**2)``.

    Parameters
    ----------
    dims : tuple of int
        Strictly increasing 1-based input dimensions the kernel acts on.
    theta : float
        Positive inverse squared lengthscale.
    family : str
        Kernel family tag; only ``"gaussian"`` is implemented.
    """

    dims: tuple[int, ...]
    theta: float
    family: str = GAUSSIAN

    def __post_init__(self):
        dims = tuple(int(j) for j in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "theta", float(self.theta))
        if not dims:
            raise InvalidSpecError("kernel dims must be non-empty")
        if dims[0] < 1:
            raise InvalidSpecError(f"dimension indices are 1-based, got {dims}")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise InvalidSpecError(f"kernel dims must be strictly increasing, got {dims}")
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise InvalidSpecError(f"theta must be positive and finite, got {self.theta}")
        if self.family != GAUSSIAN:
            raise InvalidSpecError(f"unsupported kernel family {self.family!r}")

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def columns(self) -> list[int]:
        """0-based column indices."""
        return [j - 1 for j in self.dims]

    def check_dimension(self, d: int) -> None:
        if self.dims[-1] > d:
            raise InvalidSpecError(
                f"kernel uses dimension {self.dims[-1]} but inputs have only {d}"
            )

    def __str__(self) -> str:
        return f"K{list(self.dims)}(theta={self.theta:g})"


@dataclass(frozen=True)
class ThetaGrid:
    """Sorted set of candidate ``theta`` values shared by every subset."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(sorted(float(v) for v in self.values))
        if not vals:
            raise InvalidConfigError("theta grid must be non-empty")
        if any(not (math.isfinite(v) and v > 0) for v in vals):
            raise InvalidConfigError("theta grid values must be positive and finite")
        if len(set(vals)) != len(vals):
            raise InvalidConfigError("theta grid values must be distinct")
        object.__setattr__(self, "values", vals)

    @classmethod
    def default(cls) -> "ThetaGrid":
        """``{a * 10**b : a in {1,3,5,7,9}, b in {-2,...,2}}``, 25 values."""
        return cls(tuple(a * 10.0**b for a in (1, 3, 5, 7, 9) for b in range(-2, 3)))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InvalidSpecError(f"expected an (n, d) point set, got shape {X.shape}")
    return X


def eval_kernel(spec: KernelSpec, x1, x2) -> float:
    x1 = np.asarray(x1, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    spec.check_dimension(min(x1.size, x2.size))
    cols = spec.columns
    diff = x1[cols] - x2[cols]
    return float(np.exp(-spec.theta * np.dot(diff, diff)))


def sq_distances(dims: Sequence[int], X, Z=None) -> np.ndarray:
    """Squared Euclidean distances restricted to ``dims`` (1-based).

    With ``Z`` omitted the result is the exactly symmetric ``n x n`` matrix
    for ``X`` against itself.
    """
    X = _as_points(X)
    cols = [j - 1 for j in dims]
    A = X[:, cols]
    B = A if Z is None else _as_points(Z)[:, cols]
    D = np.zeros((A.shape[0], B.shape[0]))
    for c in range(len(cols)):
        diff = A[:, c, None] - B[None, :, c]
        D += diff * diff
    return D


def kernel_matrix(spec: KernelSpec, X, Z=None) -> np.ndarray:
    """Kernel matrix of ``spec`` on ``X`` (or the cross matrix against ``Z``).

    The square case has a unit diagonal and is bitwise symmetric, since
    ``(a - b)**2 == (b - a)**2`` in IEEE arithmetic.
    """
    X = _as_points(X)
    spec.check_dimension(X.shape[1])
    if Z is not None:
        Z = _as_points(Z)
        spec.check_dimension(Z.shape[1])
    return np.exp(-spec.theta * sq_distances(spec.dims, X, Z))


def candidate_grid(dim_subsets: Iterable[Sequence[int]], grid: ThetaGrid) -> list[KernelSpec]:
    """One spec per (subset, theta), subsets in the given order, theta ascending."""
    if grid is None or len(grid) == 0:
        raise InvalidConfigError("theta grid must be non-empty")
    out = []
    for subset in dim_subsets:
        for theta in grid.values:
            out.append(KernelSpec(tuple(subset), theta))
    return out


def one_dim_subsets(d: int) -> list[tuple[int, ...]]:
    return [(j,) for j in range(1, d + 1)]
