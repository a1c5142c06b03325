"""Benchmark response surfaces evaluated in their native units."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidConfigError, InvalidInputError

# (symbol, low, high); order fixes the argument order of ``borehole``
BOREHOLE_RANGES = (
    ("r_w", 0.05, 0.15),
    ("r", 100.0, 50000.0),
    ("T_u", 63070.0, 115600.0),
    ("H_u", 990.0, 1110.0),
    ("T_l", 63.1, 116.0),
    ("H_l", 700.0, 820.0),
    ("L", 1120.0, 1680.0),
    ("K_w", 9855.0, 12045.0),
)


def michalewicz(x, k: int = 10):
    """``sum_j sin(x_j) * sin(j * x_j**2 / pi)**(2k)`` over the last axis, ``x`` in ``[0, pi]^p``."""
    x = np.asarray(x, dtype=float)
    j = np.arange(1, x.shape[-1] + 1)
    return np.sum(np.sin(x) * np.sin(j * x**2 / np.pi) ** (2 * k), axis=-1)


def borehole(x):
    """Water flow rate (m^3/yr); columns ordered as ``BOREHOLE_RANGES``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 8:
        raise InvalidInputError(f"borehole takes 8 inputs, got {x.shape[-1]}")
    rw, r, tu, hu, tl, hl, L, kw = np.moveaxis(x, -1, 0)
    if np.any(r <= rw):
        raise InvalidInputError("borehole requires r > r_w")
    log_ratio = np.log(r / rw)
    return 2 * np.pi * tu * (hu - hl) / (
        log_ratio * (1 + 2 * L * tu / (log_ratio * rw**2 * kw) + tu / tl)
    )


def linear(x):
    """Sum of the active coordinates; a smoke-test surface."""
    return np.sum(np.asarray(x, dtype=float), axis=-1)


@dataclass(frozen=True)
class TestFunction:
    name: str
    func: Callable
    ranges: Callable[[int], tuple[np.ndarray, np.ndarray]]
    fixed_p: int | None = None

    __test__ = False  # not a pytest class

    def check_p(self, p: int) -> None:
        if self.fixed_p is not None and p != self.fixed_p:
            raise InvalidConfigError(f"{self.name} has exactly {self.fixed_p} inputs, got p={p}")

    def from_unit(self, U) -> np.ndarray:
        """Map unit-cube points to native units."""
        U = np.asarray(U, dtype=float)
        lo, hi = self.ranges(U.shape[-1])
        return lo + U * (hi - lo)

    def __call__(self, U) -> np.ndarray:
        """Evaluate at unit-cube points."""
        return self.func(self.from_unit(U))


def _box(lo, hi):
    return lambda p: (np.full(p, float(lo)), np.full(p, float(hi)))


def _borehole_box(p):
    arr = np.array([(lo, hi) for _, lo, hi in BOREHOLE_RANGES])
    return arr[:, 0], arr[:, 1]


FUNCTIONS = {
    "michalewicz": TestFunction("michalewicz", michalewicz, _box(0.0, np.pi)),
    "borehole": TestFunction("borehole", borehole, _borehole_box, fixed_p=8),
    "linear": TestFunction("linear", linear, _box(0.0, 1.0)),
}


def get_function(name: str) -> TestFunction:
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise InvalidConfigError(f"unknown test function {name!r}; choose from {sorted(FUNCTIONS)}") from None
