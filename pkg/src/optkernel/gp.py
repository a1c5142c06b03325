"""Prediction, leave-one-out error and nugget selection."""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .design import Design, loss_q
from .errors import InvalidInputError, NumericalSingularityError, OptKernelError
from .model import FittedModel
from .stagewise import StageConfig, StageTrace, fit_stagewise

log = logging.getLogger(__name__)

DEFAULT_ETA_GRID = (0.005, 0.01, 0.02, 0.05, 0.1, 0.5)


@dataclass
class Prediction:
    mean: np.ndarray
    variance: np.ndarray
    # rows whose scaled coordinates leave [0, 1]
    extrapolated: np.ndarray

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.variance)


def _cross(model: FittedModel, U: np.ndarray) -> np.ndarray:
    return model.design.cross_mixture(U, model.train_points)


def predict(model: FittedModel, X_raw) -> Prediction:
    """Conditional mean and variance at each row of ``X_raw``."""
    U = model.scale(X_raw)
    k = _cross(model, U)
    mean = model.y_center + k @ model.coefficients
    if model.tau2_hat > 0:
        from scipy.linalg import cho_solve

        v = cho_solve(model.factor, k.T, check_finite=False)
        var = model.tau2_hat * (1.0 - np.einsum("ij,ji->i", k, v))
    else:
        var = np.zeros(U.shape[0])
    outside = np.any((U < 0.0) | (U > 1.0), axis=1)
    return Prediction(mean, np.maximum(var, 0.0), outside)


def predict_mean(model: FittedModel, x_raw) -> float:
    return float(predict(model, np.atleast_2d(x_raw)).mean[0])


def predict_variance(model: FittedModel, x_raw) -> float:
    return float(predict(model, np.atleast_2d(x_raw)).variance[0])


def loo_residuals(design: Design, X, y, eta: float, base=None) -> np.ndarray:
    """Leave-one-out residuals ``a_i / [(K + eta I)^{-1}]_ii`` from one factorization."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 3:
        raise InvalidInputError("leave-one-out needs at least three points")
    _, state = loss_q(design, X, y, eta, base=base)
    if state.factor is None:
        return np.zeros(n)
    diag = np.diag(state.solve(np.eye(n)))
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise NumericalSingularityError("non-positive diagonal in (K + eta I)^-1")
    return state.a / diag


def loo_cv_error(design: Design, X, y, eta: float, base=None) -> float:
    """Mean squared leave-one-out residual."""
    e = loo_residuals(design, X, y, eta, base=base)
    return float(e @ e / e.size)


@dataclass
class EtaFit:
    eta: float
    loo: float | None
    model: FittedModel | None = None
    stages: list[StageTrace] = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.loo is None


@dataclass
class EtaSearch:
    best_eta: float
    fits: list[EtaFit]

    @property
    def curve(self) -> list[tuple[float, float | None]]:
        return [(f.eta, f.loo) for f in self.fits]

    @property
    def best(self) -> EtaFit:
        return next(f for f in self.fits if f.eta == self.best_eta)

    def __iter__(self):
        return iter((self.best_eta, self.curve))


def _fit_one(X, y, cfg: StageConfig, eta: float) -> EtaFit:
    sub = dataclasses.replace(cfg, selector=dataclasses.replace(cfg.selector, eta=float(eta)))
    try:
        model, stages = fit_stagewise(X, y, sub)
        err = loo_cv_error(model.design, X, y, eta)
    except NumericalSingularityError as exc:
        log.warning("eta=%g failed: %s", eta, exc)
        return EtaFit(float(eta), None, error=str(exc))
    return EtaFit(float(eta), err, model, stages)


def select_eta(X, y, eta_grid=DEFAULT_ETA_GRID, cfg: StageConfig = StageConfig(), threads: int = 1) -> EtaSearch:
    """Refit the staged learner for each nugget and keep the lowest LOO error.

    Ties go to the smaller nugget. Nuggets whose fit fails numerically are
    reported with ``loo=None`` and skipped.
    """
    grid = sorted(float(e) for e in eta_grid)
    if not grid:
        raise InvalidInputError("eta grid must be non-empty")
    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fits = list(pool.map(lambda e: _fit_one(X, y, cfg, e), grid))
    else:
        fits = [_fit_one(X, y, cfg, e) for e in grid]
    ok = [f for f in fits if not f.failed]
    if not ok:
        raise NumericalSingularityError("every eta in the grid failed")
    best = ok[0]
    for f in ok[1:]:
        if f.loo < best.loo:
            best = f
    return EtaSearch(best.eta, fits)


@dataclass(frozen=True)
class InputScaling:
    minimum: np.ndarray
    range: np.ndarray

    @classmethod
    def fit(cls, X) -> "InputScaling":
        X = np.asarray(X, dtype=float)
        lo = X.min(axis=0)
        span = X.max(axis=0) - lo
        span = np.where(span > 0, span, 1.0)
        return cls(lo, span)

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.minimum) / self.range


@dataclass
class FitResult:
    model: FittedModel
    stages: list[StageTrace]
    search: EtaSearch | None = None
    loo: float | None = None


def fit_gp(
    X_raw,
    y_raw,
    cfg: StageConfig = StageConfig(),
    eta_grid=DEFAULT_ETA_GRID,
    eta: float | None = None,
    threads: int = 1,
    input_names=None,
    response_name=None,
) -> FitResult:
    """Scale inputs, center the response and learn the kernel.

    With ``eta`` given the nugget is fixed; otherwise it is chosen from
    ``eta_grid`` by leave-one-out error.
    """
    X_raw = np.asarray(X_raw, dtype=float)
    y_raw = np.asarray(y_raw, dtype=float)
    if X_raw.ndim != 2 or X_raw.shape[0] != y_raw.shape[0]:
        raise InvalidInputError(f"X shape {X_raw.shape} does not match y length {y_raw.shape}")
    if not (np.all(np.isfinite(X_raw)) and np.all(np.isfinite(y_raw))):
        raise InvalidInputError("training data must be finite")
    scaling = InputScaling.fit(X_raw)
    X = scaling.apply(X_raw)
    center = float(np.mean(y_raw))
    y = y_raw - center
    if np.ptp(y_raw) <= 1e-12 * max(1.0, abs(center)):
        y = np.zeros_like(y)

    search = None
    if eta is None:
        search = select_eta(X, y, eta_grid, cfg, threads=threads)
        fit = search.best
    else:
        fit = _fit_one(X, y, cfg, eta)
        if fit.failed:
            raise NumericalSingularityError(fit.error)
    model = dataclasses.replace(
        fit.model,
        input_min=scaling.minimum,
        input_range=scaling.range,
        y_center=center,
        input_names=None if input_names is None else tuple(input_names),
        response_name=response_name,
    )
    return FitResult(model, fit.stages, search, fit.loo)
