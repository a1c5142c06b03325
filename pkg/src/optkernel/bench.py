"""Simulation harness: designs, padded test functions, and scoring."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .datasets import load_csv
from .errors import InvalidConfigError, OptKernelError
from .gp import DEFAULT_ETA_GRID, fit_gp, predict
from .lhs import maximin_lhs, random_lhs
from .stagewise import StageConfig
from .testfunctions import get_function

log = logging.getLogger(__name__)


def standard_rmse(y_true, y_pred) -> float:
    """Test RMSE divided by the RMSE of predicting the test mean."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.size < 2:
        raise ValueError("standard_rmse needs two equal-length vectors of size >= 2")
    base = np.sqrt(np.mean((y_true - y_true.mean()) ** 2))
    if not base > 0:
        raise ValueError("standard_rmse is undefined for a constant y_true")
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)) / base)


def fp_fn(identified, truth, d: int | None = None) -> tuple[int, int]:
    identified, truth = set(identified), set(truth)
    if d is not None:
        universe = set(range(1, d + 1))
        if not (identified <= universe and truth <= universe):
            raise ValueError(f"dimension indices must lie in 1..{d}")
    return len(identified - truth), len(truth - identified)


@dataclass(frozen=True)
class ExperimentSpec:
    function: str = "michalewicz"
    d: int = 6
    p: int = 2
    n_train: int = 200
    n_test: int = 3481
    reps: int = 5
    seed: int = 0
    stage: StageConfig = field(default_factory=StageConfig)
    eta_grid: tuple[float, ...] = DEFAULT_ETA_GRID
    eta: float | None = None
    maximin_iters: int = 2000
    threads: int = 1
    data_path: str | None = None
    response: str | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise InvalidConfigError(f"reps must be >= 1, got {self.reps}")
        if self.n_train < 2 or self.n_test < 2:
            raise InvalidConfigError("n_train and n_test must be >= 2")
        if self.function == "csv":
            if not self.data_path or not self.response:
                raise InvalidConfigError("csv experiments need data_path and response")
            return
        get_function(self.function).check_p(self.p)
        if not (1 <= self.p <= self.d):
            raise InvalidConfigError(f"need 1 <= p <= d, got p={self.p}, d={self.d}")


@dataclass
class ReplicationResult:
    rep: int
    # 1-based column holding the test function's j-th variable, in order
    active_columns: list[int]
    identified: list[int]
    rmse: float | None
    fp: int | None
    fn: int | None
    eta: float | None
    n_kernels: int | None
    seconds: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class MetricsReport:
    spec: ExperimentSpec
    replications: list[ReplicationResult]

    @property
    def ok(self) -> list[ReplicationResult]:
        return [r for r in self.replications if not r.failed]

    @property
    def n_failed(self) -> int:
        return len(self.replications) - len(self.ok)

    def _stat(self, attr):
        return np.array([getattr(r, attr) for r in self.ok], dtype=float)

    @property
    def rmse_mean(self) -> float:
        return float(np.mean(self._stat("rmse"))) if self.ok else float("nan")

    @property
    def rmse_sd(self) -> float:
        v = self._stat("rmse")
        return float(np.std(v, ddof=1)) if v.size > 1 else 0.0

    @property
    def rmse_median(self) -> float:
        return float(np.median(self._stat("rmse"))) if self.ok else float("nan")

    @property
    def fp_mean(self) -> float:
        return float(np.mean(self._stat("fp"))) if self.ok else float("nan")

    @property
    def fn_mean(self) -> float:
        return float(np.mean(self._stat("fn"))) if self.ok else float("nan")

    @property
    def seconds(self) -> float:
        return float(sum(r.seconds for r in self.replications))

    def aggregate(self) -> dict:
        return {
            "replications": len(self.replications),
            "failed": self.n_failed,
            "rmse_mean": self.rmse_mean,
            "rmse_sd": self.rmse_sd,
            "rmse_median": self.rmse_median,
            "fp_mean": self.fp_mean,
            "fn_mean": self.fn_mean,
            "seconds": self.seconds,
        }

    def to_dict(self) -> dict:
        spec = {k: v for k, v in asdict(self.spec).items() if k != "stage"}
        st = self.spec.stage
        spec["stage"] = {
            "max_dim": st.max_dim,
            "heredity": st.heredity.value,
            "tol": st.selector.tol,
            "del": st.selector.del_threshold,
            "max_iter": st.selector.max_iter,
            "delta": st.weights.delta,
            "max_iter0": st.weights.max_iter,
            "n_theta": len(st.theta_grid),
        }
        return {
            "spec": spec,
            "replications": [asdict(r) for r in self.replications],
            "aggregate": self.aggregate(),
        }

    def table(self, method: str = "optK") -> str:
        """Tab-separated summary row under a header: method, RMSE(sd), FP, FN."""
        head = "method\tRMSE(sd)\tFP\tFN"
        row = f"{method}\t{self.rmse_mean:.4f}({self.rmse_sd:.4f})\t{self.fp_mean:g}\t{self.fn_mean:g}"
        return head + "\n" + row


def replication_seeds(seed: int, reps: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(reps)


def _simulated_data(spec: ExperimentSpec, rng: np.random.Generator):
    fn = get_function(spec.function)
    U_train = maximin_lhs(spec.n_train, spec.d, rng, spec.maximin_iters)
    U_test = random_lhs(spec.n_test, spec.d, rng)
    cols = rng.choice(spec.d, size=spec.p, replace=False)
    y_train = fn(U_train[:, cols])
    y_test = fn(U_test[:, cols])
    return U_train, y_train, U_test, y_test, cols


def _csv_data(spec: ExperimentSpec, rng: np.random.Generator, cache={}):
    key = (spec.data_path, spec.response)
    if key not in cache:
        cache[key] = load_csv(spec.data_path, spec.response)[:2]
    X, y = cache[key]
    N, p = X.shape
    if spec.n_train + spec.n_test > N:
        raise InvalidConfigError(f"dataset has {N} rows, need n_train + n_test = {spec.n_train + spec.n_test}")
    if spec.d < p:
        raise InvalidConfigError(f"d={spec.d} is smaller than the {p} dataset inputs")
    lo, span = X.min(axis=0), np.ptp(X, axis=0)
    U = (X - lo) / np.where(span > 0, span, 1.0)
    idx = rng.permutation(N)
    tr, te = idx[: spec.n_train], idx[spec.n_train : spec.n_train + spec.n_test]
    cols = rng.choice(spec.d, size=p, replace=False)
    full = rng.random((N, spec.d))
    full[:, cols] = U
    return full[tr], y[tr], full[te], y[te], cols


def run_replication(spec: ExperimentSpec, rep: int, seed_seq: np.random.SeedSequence) -> ReplicationResult:
    rng = np.random.default_rng(seed_seq)
    t0 = time.perf_counter()
    if spec.function == "csv":
        U_train, y_train, U_test, y_test, cols = _csv_data(spec, rng)
    else:
        U_train, y_train, U_test, y_test, cols = _simulated_data(spec, rng)
    truth = [int(c) + 1 for c in cols]
    try:
        res = fit_gp(U_train, y_train, spec.stage, spec.eta_grid, eta=spec.eta, threads=spec.threads)
    except OptKernelError as exc:
        log.warning("replication %d failed: %s", rep, exc)
        return ReplicationResult(rep, truth, [], None, None, None, None, None,
                                 time.perf_counter() - t0, str(exc))
    pred = predict(res.model, U_test)
    ident = sorted(res.model.active_variables())
    fp, fn = fp_fn(ident, truth, spec.d)
    out = ReplicationResult(
        rep, truth, ident, standard_rmse(y_test, pred.mean), fp, fn,
        res.model.eta, len(res.model.design), time.perf_counter() - t0,
    )
    log.info("rep %d: rmse=%.4f fp=%d fn=%d eta=%g kernels=%d (%.1fs)",
             rep, out.rmse, fp, fn, out.eta, out.n_kernels, out.seconds)
    return out


def run_experiment(spec: ExperimentSpec) -> MetricsReport:
    seeds = replication_seeds(spec.seed, spec.reps)
    reps = [run_replication(spec, b, s) for b, s in enumerate(seeds)]
    report = MetricsReport(spec, reps)
    if report.n_failed:
        log.warning("%d of %d replications failed", report.n_failed, spec.reps)
    return report
