"""Fitted predictive model and its on-disk format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .design import Design, factorize, solve_state
from .errors import InvalidInputError
from .kernels import KernelSpec

FORMAT_NAME = "optkernel-model"
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class FittedModel:
    """A learned mixture kernel plus everything needed to predict with it.

    ``train_points`` are stored already mapped to the unit cube; queries in
    original units are mapped with ``(x - input_min) / input_range``.
    """

    design: Design
    coefficients: np.ndarray
    eta: float
    tau2_hat: float
    train_points: np.ndarray
    input_min: np.ndarray
    input_range: np.ndarray
    y_center: float
    jitter: float = 0.0
    q_value: float = float("nan")
    input_names: tuple[str, ...] | None = None
    response_name: str | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.train_points.shape[0]

    @property
    def d(self) -> int:
        return self.train_points.shape[1]

    def scale(self, X_raw) -> np.ndarray:
        X = np.asarray(X_raw, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InvalidInputError(f"model expects {self.d} inputs, got shape {np.shape(X_raw)}")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("query points must be finite")
        return (X - self.input_min) / self.input_range

    @cached_property
    def train_kernel(self) -> np.ndarray:
        return self.design.cross_mixture(self.train_points, None)

    @cached_property
    def factor(self):
        # jitter is taken from the fit so a reloaded model factorizes identically
        return factorize(self.train_kernel, self.eta + self.jitter)[0]

    def active_variables(self) -> set[int]:
        return {j for s in self.design.support for j in s.dims}

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "eta": self.eta,
            "tau2_hat": self.tau2_hat,
            "y_center": self.y_center,
            "jitter": self.jitter,
            "q_value": self.q_value,
            "input_scale": {
                "min": self.input_min.tolist(),
                "range": self.input_range.tolist(),
            },
            "input_names": None if self.input_names is None else list(self.input_names),
            "response_name": self.response_name,
            "support": [
                {"dims": list(s.dims), "theta": s.theta, "weight": w}
                for s, w in self.design.items()
            ],
            "train_points": self.train_points.tolist(),
            "coefficients": self.coefficients.tolist(),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedModel":
        if doc.get("format") != FORMAT_NAME:
            raise InvalidInputError("not an optkernel model document")
        if doc.get("version") != FORMAT_VERSION:
            raise InvalidInputError(f"unsupported model format version {doc.get('version')}")
        support = [KernelSpec(tuple(k["dims"]), k["theta"]) for k in doc["support"]]
        weights = [k["weight"] for k in doc["support"]]
        names = doc.get("input_names")
        return cls(
            design=Design(tuple(support), tuple(weights)),
            coefficients=np.asarray(doc["coefficients"], dtype=float),
            eta=float(doc["eta"]),
            tau2_hat=float(doc["tau2_hat"]),
            train_points=np.asarray(doc["train_points"], dtype=float),
            input_min=np.asarray(doc["input_scale"]["min"], dtype=float),
            input_range=np.asarray(doc["input_scale"]["range"], dtype=float),
            y_center=float(doc["y_center"]),
            jitter=float(doc.get("jitter", 0.0)),
            q_value=float(doc.get("q_value", float("nan"))),
            input_names=None if names is None else tuple(names),
            response_name=doc.get("response_name"),
            metadata=doc.get("metadata") or {},
        )

    def save(self, path) -> None:
        Path(path).write_text(dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "FittedModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_model(
    design: Design,
    X_unit,
    y_centered,
    eta: float,
    input_min=None,
    input_range=None,
    y_center: float = 0.0,
    **extra,
) -> FittedModel:
    """Solve for the coefficients of ``design`` and package a FittedModel."""
    X_unit = np.asarray(X_unit, dtype=float)
    y_centered = np.asarray(y_centered, dtype=float)
    n, d = X_unit.shape
    K = design.cross_mixture(X_unit, None)
    state = solve_state(K, y_centered, eta)
    a = state.a
    tau2 = max(float(y_centered @ a) / n, 0.0)
    return FittedModel(
        design=design,
        coefficients=a,
        eta=float(eta),
        tau2_hat=tau2,
        train_points=X_unit,
        input_min=np.zeros(d) if input_min is None else np.asarray(input_min, dtype=float),
        input_range=np.ones(d) if input_range is None else np.asarray(input_range, dtype=float),
        y_center=float(y_center),
        jitter=state.jitter,
        q_value=state.q_value,
        **extra,
    )


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        # JSON has no inf/nan literals; json.loads accepts these tokens
        return "NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity")
    return format(x, ".17e")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in seq) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
