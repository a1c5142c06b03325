"""Stage-wise kernel learning with heredity-driven candidate expansion.

Stage 1 selects among 1-dim kernels. Each later stage adds kernels on
``dim + 1`` variables built from the variables active so far, keeps the
previously selected kernels and resumes forward selection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np

from .design import Design, loss_q
from .errors import InvalidConfigError, InvalidInputError
from .kernels import KernelSpec, ThetaGrid, candidate_grid, one_dim_subsets
from .model import FittedModel, build_model
from .selector import KernelCache, SelectionTrace, SelectorConfig, select_kernels
from .weights import WeightConfig

log = logging.getLogger(__name__)


class Heredity(str, Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class StageConfig:
    max_dim: int = 4
    heredity: Heredity = Heredity.STRONG
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    weights: WeightConfig = field(default_factory=WeightConfig)
    theta_grid: ThetaGrid = field(default_factory=ThetaGrid.default)

    def __post_init__(self):
        if int(self.max_dim) < 1:
            raise InvalidConfigError(f"max_dim must be >= 1, got {self.max_dim}")
        object.__setattr__(self, "heredity", Heredity(self.heredity))

    @property
    def tol(self) -> float:
        return self.selector.tol


@dataclass
class StageTrace:
    dim: int
    n_candidates: int
    selection: SelectionTrace
    q_value: float
    active: list[int]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "n_candidates": self.n_candidates,
            "q": self.q_value,
            "active": self.active,
            "selection": self.selection.to_dict(),
        }


def active_variables(design: Design) -> set[int]:
    """Union of the dimensions used by the support kernels."""
    return {j for s in design.support for j in s.dims}


def expand_subsets(active, d: int, next_dim: int, mode) -> list[tuple[int, ...]]:
    mode = Heredity(mode)
    if next_dim < 2:
        raise InvalidInputError("expansion starts at dimension 2")
    active = set(active)
    if mode is Heredity.STRONG:
        return list(combinations(sorted(active), next_dim))
    return [c for c in combinations(range(1, d + 1), next_dim) if active.intersection(c)]


def expand_candidates(active, d: int, next_dim: int, mode, grid: ThetaGrid) -> list[KernelSpec]:
    """Kernels on ``next_dim`` variables allowed by the heredity rule.

    Strong heredity uses subsets drawn entirely from ``active``; weak
    heredity uses every subset of ``1..d`` that meets ``active``.
    """
    return candidate_grid(expand_subsets(active, d, next_dim, mode), grid)


def fit_stagewise(X, y, cfg: StageConfig = StageConfig(), cache: KernelCache | None = None):
    """Run the staged selection on unit-cube inputs and a centered response.

    Returns
    -------
    model : FittedModel
        Identity input scaling and zero response center; callers working
        in raw units replace those fields.
    stages : list of StageTrace
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InvalidInputError(f"X shape {X.shape} does not match y length {y.shape[0]}")
    d = X.shape[1]
    if cache is None:
        cache = KernelCache(X, cfg.selector.cache_budget)
    sel = cfg.selector

    pool = candidate_grid(one_dim_subsets(d), cfg.theta_grid)
    design, trace = select_kernels(pool, X, y, sel, cfg.weights, cache=cache)
    q = _post_delete_q(design, trace, y, sel.eta, cache)
    stages = [StageTrace(1, len(pool), trace, q, sorted(active_variables(design)))]
    log.info("stage 1: %d kernels, q=%.6g, active=%s", len(design), q, stages[-1].active)

    dim = 1
    while q > 0 and dim < cfg.max_dim:
        dim += 1
        new = expand_candidates(active_variables(design), d, dim, cfg.heredity, cfg.theta_grid)
        if not new:
            break
        pool = pool + [g for g in new if g not in set(pool)]
        q_prev = q
        design, trace = select_kernels(pool, X, y, sel, cfg.weights, initial=design, cache=cache)
        q = _post_delete_q(design, trace, y, sel.eta, cache)
        stages.append(StageTrace(dim, len(pool), trace, q, sorted(active_variables(design))))
        log.info("stage %d: %d kernels, q=%.6g, active=%s", dim, len(design), q, stages[-1].active)
        if abs(q_prev - q) <= cfg.tol * q_prev:
            break

    model = build_model(design, X, y, sel.eta)
    return model, stages


def _post_delete_q(design: Design, trace: SelectionTrace, y, eta, cache) -> float:
    if not trace.deleted:
        return trace.q_before_delete
    return loss_q(design, None, y, eta, base=cache)[0]
