"""Forward stepwise kernel selection.

Each outer iteration scans the candidates not yet in the support, adds the
one with the most negative directional derivative and re-optimizes all
support weights. An optional final pass drops support kernels whose weight
is below ``del_threshold``.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .design import Design, SolveState, mixture_matrix, solve_state
from .errors import InvalidConfigError, InvalidInputError
from .kernels import KernelSpec, kernel_matrix, sq_distances
from .weights import WeightConfig, optimize_weights

log = logging.getLogger(__name__)

INIT_RANDOM = "random"
INIT_BEST_SINGLE = "best-single"
DEFAULT_CACHE_BUDGET = 2**26  # matrix entries (~512 MB of float64)


@dataclass(frozen=True)
class SelectorConfig:
    eta: float = 0.01
    del_threshold: float = 0.05
    tol: float = 0.005
    max_iter: int = 1000
    seed: int = 0
    init: str = INIT_RANDOM
    warm_start: bool = False
    delete: bool = True
    cache_budget: int = DEFAULT_CACHE_BUDGET

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidConfigError(f"eta must be positive, got {self.eta}")
        if not (0.0 <= self.del_threshold < 1.0):
            raise InvalidConfigError(f"del_threshold must lie in [0, 1), got {self.del_threshold}")
        if not self.tol > 0:
            raise InvalidConfigError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise InvalidConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.init not in (INIT_RANDOM, INIT_BEST_SINGLE):
            raise InvalidConfigError(f"init must be {INIT_RANDOM!r} or {INIT_BEST_SINGLE!r}")
        if int(self.seed) < 0:
            raise InvalidConfigError("seed must be non-negative")


class KernelCache:
    """Lazily evaluated kernel matrices on a fixed point set.

    Matrices and per-subset squared distances are kept in LRU order; once
    the number of stored entries exceeds ``budget`` the oldest are evicted
    and recomputed on demand.
    """

    def __init__(self, X, budget: int = DEFAULT_CACHE_BUDGET):
        self.X = np.asarray(X, dtype=float)
        if self.X.ndim != 2:
            raise InvalidInputError(f"X must be 2-D, got shape {self.X.shape}")
        self.n = self.X.shape[0]
        self.budget = int(budget)
        self._store: OrderedDict = OrderedDict()
        self._entries = 0

    def _put(self, key, value):
        self._store[key] = value
        self._entries += value.size
        while self._entries > self.budget and len(self._store) > 1:
            _, old = self._store.popitem(last=False)
            self._entries -= old.size

    def _lookup(self, key):
        value = self._store.get(key)
        if value is not None:
            self._store.move_to_end(key)
        return value

    def distances(self, dims: tuple[int, ...]) -> np.ndarray:
        key = ("dist", dims)
        D = self._lookup(key)
        if D is None:
            D = sq_distances(dims, self.X)
            self._put(key, D)
        return D

    def __getitem__(self, spec: KernelSpec) -> np.ndarray:
        K = self._lookup(spec)
        if K is None:
            spec.check_dimension(self.X.shape[1])
            K = np.exp(-spec.theta * self.distances(spec.dims))
            self._put(spec, K)
        return K

    def __contains__(self, spec) -> bool:
        return spec in self._store

    def __len__(self) -> int:
        return len(self._store)


@dataclass(frozen=True)
class TraceRecord:
    added: KernelSpec
    phi: float
    q_value: float
    support_size: int
    weight_iterations: int


@dataclass
class SelectionTrace:
    initial: KernelSpec | None
    initial_q: float
    records: list[TraceRecord] = field(default_factory=list)
    stop_reason: str = ""
    certificate: bool = False
    min_phi: float = float("nan")
    max_support_phi: float = float("nan")
    cert_eps: float = float("nan")
    q_before_delete: float = float("nan")
    deleted: list[KernelSpec] = field(default_factory=list)

    @property
    def q_values(self) -> list[float]:
        return [self.initial_q] + [r.q_value for r in self.records]

    def to_dict(self) -> dict:
        return {
            "initial": None if self.initial is None else _spec_dict(self.initial),
            "initial_q": self.initial_q,
            "records": [
                {
                    "added": _spec_dict(r.added),
                    "phi": r.phi,
                    "q": r.q_value,
                    "support_size": r.support_size,
                    "weight_iterations": r.weight_iterations,
                }
                for r in self.records
            ],
            "stop_reason": self.stop_reason,
            "certificate": self.certificate,
            "min_phi": self.min_phi,
            "max_support_phi": self.max_support_phi,
            "cert_eps": self.cert_eps,
            "q_before_delete": self.q_before_delete,
            "deleted": [_spec_dict(s) for s in self.deleted],
        }


def _spec_dict(spec: KernelSpec) -> dict:
    return {"dims": list(spec.dims), "theta": spec.theta}


def phi_values(candidates: Sequence[KernelSpec], state: SolveState, cache) -> np.ndarray:
    """Directional derivatives of the loss towards each candidate."""
    a = state.a
    d = np.fromiter((a @ (cache[g] @ a) for g in candidates), dtype=float, count=len(candidates))
    return -state.eta * (d - state.d_mix)


def argmin_phi_scan(candidates: Sequence[KernelSpec], state: SolveState, cache):
    """Candidate with the smallest directional derivative (first index on ties)."""
    if len(candidates) == 0:
        raise InvalidInputError("argmin_phi_scan needs at least one candidate")
    phi = phi_values(candidates, state, cache)
    i = int(np.argmin(phi))
    return candidates[i], float(phi[i])


def ge_certificate(candidates, support, weights, state, cache, tol):
    """Check the equivalence-theorem optimality conditions at ``state``.

    Returns ``(ok, min_phi, max_abs_support_phi, eps)`` with
    ``eps = 10 * tol * max(1, Q)``.
    """
    eps = 10.0 * tol * max(1.0, state.q_value)
    if state.q_value == 0.0:
        return True, 0.0, 0.0, eps
    min_phi = float(np.min(phi_values(list(candidates), state, cache)))
    active = [s for s, w in zip(support, weights) if w > 1e-6]
    sup_phi = float(np.max(np.abs(phi_values(active, state, cache)))) if active else 0.0
    ok = min_phi >= -eps and sup_phi <= eps
    return ok, min_phi, sup_phi, eps


def _unique(specs: Iterable[KernelSpec]) -> list[KernelSpec]:
    seen = set()
    out = []
    for s in specs:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def _warm_start(weights: np.ndarray, mats, new_mat, y, eta, q_prev, m_prev):
    """Starting weights for the enlarged support that improve on ``q_prev``.

    The new kernel enters with mass ``alpha`` (starting at ``1/(m+1)`` and
    halved until the loss decreases); the old weights are scaled by
    ``1 - alpha``.
    """
    alpha = 1.0 / (m_prev + 1)
    for _ in range(40):
        w = np.append(weights * (1.0 - alpha), alpha)
        st = solve_state(mixture_matrix(w, list(mats) + [new_mat]), y, eta)
        if st.q_value < q_prev:
            return w, st
        alpha *= 0.5
    return w, st


def select_kernels(
    candidates: Sequence[KernelSpec],
    X,
    y,
    cfg: SelectorConfig = SelectorConfig(),
    weight_cfg: WeightConfig = WeightConfig(),
    initial: Design | None = None,
    cache: KernelCache | None = None,
):
    """Forward stepwise selection of support kernels.

    Parameters
    ----------
    candidates : sequence of KernelSpec
        Basic kernels to choose from.
    X : array, shape (n, d)
        Inputs scaled to the unit cube.
    y : array, shape (n,)
        Centered response.
    cfg, weight_cfg
        Selector and weight-iteration settings.
    initial : Design, optional
        Design to resume from; its kernels join the candidate pool.
    cache : KernelCache, optional
        Shared matrix cache for ``X``.

    Returns
    -------
    design : Design
    trace : SelectionTrace
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n = y.shape[0]
    if X.ndim != 2 or X.shape[0] != n:
        raise InvalidInputError(f"X shape {X.shape} does not match y length {n}")
    if n < 2:
        raise InvalidInputError("need at least two training points")
    pool = _unique(list(initial.support if initial else []) + list(candidates))
    if not pool:
        raise InvalidConfigError("candidate set is empty")
    if cache is None:
        cache = KernelCache(X, cfg.cache_budget)
    cap = min(n + 2, len(pool))

    if initial is not None:
        support = list(initial.support)
        w = np.asarray(initial.weights, dtype=float)
        first = None
    else:
        if cfg.init == INIT_BEST_SINGLE:
            qs = [solve_state(cache[g], y, cfg.eta).q_value for g in pool]
            first = pool[int(np.argmin(qs))]
        else:
            rng = np.random.default_rng(cfg.seed)
            first = pool[int(rng.integers(len(pool)))]
        support = [first]
        w = np.ones(1)

    state = solve_state(mixture_matrix(w, [cache[s] for s in support]), y, cfg.eta)
    q = state.q_value
    trace = SelectionTrace(first, q)

    if q == 0.0:
        trace.stop_reason = "degenerate"
    else:
        in_support = set(support)
        change = 1.0
        r = 0
        while True:
            if change <= cfg.tol:
                trace.stop_reason = "tol"
                break
            if r >= cfg.max_iter:
                trace.stop_reason = "max_iter"
                break
            if len(support) >= cap:
                trace.stop_reason = "cap"
                break
            remaining = [g for g in pool if g not in in_support]
            best, phi = argmin_phi_scan(remaining, state, cache)
            if phi >= 0:
                trace.stop_reason = "stationary"
                break
            mats = [cache[s] for s in support]
            new_mat = cache[best]
            if cfg.warm_start:
                w0, st0 = _warm_start(w, mats, new_mat, y, cfg.eta, q, len(support))
            else:
                w0, st0 = None, None
            support.append(best)
            in_support.add(best)
            res = optimize_weights(support, cache, y, cfg.eta, weight_cfg, init=w0)
            if st0 is not None and res.q_value > st0.q_value:
                w, state = w0, st0
            else:
                w, state = res.weights, res.state
            r += 1
            change = abs(state.q_value - q) / q if q > 0 else 0.0
            q = state.q_value
            trace.records.append(TraceRecord(best, phi, q, len(support), res.iterations))
            log.debug("added %s phi=%.4g q=%.6g m=%d", best, phi, q, len(support))
            if q == 0.0:
                trace.stop_reason = "degenerate"
                break

    ok, min_phi, sup_phi, eps = ge_certificate(pool, support, w, state, cache, cfg.tol)
    trace.certificate = ok
    trace.min_phi, trace.max_support_phi, trace.cert_eps = min_phi, sup_phi, eps
    trace.q_before_delete = q

    if cfg.delete and len(support) > 1:
        keep = w >= cfg.del_threshold
        if not np.any(keep):
            keep = w == w.max()
        trace.deleted = [s for s, k in zip(support, keep) if not k]
        support = [s for s, k in zip(support, keep) if k]
        w = w[keep]
    return Design.from_weights(support, w), trace
