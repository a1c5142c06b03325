"""Latin hypercube designs on the unit cube."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

RANDOM = "random"
MAXIMIN = "maximin"


def random_lhs(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform point in each of ``n`` strata per column, columns permuted independently."""
    perms = np.argsort(rng.random((n, d)), axis=0)
    return (perms + rng.random((n, d))) / n


def min_distance(X) -> float:
    if len(X) < 2:
        return float("inf")
    return float(pdist(X).min())


def maximin_lhs(n: int, d: int, rng: np.random.Generator, iters: int = 5000) -> np.ndarray:
    """Random LHS improved by swapping two entries within a column.

    A swap keeps every column a valid stratification; it is accepted only
    when the minimum pairwise distance strictly grows, with ties in the
    minimum broken by fewer pairs at that distance.
    """
    X = random_lhs(n, d, rng)
    if n < 3:
        return X
    D = squareform(pdist(X))
    np.fill_diagonal(D, np.inf)
    best = D.min()
    for _ in range(int(iters)):
        col = rng.integers(d)
        i, j = rng.choice(n, size=2, replace=False)
        Xn = X.copy()
        Xn[i, col], Xn[j, col] = X[j, col], X[i, col]
        rows = np.sqrt(((Xn[[i, j]][:, None, :] - Xn[None, :, :]) ** 2).sum(-1))
        Dn = D.copy()
        Dn[[i, j], :] = rows
        Dn[:, [i, j]] = rows.T
        Dn[i, i] = Dn[j, j] = np.inf
        cand = Dn.min()
        if cand > best or (cand == best and (Dn == cand).sum() < (D == best).sum()):
            X, D, best = Xn, Dn, cand
    return X


def lhs(n: int, d: int, seed=None, kind: str = RANDOM, maximin_iters: int = 5000) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if n < 1 or d < 1:
        raise ValueError("lhs needs n >= 1 and d >= 1")
    if kind == RANDOM:
        return random_lhs(n, d, rng)
    if kind == MAXIMIN:
        return maximin_lhs(n, d, rng, maximin_iters)
    raise ValueError(f"unknown lhs kind {kind!r}")
