from math import comb

import numpy as np
import pytest

from optkernel.errors import InvalidConfigError, InvalidInputError
from optkernel.kernels import ThetaGrid
from optkernel.selector import SelectorConfig
from optkernel.stagewise import (
    Heredity,
    StageConfig,
    active_variables,
    expand_candidates,
    expand_subsets,
    fit_stagewise,
)
from optkernel.weights import WeightConfig

GRID = ThetaGrid.default()


@pytest.mark.parametrize(
    "active,d,dim,mode,count",
    [
        ({1, 2, 3}, 6, 2, "strong", 3),
        ({1, 2, 3}, 6, 3, "strong", 1),
        ({4}, 6, 2, "strong", 0),
        ({1, 2, 3}, 6, 2, "weak", comb(6, 2) - comb(3, 2)),
        ({2}, 5, 2, "weak", 4),
        ({1, 2}, 4, 3, "weak", comb(4, 3)),
    ],
)
def test_expansion_counts(active, d, dim, mode, count):
    subsets = expand_subsets(active, d, dim, mode)
    assert len(subsets) == count
    assert len(expand_candidates(active, d, dim, mode, GRID)) == count * len(GRID)


def test_strong_subsets_inside_active():
    for s in expand_subsets({2, 5, 7}, 9, 2, Heredity.STRONG):
        assert set(s) <= {2, 5, 7}


def test_weak_subsets_meet_active():
    for s in expand_subsets({2, 5}, 9, 3, Heredity.WEAK):
        assert {2, 5} & set(s)
        assert list(s) == sorted(s)


def test_expand_rejects_dim_one():
    with pytest.raises(InvalidInputError):
        expand_subsets({1}, 3, 1, "strong")


def test_bad_heredity_rejected():
    with pytest.raises(ValueError):
        expand_subsets({1}, 3, 2, "medium")


def test_config_validation():
    with pytest.raises(InvalidConfigError):
        StageConfig(max_dim=0)


def additive_problem(seed=0, n=60, d=4):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = np.sin(2 * np.pi * X[:, 0]) + X[:, 2] ** 2
    return X, y - y.mean()


def test_max_dim_one_runs_single_stage():
    X, y = additive_problem()
    model, stages = fit_stagewise(X, y, StageConfig(max_dim=1))
    assert len(stages) == 1
    assert all(len(s.dims) == 1 for s in model.design.support)
    # stage 1 covers every input exactly once per grid value
    assert stages[0].n_candidates == X.shape[1] * len(GRID)


@pytest.mark.parametrize("mode", ["strong", "weak"])
def test_stage_structure_and_monotone_loss(mode):
    X, y = additive_problem(1)
    cfg = StageConfig(heredity=mode, selector=SelectorConfig(eta=0.01, seed=3))
    model, stages = fit_stagewise(X, y, cfg)
    q = [s.q_value for s in stages]
    # resuming keeps the previous support, so the pre-delete loss can only fall
    for prev, st in zip(stages, stages[1:]):
        assert st.selection.q_before_delete <= prev.q_value * (1 + 1e-12)
        assert st.dim == prev.dim + 1
    for prev, st in zip(stages, stages[1:]):
        added = [r.added for r in st.selection.records]
        for spec in added:
            if len(spec.dims) < 2:
                continue
            if mode == "strong":
                assert set(spec.dims) <= set(prev.active)
            else:
                assert set(spec.dims) & set(prev.active)
    assert model.q_value == pytest.approx(q[-1], rel=1e-9)


def test_recovers_active_set():
    X, y = additive_problem(2, n=80, d=5)
    model, _ = fit_stagewise(X, y, StageConfig(selector=SelectorConfig(eta=0.005)))
    assert active_variables(model.design) == {1, 3}


def test_deterministic():
    X, y = additive_problem(4)
    cfg = StageConfig(selector=SelectorConfig(seed=9))
    m1, s1 = fit_stagewise(X, y, cfg)
    m2, s2 = fit_stagewise(X, y, cfg)
    assert m1.design == m2.design
    assert np.array_equal(m1.coefficients, m2.coefficients)
    assert [s.to_dict() for s in s1] == [s.to_dict() for s in s2]


def test_zero_response_stops_after_first_stage():
    X, _ = additive_problem()
    model, stages = fit_stagewise(X, np.zeros(X.shape[0]))
    assert len(stages) == 1
    assert model.q_value == 0.0


def test_weights_config_threaded_through():
    X, y = additive_problem()
    cfg = StageConfig(max_dim=1, weights=WeightConfig(max_iter=1))
    _, stages = fit_stagewise(X, y, cfg)
    assert all(r.weight_iterations <= 1 for r in stages[0].selection.records)


def test_shape_mismatch():
    with pytest.raises(InvalidInputError):
        fit_stagewise(np.zeros((5, 2)), np.zeros(4))
