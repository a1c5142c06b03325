import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optkernel.bench import ExperimentSpec, fp_fn, run_experiment, standard_rmse
from optkernel.errors import InvalidConfigError, InvalidInputError
from optkernel.lhs import lhs, maximin_lhs, min_distance, random_lhs
from optkernel.stagewise import StageConfig
from optkernel.testfunctions import BOREHOLE_RANGES, borehole, get_function, michalewicz

MICH_P2_ORACLE = 1.801140718473825  # x = (2.20, 1.57), k = 10
BOREHOLE_MID_ORACLE = 70.87291263681894


def mich_scalar(x, k=10):
    total = 0.0
    for j, xj in enumerate(x, start=1):
        total += math.sin(xj) * math.sin(j * xj * xj / math.pi) ** (2 * k)
    return total


def borehole_scalar(rw, r, tu, hu, tl, hl, L, kw):
    lr = math.log(r / rw)
    return 2 * math.pi * tu * (hu - hl) / (lr * (1 + 2 * L * tu / (lr * rw * rw * kw) + tu / tl))


def test_michalewicz_examples():
    assert michalewicz([np.pi / 2]) == pytest.approx(2.0**-10, rel=1e-12)
    assert michalewicz(np.zeros(4)) == 0.0
    assert michalewicz([2.20, 1.57]) == pytest.approx(MICH_P2_ORACLE, rel=1e-12)


def test_borehole_midpoint():
    mid = [(lo + hi) / 2 for _, lo, hi in BOREHOLE_RANGES]
    assert borehole(mid) == pytest.approx(BOREHOLE_MID_ORACLE, rel=1e-12)


def test_functions_match_scalar_oracles(rng):
    U = rng.random((100, 8))
    mich = get_function("michalewicz")
    np.testing.assert_allclose(mich(U[:, :5]), [mich_scalar(x) for x in mich.from_unit(U[:, :5])], rtol=1e-12)
    bh = get_function("borehole")
    np.testing.assert_allclose(bh(U), [borehole_scalar(*x) for x in bh.from_unit(U)], rtol=1e-12)


def test_borehole_monotone_in_heads(rng):
    x = np.array([(lo + hi) / 2 for _, lo, hi in BOREHOLE_RANGES])
    up, down = x.copy(), x.copy()
    up[3] += 10
    down[5] -= 10
    assert borehole(up) > borehole(x)
    assert borehole(down) > borehole(x)


def test_borehole_domain_error():
    x = np.array([(lo + hi) / 2 for _, lo, hi in BOREHOLE_RANGES])
    x[1] = x[0]
    with pytest.raises(InvalidInputError):
        borehole(x)
    with pytest.raises(InvalidInputError):
        borehole(np.ones(7))


def test_unknown_function():
    with pytest.raises(InvalidConfigError):
        get_function("rosenbrock")


def assert_stratified(X):
    n = X.shape[0]
    bins = np.floor(X * n).astype(int)
    for col in bins.T:
        assert sorted(col.tolist()) == list(range(n))


@given(st.integers(1, 30), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_lhs_stratification(n, d, seed):
    assert_stratified(lhs(n, d, seed))
    assert_stratified(lhs(n, d, seed, kind="maximin", maximin_iters=50))


def test_lhs_single_point():
    X = lhs(1, 3, 0)
    assert X.shape == (1, 3) and np.all((0 <= X) & (X < 1))


def test_lhs_bad_args():
    with pytest.raises(ValueError):
        lhs(0, 2)
    with pytest.raises(ValueError):
        lhs(3, 2, kind="sobol")


@pytest.mark.parametrize("seed", range(5))
def test_maximin_improves_on_initial(seed):
    init = random_lhs(10, 2, np.random.default_rng(seed))
    opt = maximin_lhs(10, 2, np.random.default_rng(seed), iters=5000)
    assert min_distance(opt) >= min_distance(init)
    assert_stratified(opt)


def test_standard_rmse_examples():
    y = np.array([0.0, 1.0, 2.0])
    assert standard_rmse(y, y) == 0.0
    assert standard_rmse(y, np.full(3, y.mean())) == pytest.approx(1.0)
    assert standard_rmse(y, [0.0, 1.0, 1.0]) == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    with pytest.raises(ValueError):
        standard_rmse([1.0, 1.0], [1.0, 2.0])


@given(
    st.integers(0, 2**32 - 1),
    st.floats(-1e3, 1e3).filter(lambda a: abs(a) > 1e-3),
    st.floats(-1e3, 1e3),
)
def test_standard_rmse_affine_invariant(seed, a, b):
    rng = np.random.default_rng(seed)
    y, yh = rng.standard_normal(20), rng.standard_normal(20)
    assert standard_rmse(a * y + b, a * yh + b) == pytest.approx(standard_rmse(y, yh), rel=1e-10, abs=1e-12)


def test_fp_fn_examples():
    assert fp_fn({1, 2}, {1, 2}) == (0, 0)
    assert fp_fn(set(), {1, 2, 3}) == (0, 3)
    assert fp_fn({1, 2, 9}, {1, 2, 3}, d=10) == (1, 1)
    with pytest.raises(ValueError):
        fp_fn({11}, {1}, d=10)


@pytest.mark.parametrize(
    "kw",
    [dict(reps=0), dict(p=7, d=6), dict(p=0), dict(n_train=1), dict(function="borehole", p=3, d=10),
     dict(function="csv")],
)
def test_spec_validation(kw):
    with pytest.raises(InvalidConfigError):
        ExperimentSpec(**kw)


LINEAR = ExperimentSpec(function="linear", d=3, p=1, n_train=50, n_test=200, reps=1, seed=4,
                        maximin_iters=200)


def test_linear_smoke_run():
    rep = run_experiment(LINEAR).replications[0]
    assert not rep.failed
    assert rep.rmse <= 0.05
    assert (rep.fp, rep.fn) == (0, 0)


def test_bench_bit_reproducible():
    spec = ExperimentSpec(function="michalewicz", d=4, p=2, n_train=40, n_test=100, reps=2, seed=3,
                          maximin_iters=100, stage=StageConfig(max_dim=2))
    a, b = run_experiment(spec), run_experiment(spec)
    for ra, rb in zip(a.replications, b.replications):
        assert ra.active_columns == rb.active_columns
        assert ra.identified == rb.identified
        assert ra.rmse == rb.rmse and ra.eta == rb.eta
    assert a.table() == b.table()


def test_report_layout():
    rep = run_experiment(LINEAR)
    head, row = rep.table().splitlines()
    assert head.split("\t") == ["method", "RMSE(sd)", "FP", "FN"]
    assert row.startswith("optK\t")
    doc = rep.to_dict()
    assert doc["aggregate"]["replications"] == 1
    assert doc["spec"]["stage"]["tol"] == 0.005
