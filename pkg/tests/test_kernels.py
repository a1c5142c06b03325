import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optkernel.errors import InvalidConfigError, InvalidSpecError
from optkernel.kernels import (
    KernelSpec,
    ThetaGrid,
    candidate_grid,
    eval_kernel,
    kernel_matrix,
    one_dim_subsets,
)
from itertools import combinations


def test_eval_kernel_zero_distance():
    x = np.array([0.3, 0.8])
    assert eval_kernel(KernelSpec((1,), 1.0), x, x) == 1.0


def test_eval_kernel_unit_distance():
    v = eval_kernel(KernelSpec((1,), 1.0), [0, 0.5], [1, 0.5])
    assert v == pytest.approx(math.exp(-1), abs=1e-15)
    assert v == pytest.approx(0.3678794, abs=1e-7)


def test_eval_kernel_two_dims():
    v = eval_kernel(KernelSpec((1, 2), 0.01), [0, 0], [1, 1])
    assert v == pytest.approx(0.9801987, abs=1e-7)


def test_eval_kernel_out_of_range_dimension():
    with pytest.raises(InvalidSpecError):
        eval_kernel(KernelSpec((3,), 1.0), [0, 0], [1, 1])


@pytest.mark.parametrize(
    "dims, theta",
    [((), 1.0), ((2, 1), 1.0), ((1, 1), 1.0), ((0,), 1.0), ((1,), 0.0), ((1,), -1.0), ((1,), float("inf"))],
)
def test_kernel_spec_rejects_invalid(dims, theta):
    with pytest.raises(InvalidSpecError):
        KernelSpec(dims, theta)


def test_kernel_matrix_single_point():
    K = kernel_matrix(KernelSpec((1,), 5.0), [[0.2, 0.4]])
    assert K.tolist() == [[1.0]]


def test_kernel_matrix_matches_double_loop(rng):
    X = rng.random((5, 3))
    spec = KernelSpec((2,), 3.0)
    K = kernel_matrix(spec, X)
    oracle = np.empty((5, 5))
    for i in range(5):
        for j in range(5):
            oracle[i, j] = math.exp(-3.0 * (X[i, 1] - X[j, 1]) ** 2)
    np.testing.assert_allclose(K, oracle, rtol=0, atol=1e-14)


def test_kernel_matrix_cross_shape(rng):
    X, Z = rng.random((4, 3)), rng.random((7, 3))
    K = kernel_matrix(KernelSpec((1, 3), 2.0), X, Z)
    assert K.shape == (4, 7)
    assert K[2, 5] == pytest.approx(eval_kernel(KernelSpec((1, 3), 2.0), X[2], Z[5]), abs=1e-15)


points = st.integers(1, 50).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2**32 - 1), st.floats(0.01, 1000.0))
)


@given(points, st.lists(st.integers(1, 4), min_size=1, max_size=3, unique=True))
def test_kernel_matrix_properties(args, dims):
    n, seed, theta = args
    X = np.random.default_rng(seed).random((n, 4))
    spec = KernelSpec(tuple(sorted(dims)), theta)
    K = kernel_matrix(spec, X)
    assert np.array_equal(K, K.T)
    assert np.all(np.diag(K) == 1.0)
    assert np.all(K >= 0) and np.all(K <= 1.0)
    # exp underflows to 0 past an exponent of about -745
    exponent = theta * ((X[:, None, spec.columns] - X[None, :, spec.columns]) ** 2).sum(-1)
    assert np.all(K[exponent < 700] > 0)
    assert np.linalg.eigvalsh(K).min() >= -1e-8 * n


@given(
    st.lists(st.floats(0, 1), min_size=3, max_size=3),
    st.lists(st.floats(0, 1), min_size=3, max_size=3),
    st.floats(0.01, 100),
)
def test_eval_kernel_bounds_and_symmetry(x1, x2, theta):
    spec = KernelSpec((1, 3), theta)
    v = eval_kernel(spec, x1, x2)
    assert 0 < v <= 1
    assert v == eval_kernel(spec, x2, x1)
    if x1[0] == x2[0] and x1[2] == x2[2]:
        assert v == 1.0


def test_default_theta_grid():
    g = ThetaGrid.default()
    assert len(g) == 25
    assert g.values[0] == pytest.approx(0.01) and g.values[-1] == pytest.approx(900)
    assert list(g.values) == sorted(g.values)


def test_theta_grid_rejects_empty_and_nonpositive():
    with pytest.raises(InvalidConfigError):
        ThetaGrid(())
    with pytest.raises(InvalidConfigError):
        ThetaGrid((1.0, -2.0))


def test_candidate_grid_counts():
    g = ThetaGrid.default()
    assert len(candidate_grid([(1,), (2,)], g)) == 50
    subsets = one_dim_subsets(6) + list(combinations(range(1, 7), 2))
    assert len(candidate_grid(subsets, g)) == 6 * 25 + 15 * 25 == 525


def test_candidate_grid_ordering_is_deterministic():
    g = ThetaGrid((3.0, 1.0, 2.0))
    specs = candidate_grid([(2,), (1, 3)], g)
    assert specs == candidate_grid([(2,), (1, 3)], g)
    assert [(s.dims, s.theta) for s in specs] == [
        ((2,), 1.0), ((2,), 2.0), ((2,), 3.0), ((1, 3), 1.0), ((1, 3), 2.0), ((1, 3), 3.0),
    ]


def test_candidate_grid_empty_grid():
    with pytest.raises(InvalidConfigError):
        candidate_grid([(1,)], None)
