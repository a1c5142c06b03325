import hypothesis
import numpy as np
import pytest

from optkernel.kernels import KernelSpec, kernel_matrix

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")


def random_instance(rng, n=None, d=3, m=None, eta=None):
    """Random points, response, kernels and their matrices."""
    n = int(rng.integers(4, 15)) if n is None else n
    m = int(rng.integers(1, 4)) if m is None else m
    X = rng.random((n, d))
    y = rng.standard_normal(n)
    specs = []
    while len(specs) < m:
        k = int(rng.integers(1, 3))
        dims = tuple(sorted(rng.choice(np.arange(1, d + 1), size=k, replace=False).tolist()))
        s = KernelSpec(dims, float(10 ** rng.uniform(-1, 2)))
        if s not in specs:
            specs.append(s)
    mats = {s: kernel_matrix(s, X) for s in specs}
    eta = float(10 ** rng.uniform(-2, 0)) if eta is None else eta
    return X, y, specs, mats, eta


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running benchmark acceptance check")


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
