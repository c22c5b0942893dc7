import datetime as dt

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

N = 366


def point_mass(lead, n=N):
    x = np.zeros(n)
    x[lead] = 1.0
    return x


def random_pmf(rng, n=N, sparsity=0.0):
    x = rng.random(n) ** 3
    if sparsity:
        x[rng.random(n) < sparsity] = 0.0
        if x.sum() == 0:
            x[0] = 1.0
    return x / x.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def day0():
    return dt.date(2020, 1, 1)


def _to_pmf(entries, n=N):
    x = np.zeros(n)
    for k, v in entries.items():
        x[k] = v
    return x / x.sum()


def sparse_pmfs(n=N, max_atoms=40):
    """Hypothesis strategy: pmfs on ``n`` points with up to ``max_atoms`` nonzero entries."""
    from hypothesis import strategies as st

    return st.dictionaries(
        st.integers(0, n - 1), st.floats(1e-6, 1.0, allow_nan=False), min_size=1, max_size=max_atoms
    ).map(lambda e: _to_pmf(e, n))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
