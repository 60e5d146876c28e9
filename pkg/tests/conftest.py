import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def prob_vectors(min_size=1, max_size=6, allow_zeros=True):
    """Hypothesis strategy for probability vectors."""
    entries = st.floats(0.05, 1.0) if not allow_zeros else st.one_of(
        st.just(0.0), st.floats(1e-3, 1.0))
    return hnp.arrays(np.float64, st.integers(min_size, max_size), elements=entries).filter(
        lambda x: x.sum() > 0.05).map(lambda x: x / x.sum())


def full_tuples(d=2, min_rows=2, max_rows=5):
    """Strategy for full-support tuples with normalized columns."""
    return st.integers(min_rows, max_rows).flatmap(
        lambda n: hnp.arrays(np.float64, (n, d), elements=st.floats(0.05, 1.0))
    ).map(lambda X: X / X.sum(axis=0, keepdims=True))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_full_tuple(rng, n, d):
    X = rng.exponential(size=(n, d)) + 1e-3
    return X / X.sum(axis=0, keepdims=True)


ACCEPTANCE_LINES = []


def record_acceptance(number, title, ok, detail):
    """Print and remember one pass/fail line for an acceptance criterion."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
