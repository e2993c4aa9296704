import os
import sys

import gmpy2
import mpmath
import pytest

sys.path.insert(0, os.path.dirname(__file__))
mpmath.mp.dps = 100

from carleman.construction import build_counterexample  # noqa: E402
from carleman.sequences import GrowthSequence, WidenedSequence  # noqa: E402


@pytest.fixture(autouse=True)
def _prec256():
    with gmpy2.context(precision=256):
        yield


@pytest.fixture(scope="session")
def factorial_build():
    f = GrowthSequence("factorial")
    return build_counterexample(f, f, 2)


@pytest.fixture(scope="session")
def log_pipeline():
    M = GrowthSequence("log")
    return M, WidenedSequence(M)


@pytest.fixture(scope="session")
def widened_build_j1(log_pipeline):
    M, K = log_pipeline
    return build_counterexample(M, K, 1)


@pytest.fixture(scope="session")
def widened_build_j2(log_pipeline):
    M, K = log_pipeline
    return build_counterexample(M, K, 2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
