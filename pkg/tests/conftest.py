import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_matrix(rng, m, n, complex_=True):
    if complex_:
        return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return rng.standard_normal((m, n))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])
