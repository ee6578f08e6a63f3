import mpmath
import numpy as np
import pytest


def mp_weighted_log_mean(a, b, v, dps=80):
    """Literal two-term formula at high precision (independent of the kernel form)."""
    with mpmath.workdps(dps):
        a, b, v = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(v)
        if a == b:
            return a
        if v == 0:
            return a
        if v == 1:
            return b
        g = a ** (1 - v) * b ** v
        return ((1 - v) / v * (a - g) + v / (1 - v) * (g - b)) / (mpmath.log(a) - mpmath.log(b))


def mp_log_mean(a, b, dps=80):
    with mpmath.workdps(dps):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        if a == b:
            return a
        return (a - b) / (mpmath.log(a) - mpmath.log(b))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
