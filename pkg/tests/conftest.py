import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_ket(rng, D, support=None):
    n = D if support is None else support
    v = np.zeros(D, dtype=complex)
    v[:n] = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


# acceptance criterion -> PASS/FAIL line, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
