import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def spd_well():
    from fracpow.matrices import gen_spd

    return gen_spd(100, 1e2, seed=0)


@pytest.fixture(scope="session")
def spd_ill():
    from fracpow.matrices import gen_spd

    return gen_spd(100, 1e7, seed=0)


@pytest.fixture(scope="session")
def ns_well():
    from fracpow.matrices import gen_nonsymmetric

    return gen_nonsymmetric(100, 1e2, seed=0)


@pytest.fixture(scope="session")
def ns_ill():
    from fracpow.matrices import gen_nonsymmetric

    return gen_nonsymmetric(100, 1e7, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, n, cond=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.geomspace(1.0, cond, n)
    A = (Q * d) @ Q.T
    return 0.5 * (A + A.T)


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
