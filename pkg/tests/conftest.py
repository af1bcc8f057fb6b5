import numpy as np
import pytest

from bayesload.datagen import ieee33
from bayesload.experiments import im_scenario
from bayesload.zipload import ZipDataset


@pytest.fixture(scope="session")
def feeder():
    return ieee33()


@pytest.fixture(scope="session")
def im_traj():
    return im_scenario()


def synthetic_zip(n, alpha=(0.25, 0.25), sigma=0.1, lo=0.5, hi=1.5, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, n)
    y = alpha[0] * x**2 + alpha[1] * x + (1 - alpha[0] - alpha[1]) + rng.normal(0, sigma, n)
    return ZipDataset(x, y)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
