import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qp1qc.model import Qp1qcInstance

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ZERO2 = np.zeros(2)


def example_51():
    return Qp1qcInstance(np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), ZERO2, ZERO2, 0.0)


def example_52():
    return Qp1qcInstance(np.diag([0.0, 1.0]), np.array([[0.0, -1.0], [-1.0, 0.0]]), ZERO2, ZERO2, -2.0)


def example_53():
    return Qp1qcInstance(np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), ZERO2, ZERO2, 0.0)


EX31_A = np.array([[1.0, 0.0], [0.0, 0.0]])
EX31_B = np.array([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def ex51():
    return example_51()


@pytest.fixture
def ex52():
    return example_52()


@pytest.fixture
def ex53():
    return example_53()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
