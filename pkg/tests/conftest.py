import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from defectors import strategy as st  # noqa: E402
from defectors.game import PayoffConfig, payoff_matrix_from  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def case_i():
    return payoff_matrix_from(PayoffConfig(10, 0))


@pytest.fixture
def case_iia():
    return payoff_matrix_from(PayoffConfig(10, 5))


@pytest.fixture
def case_iib():
    return payoff_matrix_from(PayoffConfig(10, 10))


@pytest.fixture
def allc():
    return st.all_cooperate()


@pytest.fixture
def alld():
    return st.all_defect()


@pytest.fixture
def tft():
    return st.tit_for_tat()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
