import sys
from pathlib import Path

import pytest

from pbracket import DiscreteSpace

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture
def die():
    return DiscreteSpace([1, 2, 3, 4, 5, 6], ["1/6"] * 6)


@pytest.fixture
def models_dir():
    return MODELS


def pytest_terminal_summary(terminalreporter):
    # the acceptance module records one line per criterion; repeat them at the end
    test_acceptance = sys.modules.get("tests.test_acceptance")
    if test_acceptance is not None and test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.report_lines():
            terminalreporter.write_line(line)
