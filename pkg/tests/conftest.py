import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import LEXICON, TOKENIZER  # noqa: E402

ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture
def tokenizer():
    return TOKENIZER


@pytest.fixture
def lexicon():
    return LEXICON


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for name in sorted(ACCEPTANCE_RESULTS, key=lambda n: int(n.split("_")[2])):
            terminalreporter.write_line(f"{ACCEPTANCE_RESULTS[name]}  {name}")
