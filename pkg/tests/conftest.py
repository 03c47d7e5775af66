import os
import re
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from aggrfix import parse_program
from aggrfix.structures import instantiate

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"
SEED = int(os.environ.get("AGGRFIX_SEED", "0"))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def program_text(name: str) -> str:
    return (PROGRAMS / f"{name}.agg").read_text()


def load(name: str):
    return parse_program(program_text(name))


def loaded(name: str):
    p = load(name)
    return p, instantiate(p)


@pytest.fixture
def seed():
    return SEED


# one PASS/FAIL line per acceptance criterion

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes: dict = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or "test_acceptance.py" not in report.nodeid:
        return
    n = int(m.group(1))
    if report.when == "call" or report.failed:
        _outcomes.setdefault(n, []).append(report.passed and not report.failed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        ok = all(_outcomes[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}")
