from __future__ import annotations

from pathlib import Path

import pytest

from abducta.log import parse_log, parse_trace
from abducta.model import parse_model

DATA = Path(__file__).resolve().parent.parent / "data"


def load_model(name: str = "pos.json"):
    return parse_model((DATA / name).read_text())


def load_trace(name: str):
    return parse_trace((DATA / name).read_text())


def load_log(name: str):
    return parse_log((DATA / name).read_text())


@pytest.fixture
def pos():
    return load_model()


@pytest.fixture
def data_dir() -> Path:
    return DATA


# one line per acceptance criterion, repeated at the end of the session
ACCEPTANCE: list[str] = []


def report(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
