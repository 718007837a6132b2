import os
from importlib import resources
from pathlib import Path

import pytest

from stvparadox.ballot_io import parse_blt

GOLDEN = Path(__file__).parent / "golden"
CORPUS_ENV = "STVPARADOX_SCOT_CORPUS"


def load_fixture(name):
    text = resources.files("stvparadox").joinpath("fixtures", f"{name}.blt").read_text(encoding="utf-8")
    return parse_blt(text)


@pytest.fixture(scope="session")
def p2():
    return load_fixture("p2")


@pytest.fixture(scope="session")
def table1():
    return load_fixture("table1")


@pytest.fixture(scope="session")
def bute():
    return load_fixture("bute2021")


@pytest.fixture(scope="session")
def table6():
    return load_fixture("table6")


@pytest.fixture(scope="session")
def corpus_dir():
    path = os.environ.get(CORPUS_ENV)
    if not path or not Path(path).is_dir():
        pytest.skip(f"external Scottish corpus not available (set {CORPUS_ENV})")
    return Path(path)


_criteria = []


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker:
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.skipped):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        status = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
        _criteria.append((marker, status))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _criteria:
        terminalreporter.write_line(f"[{status}] {label}")
