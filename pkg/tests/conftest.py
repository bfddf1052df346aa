from __future__ import annotations

import os
from pathlib import Path

import pytest

from bmcsweep.checker.mock import format_fixture
from bmcsweep.config import FunctionMode, RunConfig

DATA = Path(__file__).parent / "data"


def read_data(name: str) -> str:
    return (DATA / name).read_text(encoding="utf-8")


@pytest.fixture
def re_print_trace() -> str:
    return read_data("re_print_trace.txt")


@pytest.fixture
def hashmap_trace() -> str:
    return read_data("hashmap_trace.txt")


def write_c(root, name: str, text: str) -> str:
    path = os.path.join(str(root), name)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def write_fixture(root, rows, outputs=None) -> str:
    """Write checker output files plus a fixture table; returns the table path."""
    root = str(root)
    for name, text in (outputs or {}).items():
        with open(os.path.join(root, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    path = os.path.join(root, "fixture.tsv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_fixture(rows))
    return path


def mock_config(target, out_dir, fixture, mode=FunctionMode.PER_FUNCTION, **kw) -> RunConfig:
    return RunConfig(target=str(target), function_mode=mode, output_dir=str(out_dir),
                     mock_fixture=fixture, **kw)


# --- acceptance reporting ----------------------------------------------------
# Tests marked @pytest.mark.criterion(n, title) get one PASS/FAIL/SKIP line
# each, printed at the end of the session from their real outcome.

_criteria: dict[int, str] = {}


@pytest.fixture
def note(request):
    """Attach a short measurement to the criterion line."""
    def add(text: str) -> None:
        request.node.user_properties.append(("detail", text))
        print(text)
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        details = "; ".join(v for k, v in item.user_properties if k == "detail")
        if rep.skipped and isinstance(rep.longrepr, tuple):
            details = rep.longrepr[2]
        line = f"criterion {n} [{status}] {title}"
        _criteria[n] = line + (f": {details}" if details else "")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(_criteria[n])
