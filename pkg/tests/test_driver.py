import os

import pytest

from bmcsweep.checker import CheckerRun, MockBackend
from bmcsweep.config import FunctionMode, RunConfig
from bmcsweep.driver import (
    EXIT_CLEAN,
    EXIT_INTERRUPTED,
    EXIT_VIOLATIONS,
    Orchestrator,
    exit_code_for,
    plan,
)
from bmcsweep.errors import ConfigError, InputError
from bmcsweep.report import read_summary

from conftest import mock_config, write_c, write_fixture

PROJECT = {
    "a.c": """\
int helper(int x) { return x / 2; }
int risky(int *p) { return helper(*p); }
int main(void) { int v = 1; return risky(&v); }
""",
    "b.c": """\
#include <stdlib.h>
int alloc(int n) { void *p = malloc(n); free(p); return 0; }
int calm(int n) { return n + 1; }
""",
    "empty.c": "/* nothing here */\n",
}

DZ_OUT = ("Violated property:\nfile b.c line 3 function calm\ndivision by zero\nn != 0\n\n"
          "VERIFICATION FAILED\n")


@pytest.fixture
def project(tmp_path):
    src = tmp_path / "src"
    for name, text in PROJECT.items():
        write_c(src, name, text)
    fixture = write_fixture(tmp_path, [("b.c", "calm", 1, "dz.txt")], {"dz.txt": DZ_OUT})
    return src, fixture


def test_plan_prioritized(project, tmp_path):
    src, fx = project
    p = plan(mock_config(src, tmp_path / "out", fx, FunctionMode.PRIORITIZED))
    names = [(os.path.basename(c.file.path), c.name, c.function.grade) for c in p.checks()]
    # helper and risky are reached from main; empty.c has no definitions
    assert names == [("a.c", "main", 0), ("b.c", "alloc", 3), ("b.c", "calm", 0)]
    assert p.files_scanned == 3 and p.functions_extracted == 5


def test_plan_per_function_keeps_source_order(project, tmp_path):
    src, fx = project
    p = plan(mock_config(src, tmp_path / "out", fx, FunctionMode.PER_FUNCTION))
    assert [c.name for c in p.checks()] == ["helper", "risky", "main", "alloc", "calm"]


def test_plan_main_only(project, tmp_path):
    src, fx = project
    p = plan(mock_config(src, tmp_path / "out", fx, FunctionMode.MAIN_ONLY))
    assert [(os.path.basename(c.file.path), c.function) for c in p.checks()] == [
        ("a.c", None), ("b.c", None), ("empty.c", None)]
    assert p.functions_extracted == 5 + 2  # b.c and empty.c count their implicit entry


def test_run_scope_pruning(tmp_path):
    src = tmp_path / "src"
    write_c(src, "a.c", "int main(void) { return util(); }\n")
    write_c(src, "b.c", "int util(void) { return 0; }\nint other(void) { return 1; }\n")
    fx = write_fixture(tmp_path, [])
    per_file = plan(mock_config(src, tmp_path / "o", fx, FunctionMode.PRIORITIZED))
    run_wide = plan(mock_config(src, tmp_path / "o", fx, FunctionMode.PRIORITIZED, call_scope="run"))
    assert [c.name for c in per_file.checks()] == ["main", "util", "other"]
    assert [c.name for c in run_wide.checks()] == ["main", "other"]


def test_full_run_outputs(project, tmp_path):
    src, fx = project
    out = tmp_path / "out"
    orch = Orchestrator(mock_config(src, out, fx, FunctionMode.PRIORITIZED, extended_columns=True))
    report = orch.run()
    assert [n for _, n in orch.ledger] == ["main", "alloc", "calm"]
    assert (out / "report.csv").read_text() == (
        "filename,status,function,line,violation_type,function_start_line,"
        "violation_description,cwes\nb.c,failed,calm,3,DZ,3,Division by Zero,CWE-369\n")
    log = (out / "run.log").read_text()
    assert log.index(":: main ===") < log.index(":: alloc ===") < log.index(":: calm ===")
    s = read_summary(str(out / "summary.txt"))
    assert s["functions_verified"] == "3" and s["violations_total"] == "1"
    assert s["outcome.success"] == "2" and s["outcome.failed"] == "1"
    assert exit_code_for(report.summary) == EXIT_VIOLATIONS
    assert (out / "outcomes.csv").exists()


def test_clean_run_exit_code(project, tmp_path):
    src, _ = project
    fx = write_fixture(tmp_path / "src", [])
    report = Orchestrator(mock_config(src, tmp_path / "out", fx)).run()
    assert exit_code_for(report.summary) == EXIT_CLEAN
    assert (tmp_path / "out" / "report.csv").read_text().count("\n") == 1


def test_parallel_run_matches_sequential(project, tmp_path):
    src, fx = project
    seq = Orchestrator(mock_config(src, tmp_path / "s", fx, FunctionMode.PER_FUNCTION)).run()
    par = Orchestrator(mock_config(src, tmp_path / "p", fx, FunctionMode.PER_FUNCTION,
                                   max_parallel_invocations=4)).run()
    for name in ("report.csv", "run.log"):
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()
    assert [i.function for i in seq.invocations] == [i.function for i in par.invocations]


def test_failing_executor_recorded_as_error(project, tmp_path):
    src, fx = project

    def broken(cmd, timeout):
        raise RuntimeError("boom")

    report = Orchestrator(mock_config(src, tmp_path / "o", fx), executor=broken).run()
    assert {i.outcome.value for i in report.invocations} == {"error"}


def test_interrupt_keeps_partial_reports(project, tmp_path):
    src, fx = project
    backend = MockBackend.from_file(fx)
    calls = []

    def executor(cmd, timeout):
        calls.append(cmd.entry)
        if len(calls) == 3:
            raise KeyboardInterrupt
        return backend(cmd, timeout)

    report = Orchestrator(mock_config(src, tmp_path / "o", fx), executor=executor).run()
    assert report.summary.interrupted
    assert report.summary.functions_verified == 2
    assert exit_code_for(report.summary) == EXIT_INTERRUPTED
    assert read_summary(str(tmp_path / "o" / "summary.txt"))["interrupted"] == "true"


def test_verbose_progress(project, tmp_path, capsys):
    import io
    src, fx = project
    buf = io.StringIO()
    Orchestrator(mock_config(src, tmp_path / "o", fx, FunctionMode.PRIORITIZED, verbose=True),
                 progress=buf).run()
    lines = buf.getvalue().splitlines()
    assert len(lines) == 3
    assert lines[1].endswith("::alloc [grade 3] (2/3)")


def test_missing_backend_is_config_error(project, tmp_path):
    src, _ = project
    with pytest.raises(ConfigError):
        Orchestrator(RunConfig(target=str(src), backend="no-such-checker-xyz",
                               output_dir=str(tmp_path / "o")))


def test_missing_target(tmp_path):
    fx = write_fixture(tmp_path, [])
    with pytest.raises(InputError):
        Orchestrator(mock_config(tmp_path / "nothing", tmp_path / "o", fx)).run()


def test_figures_rendered(project, tmp_path):
    src, fx = project
    out = tmp_path / "out"
    Orchestrator(mock_config(src, out, fx, figures=True)).run()
    for name in ("violations_by_category.png", "cpu_time_by_function.png"):
        assert (out / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
