import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmcsweep.analysis import Outcome, Violation, ViolationCategory as C
from bmcsweep.checker import CheckerCommand, CheckerRun
from bmcsweep.errors import OutputError
from bmcsweep.report import (
    CSV_EXTENDED,
    CSV_HEADER,
    InvocationResult,
    LogWriter,
    RunReport,
    build_rows,
    read_summary,
    section_header,
    summarize,
    write_csv,
    write_outcomes,
    write_summary,
)


def inv(file, function, violations=(), outcome=Outcome.FAILED, **run_kw):
    cmd = CheckerCommand("esbmc", ("--function", function, file), entry=function)
    return InvocationResult(file, function, CheckerRun(command=cmd, **run_kw), outcome,
                            tuple(violations))


def viol(file="x.c", line=1, function="f", cat=C.DZ, **kw):
    return Violation(file, line, function, cat, "division by zero", **kw)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def make_report(tmp_path, invocations, extended=False):
    rows, dupes = build_rows(invocations)
    summary = summarize(invocations, rows, duplicates=dupes)
    return RunReport(rows, summary, list(invocations), str(tmp_path), extended)


def test_header_only_for_clean_run(tmp_path):
    rep = make_report(tmp_path, [inv("x.c", "f", outcome=Outcome.SUCCESS)])
    write_csv(rep)
    assert (tmp_path / "report.csv").read_text() == ",".join(CSV_HEADER) + "\n"


def test_rows_sorted_and_deduplicated(tmp_path):
    a = inv("b.c", "g", [viol("b.c", 7, "g"), viol("b.c", 7, "g")])
    b = inv("a.c", "f", [viol("a.c", 9, "f", C.NP), viol("a.c", 2, "f")])
    c = inv("a.c", "main", [viol("a.c", 2, "f")])  # same site reached through main
    rows, dupes = build_rows([a, b, c])
    assert [(r.violation.source_file, r.violation.line, r.violation.category) for r in rows] == [
        ("a.c", 2, C.DZ), ("a.c", 9, C.NP), ("b.c", 7, C.DZ)]
    assert dupes == 2
    assert rows[0].violation.occurrences == 2


def test_extended_columns(tmp_path):
    v = viol(cwes=("CWE-369",), function_start_line=3)
    rep = make_report(tmp_path, [inv("x.c", "f", [v])], extended=True)
    write_csv(rep)
    assert read_rows(rep.csv_path) == [list(CSV_HEADER + CSV_EXTENDED),
                                      ["x.c", "failed", "f", "1", "DZ", "3", "Division by Zero",
                                       "CWE-369"]]


STRESS = ['plain', 'with,comma', 'with "quote"', 'multi\nline', 'crlf\r\nline', ' lead',
          '"', ',,', 'ünï', '']

_field = st.one_of(st.sampled_from(STRESS), st.text(max_size=12).filter(lambda s: "\x00" not in s))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(_field, st.integers(0, 10**6), _field, st.sampled_from(list(C))),
                max_size=8))
def test_csv_round_trip(tmp_path_factory, specs):
    out = tmp_path_factory.mktemp("rt")
    invs = [inv(f or "x.c", fn or "f", [viol(f, line, fn, cat)]) for f, line, fn, cat in specs]
    rep = make_report(out, invs, extended=True)
    write_csv(rep)
    parsed = read_rows(rep.csv_path)
    assert parsed[0] == list(CSV_HEADER + CSV_EXTENDED)
    assert parsed[1:] == [r.fields(True) for r in rep.rows]


def test_outcomes_file(tmp_path):
    rows = [inv("x.c", "f", outcome=Outcome.TIMEOUT, timed_out=True, cpu_time_s=1.5),
            inv("x.c", "g", [viol()], exit_code=1)]
    write_outcomes(rows, str(tmp_path / "o.csv"))
    got = read_rows(tmp_path / "o.csv")
    assert got[1] == ["x.c", "f", "", "timeout", "", "1.500000", "0.000000", "0", "0"]
    assert got[2][3:5] == ["failed", "1"] and got[2][-1] == "1"


def test_log_sections(tmp_path):
    path = str(tmp_path / "run.log")
    a = inv("x.c", "f", stdout_text="first", stderr_text="oops").run
    b = inv("y.c", "g", stdout_text="partial\n", timed_out=True).run
    with LogWriter(path) as lw:
        lw.append(a)
        # flushed per section: readable while the run goes on
        assert open(path).read() == section_header("x.c", "f") + "first\n--- stderr ---\noops\n"
        lw.append(b)
    assert open(path).read().endswith(
        "=== y.c :: g ===\npartial\n--- killed: timeout ---\n")


def test_summary_round_trip(tmp_path):
    invs = [inv("x.c", "f", [viol(), viol(line=2, cat=C.NP)], cpu_time_s=2.0, wall_time_s=3.0,
                peak_memory_bytes=4096),
            inv("x.c", "g", outcome=Outcome.ERROR, exit_code=6)]
    rows, dupes = build_rows(invs)
    s = summarize(invs, rows, files_scanned=1, functions_extracted=2, duplicates=dupes)
    write_summary(s, str(tmp_path / "summary.txt"))
    got = read_summary(str(tmp_path / "summary.txt"))
    assert got["violations_total"] == "2"
    assert got["violations_by_category.DZ"] == "1"
    assert got["violations_by_category.NP"] == "1"
    assert got["violations_by_category.AUB"] == "0"
    assert got["outcome.error"] == "1" and got["outcome.failed"] == "1"
    assert got["total_cpu_time_s"] == "2.000000"
    assert got["peak_child_memory_bytes"] == "4096"
    assert got["interrupted"] == "false"


def test_unwritable_output(tmp_path):
    rep = make_report(tmp_path / "missing" / "dir", [])
    with pytest.raises(OutputError):
        write_csv(rep)
