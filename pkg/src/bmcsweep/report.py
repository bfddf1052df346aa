"""Run reports: report.csv, run.log, outcomes.csv and summary.txt."""

from __future__ import annotations

import csv
import dataclasses
import io
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence

from bmcsweep.analysis import Outcome, Violation, ViolationCategory
from bmcsweep.checker import CheckerRun
from bmcsweep.errors import OutputError

CSV_HEADER = ("filename", "status", "function", "line", "violation_type")
CSV_EXTENDED = ("function_start_line", "violation_description", "cwes")
OUTCOME_HEADER = ("filename", "function", "grade", "status", "exit_code",
                  "cpu_time_s", "wall_time_s", "peak_memory_bytes", "violations")

REPORT_CSV = "report.csv"
RUN_LOG = "run.log"
SUMMARY_TXT = "summary.txt"
OUTCOMES_CSV = "outcomes.csv"


@dataclass(frozen=True)
class InvocationResult:
    """One finished (file, function) check handed to the report assembler."""
    file: str
    function: str
    run: CheckerRun
    outcome: Outcome
    violations: tuple[Violation, ...] = ()
    grade: Optional[int] = None


@dataclass(frozen=True)
class ReportRow:
    violation: Violation
    status: str

    @property
    def sort_key(self) -> tuple:
        return self.violation.sort_key

    def fields(self, extended: bool = False) -> list[str]:
        v = self.violation
        row = [v.source_file, self.status, v.function, str(v.line), v.category.value]
        if extended:
            start = "" if v.function_start_line is None else str(v.function_start_line)
            row += [start, v.category.description, ";".join(v.cwes)]
        return row


@dataclass
class RunSummary:
    files_scanned: int = 0
    functions_extracted: int = 0
    functions_verified: int = 0
    violations_total: int = 0
    violations_by_category: dict = field(default_factory=dict)
    duplicates_suppressed: int = 0
    outcomes: dict = field(default_factory=dict)
    total_cpu_time_s: float = 0.0
    total_wall_time_s: float = 0.0
    peak_child_memory_bytes: int = 0
    peak_orchestrator_memory_bytes: int = 0
    interrupted: bool = False

    def lines(self) -> list[str]:
        out = [
            f"files_scanned: {self.files_scanned}",
            f"functions_extracted: {self.functions_extracted}",
            f"functions_verified: {self.functions_verified}",
            f"violations_total: {self.violations_total}",
        ]
        for cat in ViolationCategory:
            out.append(f"violations_by_category.{cat.value}: {self.violations_by_category.get(cat, 0)}")
        out.append(f"duplicates_suppressed: {self.duplicates_suppressed}")
        for status in Outcome:
            out.append(f"outcome.{status.value}: {self.outcomes.get(status, 0)}")
        out += [
            f"total_cpu_time_s: {self.total_cpu_time_s:.6f}",
            f"total_wall_time_s: {self.total_wall_time_s:.6f}",
            f"peak_child_memory_bytes: {self.peak_child_memory_bytes}",
            f"peak_orchestrator_memory_bytes: {self.peak_orchestrator_memory_bytes}",
            f"interrupted: {'true' if self.interrupted else 'false'}",
        ]
        return out


@dataclass
class RunReport:
    rows: list[ReportRow]
    summary: RunSummary
    invocations: list[InvocationResult] = field(default_factory=list)
    output_dir: str = "."
    extended_columns: bool = False

    @property
    def csv_path(self) -> str:
        return os.path.join(self.output_dir, REPORT_CSV)

    @property
    def log_path(self) -> str:
        return os.path.join(self.output_dir, RUN_LOG)

    @property
    def summary_path(self) -> str:
        return os.path.join(self.output_dir, SUMMARY_TXT)


def build_rows(invocations: Iterable[InvocationResult]) -> tuple[list[ReportRow], int]:
    """Deduplicated, sorted report rows plus the number of duplicates folded in."""
    merged: dict[tuple, ReportRow] = {}
    dupes = 0
    for inv in invocations:
        for v in inv.violations:
            prev = merged.get(v.dedup_key)
            if prev is None:
                merged[v.dedup_key] = ReportRow(v, inv.outcome.value)
            else:
                dupes += v.occurrences
                bumped = dataclasses.replace(
                    prev.violation, occurrences=prev.violation.occurrences + v.occurrences)
                merged[v.dedup_key] = ReportRow(bumped, prev.status)
    return sorted(merged.values(), key=lambda r: r.sort_key), dupes


def summarize(invocations: Sequence[InvocationResult], rows: Sequence[ReportRow], *,
              files_scanned: int = 0, functions_extracted: int = 0, duplicates: int = 0,
              orchestrator_peak: int = 0, interrupted: bool = False) -> RunSummary:
    by_cat: dict = {}
    for r in rows:
        by_cat[r.violation.category] = by_cat.get(r.violation.category, 0) + 1
    outcomes: dict = {}
    for inv in invocations:
        outcomes[inv.outcome] = outcomes.get(inv.outcome, 0) + 1
    return RunSummary(
        files_scanned=files_scanned,
        functions_extracted=functions_extracted,
        functions_verified=len(invocations),
        violations_total=len(rows),
        violations_by_category=by_cat,
        duplicates_suppressed=duplicates,
        outcomes=outcomes,
        total_cpu_time_s=sum(i.run.cpu_time_s for i in invocations),
        total_wall_time_s=sum(i.run.wall_time_s for i in invocations),
        peak_child_memory_bytes=max((i.run.peak_memory_bytes for i in invocations), default=0),
        peak_orchestrator_memory_bytes=orchestrator_peak,
        interrupted=interrupted,
    )


def _open_out(path: str) -> IO[str]:
    try:
        return open(path, "w", encoding="utf-8", errors="surrogateescape", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


class _RowWriter:
    """csv writer ending rows in "\n" that still quotes fields holding a bare "\r".

    The stdlib quotes only characters found in the line terminator, so rows
    are rendered with "\r\n" and the terminator swapped afterwards.
    """

    def __init__(self, fh: IO[str]) -> None:
        self._fh = fh
        self._buf = io.StringIO()
        self._w = csv.writer(self._buf, lineterminator="\r\n")

    def writerow(self, row: Sequence) -> None:
        self._buf.seek(0)
        self._buf.truncate()
        self._w.writerow(row)
        self._fh.write(self._buf.getvalue()[:-2] + "\n")


def write_csv(report: RunReport, path: Optional[str] = None) -> str:
    path = path or report.csv_path
    with _open_out(path) as fh:
        w = _RowWriter(fh)
        w.writerow(CSV_HEADER + (CSV_EXTENDED if report.extended_columns else ()))
        for row in report.rows:
            w.writerow(row.fields(report.extended_columns))
    return path


def write_outcomes(invocations: Iterable[InvocationResult], path: str) -> str:
    with _open_out(path) as fh:
        w = _RowWriter(fh)
        w.writerow(OUTCOME_HEADER)
        for inv in invocations:
            run = inv.run
            w.writerow([
                inv.file, inv.function, "" if inv.grade is None else inv.grade,
                inv.outcome.value, "" if run.exit_code is None else run.exit_code,
                f"{run.cpu_time_s:.6f}", f"{run.wall_time_s:.6f}", run.peak_memory_bytes,
                len(inv.violations),
            ])
    return path


def section_header(file: str, function: str) -> str:
    return f"=== {file} :: {function} ===\n"


def _section(run: CheckerRun) -> str:
    parts = [section_header(run.command.target_file, run.command.entry), run.stdout_text]
    if run.stdout_text and not run.stdout_text.endswith("\n"):
        parts.append("\n")
    if run.stderr_text:
        parts += ["--- stderr ---\n", run.stderr_text]
        if not run.stderr_text.endswith("\n"):
            parts.append("\n")
    if run.timed_out:
        parts.append("--- killed: timeout ---\n")
    return "".join(parts)


class LogWriter:
    """Appends one section per invocation, flushing after each."""

    def __init__(self, path: str) -> None:
        self.path = path
        self.sections = 0
        self._fh = _open_out(path)

    def append(self, run: CheckerRun) -> None:
        try:
            self._fh.write(_section(run))
            self._fh.flush()
        except OSError as exc:
            raise OutputError(f"cannot write {self.path}: {exc}") from exc
        self.sections += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "LogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_log(runs: Iterable[CheckerRun], path: str) -> str:
    with LogWriter(path) as log:
        for run in runs:
            log.append(run)
    return path


def write_summary(summary: RunSummary, path: str) -> str:
    with _open_out(path) as fh:
        fh.write("\n".join(summary.lines()) + "\n")
    return path


def read_summary(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            key, _, value = line.rstrip("\n").partition(": ")
            out[key] = value
    return out
