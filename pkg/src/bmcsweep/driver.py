"""End-to-end sweep: discover, extract, prioritize, check, analyze, report."""

from __future__ import annotations

import dataclasses
import logging
import os
import sys
import threading
import tracemalloc
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Callable, Optional

from bmcsweep import analysis
from bmcsweep.analysis import CweTable, Outcome, PatternTable
from bmcsweep.checker import (
    CheckerCommand,
    CheckerRun,
    MockBackend,
    build_invocation,
    execute,
    get_template,
    kill_active,
    resolve_backend,
)
from bmcsweep.config import FunctionMode, RunConfig, resolve_output_dir
from bmcsweep.cparse import FunctionRecord, build_call_map, extract_functions
from bmcsweep.discovery import SourceFile, list_sources
from bmcsweep.errors import OutputError
from bmcsweep.prioritize import GradingRules, assign_grades, order, prune_called
from bmcsweep.report import (
    OUTCOMES_CSV,
    InvocationResult,
    LogWriter,
    RunReport,
    RunSummary,
    build_rows,
    summarize,
    write_csv,
    write_outcomes,
    write_summary,
)

log = logging.getLogger(__name__)

EXIT_CLEAN = 0
EXIT_VIOLATIONS = 10
EXIT_CONFIG = 2
EXIT_FATAL = 3
EXIT_INTERRUPTED = 130

Executor = Callable[[CheckerCommand, float], CheckerRun]


@dataclass(frozen=True)
class PlannedCheck:
    file: SourceFile
    # None means "the backend's default entry point" (main-only mode)
    function: Optional[FunctionRecord] = None

    @property
    def name(self) -> str:
        return self.function.name if self.function is not None else "main"


@dataclass
class RunPlan:
    entries: list[tuple[SourceFile, list[Optional[FunctionRecord]]]] = field(default_factory=list)
    files_scanned: int = 0
    functions_extracted: int = 0
    records: dict[str, list[FunctionRecord]] = field(default_factory=dict)

    @property
    def total_invocations(self) -> int:
        return sum(len(funcs) for _, funcs in self.entries)

    def checks(self) -> list[PlannedCheck]:
        return [PlannedCheck(src, f) for src, funcs in self.entries for f in funcs]


def _prioritize(per_file: dict[str, list[FunctionRecord]], config: RunConfig) -> dict:
    rules = GradingRules(config.alloc_calls, config.thread_calls)
    graded = {path: assign_grades(funcs, rules) for path, funcs in per_file.items()}
    if config.call_scope == "run":
        everything = [f for funcs in graded.values() for f in funcs]
        kept = {(f.source, f.start_line) for f in prune_called(everything, build_call_map(everything))}
        pruned = {p: [f for f in funcs if (f.source, f.start_line) in kept] for p, funcs in graded.items()}
    else:
        pruned = {p: prune_called(funcs, build_call_map(funcs)) for p, funcs in graded.items()}
    return {p: order(funcs) for p, funcs in pruned.items()}


def plan(config: RunConfig) -> RunPlan:
    """Work list in verification order: files sorted, functions per mode."""
    sources = list_sources(config)
    records = {s.path: extract_functions(s) for s in sources}
    result = RunPlan(files_scanned=len(sources), records=records)

    if config.function_mode is FunctionMode.MAIN_ONLY:
        # a file without a parsed main still gets one entry-point check
        result.functions_extracted = sum(
            len(fs) + (0 if any(f.name == "main" for f in fs) else 1) for fs in records.values())
        result.entries = [(s, [None]) for s in sources]
        return result

    result.functions_extracted = sum(len(fs) for fs in records.values())
    per_file = {}
    for s in sources:
        if records[s.path]:
            per_file[s.path] = records[s.path]
        else:
            log.warning("%s: no function definitions found, skipped", s.path)
    if config.function_mode is FunctionMode.PRIORITIZED:
        per_file = _prioritize(per_file, config)
    result.entries = [(s, list(per_file[s.path])) for s in sources if per_file.get(s.path)]
    return result


def _start_line_index(records: dict[str, list[FunctionRecord]]) -> dict:
    index: dict = {}
    for path, funcs in records.items():
        for f in funcs:
            index.setdefault((os.path.normpath(path), f.name), f.start_line)
            index.setdefault((os.path.basename(path), f.name), f.start_line)
    return index


class Orchestrator:
    """Runs one configured sweep and keeps an invocation ledger."""

    def __init__(self, config: RunConfig, executor: Optional[Executor] = None,
                 progress: Optional[IO[str]] = None) -> None:
        self.config = config
        self.patterns = PatternTable.load(config.pattern_table)
        self.cwes = CweTable.load(config.cwe_table)
        get_template(config.backend_template)
        if executor is None:
            if config.mock_fixture:
                executor = MockBackend.from_file(config.mock_fixture, config.mock_default)
            else:
                resolved = resolve_backend(config.backend)
                executor = execute
                log.debug("using backend %s", resolved)
        self.executor = executor
        self.progress = progress if progress is not None else sys.stderr
        self.ledger: list[tuple[str, str]] = []
        self._ledger_lock = threading.Lock()
        self.output_dir = ""

    def _invoke(self, check: PlannedCheck, index: int, total: int) -> CheckerRun:
        with self._ledger_lock:
            self.ledger.append((check.file.path, check.name))
        if self.config.verbose:
            grade = check.function.grade if check.function is not None else None
            tag = f" [grade {grade}]" if grade is not None else ""
            print(f"verifying {check.file.path}::{check.name}{tag} ({index}/{total})",
                  file=self.progress, flush=True)
        cmd = build_invocation(check.file, check.function, self.config)
        try:
            return self.executor(cmd, self.config.timeout_per_function)
        except Exception as exc:  # a broken invocation must not sink the run
            log.error("%s::%s: checker invocation failed: %s", check.file.path, check.name, exc)
            return CheckerRun(command=cmd, stderr_text=str(exc), spawn_error=str(exc))

    def _analyze(self, check: PlannedCheck, run: CheckerRun, starts: dict) -> InvocationResult:
        outcome = Outcome.ERROR if run.spawn_error else analysis.parse_outcome(run)
        found = []
        for v in analysis.extract_violations(run, check.name):
            v = analysis.annotate(v, self.patterns, self.cwes)
            start = (starts.get((os.path.normpath(v.source_file), v.function))
                     or starts.get((os.path.basename(v.source_file), v.function)))
            if start is None and check.function is not None and v.function == check.name:
                start = check.function.start_line
            found.append(dataclasses.replace(v, function_start_line=start))
        return InvocationResult(
            file=check.file.path,
            function=check.name,
            run=run,
            outcome=outcome,
            violations=tuple(found),
            grade=check.function.grade if check.function is not None else None,
        )

    def run(self) -> RunReport:
        out_dir = resolve_output_dir(self.config)
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {out_dir}: {exc}") from exc
        self.output_dir = out_dir

        started_tracing = not tracemalloc.is_tracing()
        if started_tracing:
            tracemalloc.start()
        try:
            return self._run(out_dir)
        finally:
            if started_tracing:
                tracemalloc.stop()

    def _run(self, out_dir: str) -> RunReport:
        the_plan = plan(self.config)
        checks = the_plan.checks()
        starts = _start_line_index(the_plan.records)
        results: list[InvocationResult] = []
        interrupted = False
        total = len(checks)

        with LogWriter(os.path.join(out_dir, "run.log")) as runlog:
            def accept(check: PlannedCheck, run: CheckerRun) -> None:
                res = self._analyze(check, run, starts)
                results.append(res)
                runlog.append(run)

            try:
                if self.config.max_parallel_invocations == 1:
                    for i, check in enumerate(checks, 1):
                        accept(check, self._invoke(check, i, total))
                else:
                    with ThreadPoolExecutor(self.config.max_parallel_invocations) as pool:
                        futures = [pool.submit(self._invoke, c, i, total)
                                   for i, c in enumerate(checks, 1)]
                        try:
                            # planned order, whatever order workers finish in
                            for check, fut in zip(checks, futures):
                                accept(check, fut.result())
                        except BaseException:
                            for fut in futures:
                                fut.cancel()
                            kill_active()
                            raise
            except KeyboardInterrupt:
                interrupted = True
                kill_active()
                log.warning("interrupted after %d of %d invocations", len(results), total)

        rows, dupes = build_rows(results)
        _, peak = tracemalloc.get_traced_memory()
        summary = summarize(
            results, rows,
            files_scanned=the_plan.files_scanned,
            functions_extracted=the_plan.functions_extracted,
            duplicates=dupes,
            orchestrator_peak=peak,
            interrupted=interrupted,
        )
        report = RunReport(rows=rows, summary=summary, invocations=results,
                           output_dir=out_dir, extended_columns=self.config.extended_columns)
        write_csv(report)
        write_outcomes(results, os.path.join(out_dir, OUTCOMES_CSV))
        write_summary(summary, report.summary_path)
        if self.config.figures and not interrupted:
            from bmcsweep.figures import render_figures

            render_figures(report, out_dir)
        return report


def run(config: RunConfig, executor: Optional[Executor] = None) -> RunSummary:
    return Orchestrator(config, executor).run().summary


def exit_code_for(summary: RunSummary) -> int:
    if summary.interrupted:
        return EXIT_INTERRUPTED
    return EXIT_VIOLATIONS if summary.violations_total > 0 else EXIT_CLEAN
