"""Command-line surface and the validated, immutable run configuration."""

from __future__ import annotations

import argparse
import datetime as _dt
import enum
import os
import shlex
from dataclasses import dataclass
from typing import Optional, Sequence

from bmcsweep.errors import InputError, UsageError

DEFAULT_TIMEOUT_S = 30.0
DEFAULT_JOBS = 1
DEFAULT_OUTPUT_ROOT = "lsv-output"

DEFAULT_ALLOC_CALLS = ("malloc", "calloc", "realloc", "free")
DEFAULT_THREAD_CALLS = (
    "pthread_create",
    "pthread_join",
    "pthread_mutex_lock",
    "pthread_mutex_unlock",
    "pthread_cond_wait",
    "pthread_cond_signal",
)


class FunctionMode(str, enum.Enum):
    MAIN_ONLY = "main-only"
    PER_FUNCTION = "per-function"
    PRIORITIZED = "per-function-prioritized"


class PropertyClass(str, enum.Enum):
    OUT_OF_BOUNDS_ARRAY = "out-of-bounds-array"
    ILLEGAL_POINTER_DEREFERENCE = "illegal-pointer-dereference"
    ARITHMETIC_OVERFLOW = "arithmetic-overflow"
    NAN_OCCURRENCE = "nan-occurrence"
    DIVISION_BY_ZERO = "division-by-zero"
    MEMORY_LEAK = "memory-leak"
    DYNAMIC_ALLOCATION = "dynamic-allocation"
    ATOMICITY_VIOLATION = "atomicity-violation"


# What the backend checks when nothing is selected explicitly.
DEFAULT_PROPERTIES = frozenset(
    {
        PropertyClass.OUT_OF_BOUNDS_ARRAY,
        PropertyClass.ILLEGAL_POINTER_DEREFERENCE,
        PropertyClass.DIVISION_BY_ZERO,
        PropertyClass.DYNAMIC_ALLOCATION,
    }
)


@dataclass(frozen=True)
class RunConfig:
    target: str = "."
    target_is_file: bool = False
    recursive: bool = False
    function_mode: FunctionMode = FunctionMode.MAIN_ONLY
    include_paths: tuple[str, ...] = ()
    backend_args: tuple[str, ...] = ()
    property_selection: frozenset[PropertyClass] = DEFAULT_PROPERTIES
    pointer_checks_enabled: bool = True
    verbose: bool = False
    timeout_per_function: float = DEFAULT_TIMEOUT_S
    max_parallel_invocations: int = DEFAULT_JOBS
    # None until run start; see resolve_output_dir.
    output_dir: Optional[str] = None
    backend: str = "esbmc"
    backend_template: str = "esbmc"
    mock_fixture: Optional[str] = None
    mock_default: str = "success"
    call_scope: str = "file"
    extended_columns: bool = False
    figures: bool = False
    pattern_table: Optional[str] = None
    cwe_table: Optional[str] = None
    alloc_calls: tuple[str, ...] = DEFAULT_ALLOC_CALLS
    thread_calls: tuple[str, ...] = DEFAULT_THREAD_CALLS

    def __post_init__(self) -> None:
        if not self.target:
            raise UsageError("a discovery target is required")
        if not self.timeout_per_function > 0:
            raise UsageError("timeout must be positive")
        if self.max_parallel_invocations < 1:
            raise UsageError("--jobs must be at least 1")
        keys = [_path_key(p) for p in self.include_paths]
        if len(keys) != len(set(keys)):
            raise UsageError("duplicate include paths")
        if self.call_scope not in ("file", "run"):
            raise UsageError(f"unknown call scope {self.call_scope!r}")
        if self.mock_default not in ("success", "error"):
            raise UsageError(f"unknown mock default {self.mock_default!r}")

    @property
    def per_function(self) -> bool:
        return self.function_mode is not FunctionMode.MAIN_ONLY

    @property
    def effective_properties(self) -> frozenset[PropertyClass]:
        if self.pointer_checks_enabled:
            return self.property_selection
        return self.property_selection - {PropertyClass.ILLEGAL_POINTER_DEREFERENCE}


def _path_key(path: str) -> str:
    return os.path.normpath(path)


def dedupe_paths(paths: Sequence[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for p in paths:
        key = _path_key(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def load_include_paths(path: str) -> list[str]:
    """Read a dependency file: one header directory per line.

    Blank lines and ``#`` comments are skipped; duplicates keep their first
    occurrence.
    """
    try:
        with open(path, encoding="utf-8", errors="replace") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read include-path file {path}: {exc}") from exc
    entries = []
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return dedupe_paths(entries)


def parse_properties(text: str) -> frozenset[PropertyClass]:
    tags = [t.strip() for t in text.split(",") if t.strip()]
    if not tags:
        raise UsageError("-p needs at least one vulnerability class")
    out = set()
    for tag in tags:
        try:
            out.add(PropertyClass(tag))
        except ValueError:
            known = ", ".join(p.value for p in PropertyClass)
            raise UsageError(f"unknown vulnerability class {tag!r} (known: {known})") from None
    return frozenset(out)


def _word_list(text: str) -> tuple[str, ...]:
    return tuple(w.strip() for w in text.split(",") if w.strip())


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="bmcsweep",
        description="Drive a bounded model checker over every function of a C project "
        "and collect the counterexamples into CSV reports.",
        allow_abbrev=False,
    )
    ap.add_argument("-e", "--esbmc-parameter", dest="backend_params", action="append",
                    default=[], metavar="ARGS",
                    help="options passed verbatim to the checker (repeatable, shell-split)")
    ap.add_argument("-l", dest="include_file", metavar="FILE",
                    help="file listing header search directories, one per line")
    ap.add_argument("-f", "--function", action="store_true",
                    help="verify every function individually")
    ap.add_argument("-fp", "--function-prioritized", dest="prioritized", action="store_true",
                    help="verify every function individually, highest priority first")
    ap.add_argument("-v", "--verbose", action="store_true", help="print progress")
    ap.add_argument("-r", "--recursive", action="store_true", help="descend into subdirectories")
    ap.add_argument("-d", dest="directory", metavar="DIR", help="directory to verify")
    ap.add_argument("-p", dest="properties", metavar="CLASSES",
                    help="comma-separated vulnerability classes to check")
    ap.add_argument("-fl", dest="single_file", metavar="FILE", help="single file to verify")
    ap.add_argument("-dp", dest="disable_pointer", action="store_true",
                    help="disable pointer checks")

    ax = ap.add_argument_group("extensions")
    ax.add_argument("--timeout-s", type=float, default=DEFAULT_TIMEOUT_S,
                    help="per-invocation timeout in seconds (default %(default)s)")
    ax.add_argument("--jobs", type=int, default=DEFAULT_JOBS,
                    help="concurrent checker processes (default %(default)s)")
    ax.add_argument("--output-dir", help="report directory (default lsv-output/<UTC timestamp>)")
    ax.add_argument("--backend", default="esbmc", help="checker executable")
    ax.add_argument("--backend-template", default="esbmc",
                    help="flag vocabulary of the checker (default %(default)s)")
    ax.add_argument("--mock-backend", metavar="FIXTURE",
                    help="replay scripted outputs from a fixture file instead of a real checker")
    ax.add_argument("--mock-default", choices=("success", "error"), default="success",
                    help="outcome for invocations missing from the fixture")
    ax.add_argument("--call-scope", choices=("file", "run"), default="file",
                    help="scope of callee pruning in prioritized mode")
    ax.add_argument("--extended-columns", action="store_true",
                    help="add start line, description and CWE columns to report.csv")
    ax.add_argument("--figures", action="store_true",
                    help="render PNG charts next to the reports")
    ax.add_argument("--pattern-table", metavar="FILE", help="override the violation phrase table")
    ax.add_argument("--cwe-table", metavar="FILE", help="override the CWE table")
    ax.add_argument("--alloc-funcs", metavar="NAMES", help="comma list of allocation calls")
    ax.add_argument("--thread-funcs", metavar="NAMES", help="comma list of thread calls")
    return ap


def _glue_passthrough(args: Sequence[str]) -> list[str]:
    # -e values usually start with "--", which argparse would read as flags.
    out: list[str] = []
    it = iter(args)
    for a in it:
        if a in ("-e", "--esbmc-parameter"):
            try:
                out.append("--esbmc-parameter=" + next(it))
            except StopIteration:
                raise UsageError(f"{a} expects a value") from None
        else:
            out.append(a)
    return out


def parse_cli(args: Sequence[str]) -> RunConfig:
    """Turn an argument vector (program name excluded) into a RunConfig.

    ``-h`` prints help and raises ``SystemExit(0)`` like any argparse tool.
    """
    ns = build_parser().parse_args(_glue_passthrough(list(args)))

    if ns.single_file is not None and ns.directory is not None:
        raise UsageError("-fl and -d are mutually exclusive")
    if ns.single_file is not None:
        target, is_file = ns.single_file, True
    else:
        target, is_file = (ns.directory if ns.directory is not None else "."), False

    if ns.prioritized:
        mode = FunctionMode.PRIORITIZED
    elif ns.function:
        mode = FunctionMode.PER_FUNCTION
    else:
        mode = FunctionMode.MAIN_ONLY

    backend_args: list[str] = []
    for chunk in ns.backend_params:
        try:
            backend_args.extend(shlex.split(chunk))
        except ValueError as exc:
            raise UsageError(f"cannot split -e value {chunk!r}: {exc}") from None

    include_paths = load_include_paths(ns.include_file) if ns.include_file else []
    props = parse_properties(ns.properties) if ns.properties is not None else DEFAULT_PROPERTIES

    extra = {}
    if ns.alloc_funcs is not None:
        extra["alloc_calls"] = _word_list(ns.alloc_funcs)
    if ns.thread_funcs is not None:
        extra["thread_calls"] = _word_list(ns.thread_funcs)

    return RunConfig(
        target=target,
        target_is_file=is_file,
        recursive=ns.recursive,
        function_mode=mode,
        include_paths=tuple(include_paths),
        backend_args=tuple(backend_args),
        property_selection=props,
        pointer_checks_enabled=not ns.disable_pointer,
        verbose=ns.verbose,
        timeout_per_function=ns.timeout_s,
        max_parallel_invocations=ns.jobs,
        output_dir=ns.output_dir,
        backend=ns.backend,
        backend_template=ns.backend_template,
        mock_fixture=ns.mock_backend,
        mock_default=ns.mock_default,
        call_scope=ns.call_scope,
        extended_columns=ns.extended_columns,
        figures=ns.figures,
        pattern_table=ns.pattern_table,
        cwe_table=ns.cwe_table,
        **extra,
    )


def resolve_output_dir(config: RunConfig, now: Optional[_dt.datetime] = None) -> str:
    if config.output_dir:
        return config.output_dir
    now = now or _dt.datetime.now(_dt.timezone.utc)
    base = os.path.join(DEFAULT_OUTPUT_ROOT, now.strftime("%Y%m%dT%H%M%SZ"))
    candidate, n = base, 1
    while os.path.exists(candidate):
        candidate = f"{base}-{n}"
        n += 1
    return candidate
