"""Scripted stand-in for the checker, driven by a fixture file.

Fixture lines are tab-separated::

    file-path  function-name  exit-code  output-file  [cpu-seconds  [sleep-seconds]]

``exit-code`` may be ``hang``.  ``output-file`` is relative to the fixture
and may be ``-`` for no output.  Either key column may be ``*``.  Rows
without a sleep are answered in-process; rows that sleep or hang run a real
child process so timeouts are enforced exactly as for a real backend.
"""

from __future__ import annotations

import dataclasses
import os
import sys
from dataclasses import dataclass
from typing import Iterable, Optional

from bmcsweep.checker.invocation import CheckerCommand
from bmcsweep.checker.process import CheckerRun, decode, execute
from bmcsweep.errors import ConfigError

SUCCESS_TEXT = "VERIFICATION SUCCESSFUL\n"
HANG_S = 1e9

_CHILD = (
    "import sys, time\n"
    "path, code, delay = sys.argv[1], int(sys.argv[2]), float(sys.argv[3])\n"
    "if path != '-':\n"
    "    sys.stdout.buffer.write(open(path, 'rb').read())\n"
    "    sys.stdout.flush()\n"
    "time.sleep(delay)\n"
    "sys.exit(code)\n"
)


@dataclass(frozen=True)
class MockEntry:
    exit_code: int
    output: bytes = b""
    output_path: str = "-"
    cpu_time_s: float = 0.0
    sleep_s: float = 0.0

    @property
    def needs_process(self) -> bool:
        return self.sleep_s > 0


def parse_fixture(text: str, base_dir: str = ".", name: str = "<fixture>") -> dict:
    table: dict[tuple[str, str], MockEntry] = {}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.rstrip("\r").split("\t")
        if not 4 <= len(cols) <= 6:
            raise ConfigError(f"{name}:{n}: expected 4 to 6 tab-separated fields, got {len(cols)}")
        file_key, func, code_s, out_rel = (c.strip() for c in cols[:4])
        try:
            cpu = float(cols[4]) if len(cols) > 4 and cols[4].strip() else 0.0
            if code_s == "hang":
                code, sleep = 0, HANG_S
            else:
                code = int(code_s)
                sleep = float(cols[5]) if len(cols) > 5 and cols[5].strip() else 0.0
        except ValueError as exc:
            raise ConfigError(f"{name}:{n}: {exc}") from None
        if not file_key or not func or cpu < 0 or sleep < 0:
            raise ConfigError(f"{name}:{n}: malformed fixture record")
        out_path, data = "-", b""
        if out_rel != "-":
            out_path = os.path.join(base_dir, out_rel)
            try:
                with open(out_path, "rb") as fh:
                    data = fh.read()
            except OSError as exc:
                raise ConfigError(f"{name}:{n}: cannot read output file: {exc}") from None
        table[(os.path.normpath(file_key) if file_key != "*" else "*", func)] = MockEntry(
            exit_code=code, output=data, output_path=out_path, cpu_time_s=cpu, sleep_s=sleep)
    return table


def load_fixture(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read mock fixture {path}: {exc}") from exc
    return parse_fixture(text, os.path.dirname(os.path.abspath(path)), path)


def format_fixture(rows: Iterable[tuple]) -> str:
    return "".join("\t".join(str(c) for c in row) + "\n" for row in rows)


class MockBackend:
    def __init__(self, table: dict, default: str = "success") -> None:
        if default not in ("success", "error"):
            raise ConfigError(f"unknown mock default {default!r}")
        self.table = table
        self.default = default

    @classmethod
    def from_file(cls, path: str, default: str = "success") -> "MockBackend":
        return cls(load_fixture(path), default)

    def lookup(self, file_path: str, function: str) -> Optional[MockEntry]:
        norm = os.path.normpath(file_path)
        base = os.path.basename(norm)
        for key in ((norm, function), (base, function), (norm, "*"), (base, "*"),
                    ("*", function), ("*", "*")):
            entry = self.table.get(key)
            if entry is not None:
                return entry
        return None

    def __call__(self, cmd: CheckerCommand, timeout_s: float) -> CheckerRun:
        return mock_execute(self, cmd, timeout_s)


def mock_execute(script: MockBackend, cmd: CheckerCommand,
                 timeout_s: float = float("inf")) -> CheckerRun:
    """Synthesize the CheckerRun the fixture prescribes for *cmd*."""
    entry = script.lookup(cmd.target_file, cmd.entry)
    if entry is None:
        if script.default == "success":
            return CheckerRun(command=cmd, stdout_text=SUCCESS_TEXT, exit_code=0)
        return CheckerRun(command=cmd, exit_code=1,
                          stderr_text=f"mock: no fixture entry for {cmd.target_file} :: {cmd.entry}\n")
    if entry.needs_process:
        child = CheckerCommand(
            backend_path=sys.executable,
            argv=("-c", _CHILD, entry.output_path, str(entry.exit_code), repr(entry.sleep_s)),
            working_dir=cmd.working_dir,
            entry=cmd.entry,
        )
        return dataclasses.replace(execute(child, timeout_s), command=cmd)
    return CheckerRun(
        command=cmd,
        stdout_text=decode(entry.output),
        exit_code=entry.exit_code,
        cpu_time_s=entry.cpu_time_s,
        wall_time_s=entry.cpu_time_s,
    )
