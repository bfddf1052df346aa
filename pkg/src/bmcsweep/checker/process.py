"""Run one checker process with a timeout and child resource accounting."""

from __future__ import annotations

import os
import signal
import subprocess
import sys
import threading
import time
from dataclasses import dataclass
from typing import IO, Optional

from bmcsweep.checker.invocation import CheckerCommand

GRACE_S = 5.0

_active: set[int] = set()
_active_lock = threading.Lock()


def kill_active() -> None:
    """Kill every checker process group still running (used on interrupt)."""
    with _active_lock:
        pids = list(_active)
    for pid in pids:
        _kill_group(pid)


@dataclass(frozen=True)
class CheckerRun:
    command: CheckerCommand
    stdout_text: str = ""
    stderr_text: str = ""
    # None when the process was killed at the deadline or never started
    exit_code: Optional[int] = None
    timed_out: bool = False
    cpu_time_s: float = 0.0
    wall_time_s: float = 0.0
    peak_memory_bytes: int = 0
    spawn_error: Optional[str] = None


def decode(data: bytes) -> str:
    # surrogateescape keeps undecodable bytes recoverable for the raw log
    return data.decode("utf-8", errors="surrogateescape")


def _drain(stream: IO[bytes], sink: list) -> None:
    try:
        for chunk in iter(lambda: stream.read(65536), b""):
            sink.append(chunk)
    except (OSError, ValueError):
        pass


def _kill_group(pid: int) -> None:
    try:
        os.killpg(pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass


def _maxrss_bytes(ru) -> int:
    # Linux reports KiB, macOS reports bytes
    return int(ru.ru_maxrss) if sys.platform == "darwin" else int(ru.ru_maxrss) * 1024


def execute(cmd: CheckerCommand, timeout_s: float, grace_s: float = GRACE_S) -> CheckerRun:
    """Run *cmd*; kill its whole process group once *timeout_s* elapses.

    Output captured up to the kill is kept.  CPU time and peak RSS come
    from the kernel's accounting for the reaped child.
    """
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            cmd.full_argv,
            cwd=cmd.working_dir,
            stdin=subprocess.DEVNULL,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            start_new_session=True,
        )
    except OSError as exc:
        return CheckerRun(command=cmd, stderr_text=str(exc), spawn_error=str(exc),
                          wall_time_s=time.monotonic() - start)

    with _active_lock:
        _active.add(proc.pid)
    out: list[bytes] = []
    err: list[bytes] = []
    readers = [
        threading.Thread(target=_drain, args=(proc.stdout, out), daemon=True),
        threading.Thread(target=_drain, args=(proc.stderr, err), daemon=True),
    ]
    for t in readers:
        t.start()

    fired = threading.Event()

    def on_deadline() -> None:
        fired.set()
        _kill_group(proc.pid)

    timer = threading.Timer(timeout_s, on_deadline)
    timer.daemon = True
    timer.start()
    try:
        _, status, usage = os.wait4(proc.pid, 0)
    finally:
        timer.cancel()
        with _active_lock:
            _active.discard(proc.pid)
    wall = time.monotonic() - start
    code = os.waitstatus_to_exitcode(status)
    proc.returncode = code

    # A surviving grandchild may still hold the pipes open.
    for t in readers:
        t.join(min(grace_s, 2.0))
    if any(t.is_alive() for t in readers):
        _kill_group(proc.pid)
        for t in readers:
            t.join(1.0)
    for stream in (proc.stdout, proc.stderr):
        try:
            stream.close()
        except OSError:
            pass

    timed_out = fired.is_set() and code == -signal.SIGKILL
    return CheckerRun(
        command=cmd,
        stdout_text=decode(b"".join(out)),
        stderr_text=decode(b"".join(err)),
        exit_code=None if timed_out else code,
        timed_out=timed_out,
        cpu_time_s=usage.ru_utime + usage.ru_stime,
        wall_time_s=wall,
        peak_memory_bytes=_maxrss_bytes(usage),
    )
