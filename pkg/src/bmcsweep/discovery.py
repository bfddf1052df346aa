"""Enumerate the ``*.c`` files under the configured target."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

from bmcsweep.config import RunConfig
from bmcsweep.errors import InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourceFile:
    path: str
    size_bytes: int = 0
    line_count: int = 0


def _count_lines(data: bytes) -> int:
    if not data:
        return 0
    return data.count(b"\n") + (0 if data.endswith(b"\n") else 1)


def _stat_source(path: str) -> SourceFile:
    with open(path, "rb") as fh:
        data = fh.read()
    return SourceFile(path=path, size_bytes=len(data), line_count=_count_lines(data))


def _is_c_source(name: str) -> bool:
    # case-sensitive on purpose: "X.C" is C++ by convention
    return name.endswith(".c") and len(name) > 2


def _walk(root: str, recursive: bool) -> list[str]:
    found = []
    pending = [root]
    while pending:
        current = pending.pop()
        try:
            entries = list(os.scandir(current))
        except OSError as exc:
            log.warning("skipping unreadable directory %s: %s", current, exc)
            continue
        for entry in entries:
            try:
                if entry.is_dir(follow_symlinks=False):
                    if recursive and not entry.name.startswith("."):
                        pending.append(entry.path)
                elif _is_c_source(entry.name) and entry.is_file():
                    found.append(os.path.normpath(entry.path))
            except OSError as exc:
                log.warning("skipping %s: %s", entry.path, exc)
    return found


def list_sources(config: RunConfig) -> list[SourceFile]:
    """Return the C sources to verify, sorted by normalized path."""
    target = config.target
    if config.target_is_file:
        if not os.path.isfile(target):
            raise InputError(f"no such file: {target}")
        if not _is_c_source(os.path.basename(target)):
            raise InputError(f"not a C source file: {target}")
        try:
            return [_stat_source(os.path.normpath(target))]
        except OSError as exc:
            raise InputError(f"cannot read {target}: {exc}") from exc

    if not os.path.isdir(target):
        raise InputError(f"no such directory: {target}")

    sources = []
    for path in sorted(_walk(target, config.recursive)):
        try:
            sources.append(_stat_source(path))
        except OSError as exc:
            log.warning("skipping unreadable file %s: %s", path, exc)
    return sources
