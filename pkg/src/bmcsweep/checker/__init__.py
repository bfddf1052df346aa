"""Backend invocation: command construction, process execution, mock backend."""

from bmcsweep.checker.invocation import (
    ESBMC,
    MAIN_ENTRY,
    TEMPLATES,
    BackendTemplate,
    CheckerCommand,
    PropertyFlags,
    build_invocation,
    get_template,
    resolve_backend,
)
from bmcsweep.checker.mock import MockBackend, MockEntry, load_fixture, mock_execute, parse_fixture
from bmcsweep.checker.process import GRACE_S, CheckerRun, execute, kill_active

__all__ = [
    "ESBMC",
    "GRACE_S",
    "MAIN_ENTRY",
    "TEMPLATES",
    "BackendTemplate",
    "CheckerCommand",
    "CheckerRun",
    "MockBackend",
    "MockEntry",
    "PropertyFlags",
    "build_invocation",
    "execute",
    "get_template",
    "kill_active",
    "load_fixture",
    "mock_execute",
    "parse_fixture",
    "resolve_backend",
]
