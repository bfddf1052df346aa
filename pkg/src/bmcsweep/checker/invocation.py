"""Backend flag vocabularies and command construction."""

from __future__ import annotations

import os
import shutil
from dataclasses import dataclass, field
from typing import Mapping, Optional

from bmcsweep.config import PropertyClass, RunConfig
from bmcsweep.cparse import FunctionRecord
from bmcsweep.discovery import SourceFile
from bmcsweep.errors import ConfigError, InternalError

MAIN_ENTRY = "main"


@dataclass(frozen=True)
class PropertyFlags:
    when_on: tuple[str, ...] = ()
    when_off: tuple[str, ...] = ()


@dataclass(frozen=True)
class BackendTemplate:
    name: str
    entry_flag: str
    include_flag: str
    properties: Mapping[PropertyClass, PropertyFlags] = field(default_factory=dict)

    def property_argv(self, selected: frozenset) -> list[str]:
        argv: list[str] = []
        for prop in PropertyClass:
            flags = self.properties.get(prop, PropertyFlags())
            argv.extend(flags.when_on if prop in selected else flags.when_off)
        return argv


# Checks that ESBMC runs by default are switched off when deselected, the
# opt-in ones are switched on when selected.
ESBMC = BackendTemplate(
    name="esbmc",
    entry_flag="--function",
    include_flag="-I",
    properties={
        PropertyClass.OUT_OF_BOUNDS_ARRAY: PropertyFlags(when_off=("--no-bounds-check",)),
        PropertyClass.ILLEGAL_POINTER_DEREFERENCE: PropertyFlags(when_off=("--no-pointer-check",)),
        PropertyClass.ARITHMETIC_OVERFLOW: PropertyFlags(when_on=("--overflow-check",)),
        PropertyClass.NAN_OCCURRENCE: PropertyFlags(when_on=("--nan-check",)),
        PropertyClass.DIVISION_BY_ZERO: PropertyFlags(when_off=("--no-div-by-zero-check",)),
        PropertyClass.MEMORY_LEAK: PropertyFlags(when_on=("--memory-leak-check",)),
        PropertyClass.DYNAMIC_ALLOCATION: PropertyFlags(when_off=("--force-malloc-success",)),
        PropertyClass.ATOMICITY_VIOLATION: PropertyFlags(when_on=("--atomicity-check",)),
    },
)

TEMPLATES: dict[str, BackendTemplate] = {ESBMC.name: ESBMC}


def get_template(name: str) -> BackendTemplate:
    try:
        return TEMPLATES[name]
    except KeyError:
        raise ConfigError(f"unknown backend template {name!r}") from None


@dataclass(frozen=True)
class CheckerCommand:
    backend_path: str
    argv: tuple[str, ...]
    working_dir: str = "."
    # bookkeeping, not passed to the backend
    entry: str = MAIN_ENTRY

    @property
    def target_file(self) -> str:
        return self.argv[-1]

    @property
    def full_argv(self) -> list[str]:
        return [self.backend_path, *self.argv]


def build_invocation(file: SourceFile, function: Optional[FunctionRecord], config: RunConfig,
                     template: Optional[BackendTemplate] = None) -> CheckerCommand:
    """Command line for checking *function* of *file*.

    *function* is None in main-only mode, where the backend picks its
    default entry point.
    """
    template = template or get_template(config.backend_template)
    argv: list[str] = []
    if config.per_function:
        if function is None:
            raise InternalError(f"per-function mode needs a function for {file.path}")
        argv += [template.entry_flag, function.name]
    for inc in config.include_paths:
        argv += [template.include_flag, inc]
    argv += template.property_argv(config.effective_properties)
    argv += config.backend_args
    argv.append(file.path)
    return CheckerCommand(
        backend_path=config.backend,
        argv=tuple(argv),
        entry=function.name if function is not None else MAIN_ENTRY,
    )


def resolve_backend(path: str) -> str:
    """Absolute path of the checker executable; ConfigError when absent."""
    if os.sep in path:
        if os.path.isfile(path) and os.access(path, os.X_OK):
            return path
    else:
        found = shutil.which(path)
        if found:
            return found
    raise ConfigError(f"checker backend not found or not executable: {path}")
