"""Risk grading, callee pruning and priority ordering of extracted functions."""

from __future__ import annotations

import dataclasses
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from bmcsweep.config import DEFAULT_ALLOC_CALLS, DEFAULT_THREAD_CALLS
from bmcsweep.cparse import FunctionRecord, split_top_level

log = logging.getLogger(__name__)

MAX_GRADE = 5

_BRACKETED = re.compile(r"\[[^\]]*\]")
_DIV_OR_SHIFT = re.compile(r"[/%]|<<|>>")


def _word_pattern(words: Iterable[str]) -> re.Pattern:
    words = sorted(set(words))
    if not words:
        return re.compile(r"(?!)")
    return re.compile(r"(?<![\w$])(?:%s)(?![\w$])" % "|".join(map(re.escape, words)))


@dataclass(frozen=True)
class GradingRules:
    alloc_calls: tuple[str, ...] = DEFAULT_ALLOC_CALLS
    thread_calls: tuple[str, ...] = DEFAULT_THREAD_CALLS

    def __post_init__(self) -> None:
        object.__setattr__(self, "_alloc_re", _word_pattern(self.alloc_calls))
        object.__setattr__(self, "_thread_re", _word_pattern(self.thread_calls))


DEFAULT_RULES = GradingRules()


def _param_decls(f: FunctionRecord) -> list[str]:
    # blanked params, so a comment can't fake a "*"
    return split_top_level(f.params_code, f.params_code)


def has_pointer_param(f: FunctionRecord) -> bool:
    # "*" inside brackets is a multiplication in an array size
    return any("*" in _BRACKETED.sub("", d) for d in _param_decls(f))


def has_array_param(f: FunctionRecord) -> bool:
    return any("[" in d for d in _param_decls(f))


def grade(f: FunctionRecord, rules: GradingRules = DEFAULT_RULES) -> int:
    """Priority grade 0..5; the first matching rule wins.

    5 pointer parameter, 4 array parameter, 3 allocation call in the body,
    2 thread call in the body, 1 division/modulo/shift in the body, else 0.
    """
    body = f.body_code
    if has_pointer_param(f):
        return 5
    if has_array_param(f):
        return 4
    if rules._alloc_re.search(body):
        return 3
    if rules._thread_re.search(body):
        return 2
    if _DIV_OR_SHIFT.search(body):
        return 1
    return 0


def assign_grades(functions: Iterable[FunctionRecord],
                  rules: GradingRules = DEFAULT_RULES) -> list[FunctionRecord]:
    return [dataclasses.replace(f, grade=grade(f, rules)) for f in functions]


def called_set(functions: Iterable[FunctionRecord], calls: Mapping[str, Iterable[str]]) -> set[str]:
    out: set[str] = set()
    for f in functions:
        out.update(calls.get(f.name, ()))
    return out


def prune_called(functions: Sequence[FunctionRecord],
                 calls: Mapping[str, Iterable[str]]) -> list[FunctionRecord]:
    """Drop functions already reached through a call from another listed function.

    The called set is computed once over the original list; ``main`` always
    stays.  If nothing would survive, the list is returned unchanged.
    """
    called = called_set(functions, calls)
    kept = [f for f in functions if f.name == "main" or f.name not in called]
    if functions and not kept:
        log.warning("callee pruning would remove all %d functions; pruning skipped",
                    len(functions))
        return list(functions)
    return kept


def order(functions: Iterable[FunctionRecord]) -> list[FunctionRecord]:
    """Stable sort by grade, highest first."""
    functions = list(functions)
    if any(f.grade is None for f in functions):
        raise ValueError("order() needs graded functions")
    return sorted(functions, key=lambda f: -f.grade)
