"""Turn raw checker output into classified, CWE-tagged violations."""

from __future__ import annotations

import dataclasses
import enum
import re
from dataclasses import dataclass
from importlib import resources
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from bmcsweep.errors import ConfigError

if TYPE_CHECKING:
    from bmcsweep.checker import CheckerRun

FAILED_MARK = "VERIFICATION FAILED"
SUCCESS_MARK = "VERIFICATION SUCCESSFUL"
BLOCK_MARK = "Violated property:"


class Outcome(str, enum.Enum):
    SUCCESS = "success"
    FAILED = "failed"
    TIMEOUT = "timeout"
    ERROR = "error"
    UNKNOWN = "unknown"


class ViolationCategory(str, enum.Enum):
    IP = "IP"
    ABV = "ABV"
    ALB = "ALB"
    AUB = "AUB"
    SOV = "SOV"
    IPF = "IPF"
    IDO = "IDO"
    NP = "NP"
    DZ = "DZ"
    AF = "AF"
    AOOB = "AOOB"
    OTHER = "OTHER"

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]


_DESCRIPTIONS = {
    ViolationCategory.IP: "Invalid Pointer",
    ViolationCategory.ABV: "Array Bounds Violated",
    ViolationCategory.ALB: "Array Lower Bound",
    ViolationCategory.AUB: "Array Upper Bound",
    ViolationCategory.SOV: "Same Object Violation",
    ViolationCategory.IPF: "Invalid Pointer Freed",
    ViolationCategory.IDO: "Invalidated Dynamic Object",
    ViolationCategory.NP: "NULL Pointer",
    ViolationCategory.DZ: "Division by Zero",
    ViolationCategory.AF: "Assertion Failure",
    ViolationCategory.AOOB: "Access to Object Out of Bounds",
    ViolationCategory.OTHER: "Other",
}


@dataclass(frozen=True)
class Violation:
    source_file: str
    line: int
    function: str
    category: ViolationCategory
    property_text: str
    cwes: tuple[str, ...] = ()
    # whole "Violated property:" region as it appeared in the output
    raw_block: str = ""
    occurrences: int = 1
    function_start_line: Optional[int] = None

    @property
    def dedup_key(self) -> tuple:
        return (self.source_file, self.line, self.function, self.category)

    @property
    def sort_key(self) -> tuple:
        return (self.source_file, self.line, self.function, self.category.value)


def _normalize(text: str) -> str:
    return " ".join(text.split()).lower()


# --- tables -----------------------------------------------------------------

def _read_table(path: Optional[str], default_name: str) -> list[tuple[int, str]]:
    if path is None:
        text = resources.files("bmcsweep").joinpath("data", default_name).read_text("utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read table {path}: {exc}") from exc
    rows = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if line and not line.startswith("#"):
            rows.append((n, line))
    return rows


def _category(tag: str, where: str) -> ViolationCategory:
    try:
        return ViolationCategory(tag.strip())
    except ValueError:
        raise ConfigError(f"{where}: unknown category {tag.strip()!r}") from None


class PatternTable:
    """Ordered (substrings, category) rules; the first full match wins."""

    def __init__(self, rules: Sequence[tuple[Sequence[str], ViolationCategory]]) -> None:
        self.rules = [(tuple(_normalize(s) for s in subs), cat) for subs, cat in rules]

    @classmethod
    def load(cls, path: Optional[str] = None) -> "PatternTable":
        rules = []
        for n, line in _read_table(path, "patterns.txt"):
            lhs, sep, rhs = line.rpartition("=>")
            subs = [s for s in (p.strip() for p in lhs.split("&&")) if s]
            if not sep or not subs:
                raise ConfigError(f"{path or 'patterns.txt'}:{n}: expected 'text [&& text] => TAG'")
            rules.append((subs, _category(rhs, f"{path or 'patterns.txt'}:{n}")))
        return cls(rules)

    def classify(self, property_text: str) -> ViolationCategory:
        text = _normalize(property_text)
        for subs, cat in self.rules:
            if all(s in text for s in subs):
                return cat
        return ViolationCategory.OTHER


class CweTable:
    def __init__(self, rows: dict[ViolationCategory, tuple[str, ...]]) -> None:
        self.rows = rows

    @classmethod
    def load(cls, path: Optional[str] = None) -> "CweTable":
        rows = {}
        for n, line in _read_table(path, "cwe.txt"):
            tag, sep, ids = line.partition(":")
            if not sep:
                raise ConfigError(f"{path or 'cwe.txt'}:{n}: expected 'TAG: CWE-n, ...'")
            cat = _category(tag, f"{path or 'cwe.txt'}:{n}")
            rows[cat] = tuple(i.strip() for i in ids.split(",") if i.strip())
        return cls(rows)

    def lookup(self, category: ViolationCategory) -> list[str]:
        return list(self.rows.get(category, ()))


_default_patterns: Optional[PatternTable] = None
_default_cwes: Optional[CweTable] = None


def default_patterns() -> PatternTable:
    global _default_patterns
    if _default_patterns is None:
        _default_patterns = PatternTable.load()
    return _default_patterns


def default_cwes() -> CweTable:
    global _default_cwes
    if _default_cwes is None:
        _default_cwes = CweTable.load()
    return _default_cwes


def classify(property_text: str, table: Optional[PatternTable] = None) -> ViolationCategory:
    return (table or default_patterns()).classify(property_text)


def map_cwe(category: ViolationCategory, table: Optional[CweTable] = None) -> list[str]:
    return (table or default_cwes()).lookup(category)


# --- output parsing ---------------------------------------------------------

def parse_outcome(run: "CheckerRun") -> Outcome:
    text = run.stdout_text + "\n" + run.stderr_text
    if FAILED_MARK in text:
        return Outcome.FAILED
    if SUCCESS_MARK in text:
        return Outcome.SUCCESS
    if run.timed_out:
        return Outcome.TIMEOUT
    if run.exit_code != 0:
        return Outcome.ERROR
    return Outcome.UNKNOWN


_LOCATION = re.compile(
    r"^\s*file\s+(?P<file>\S+)\s+line\s+(?P<line>\d+)"
    r"(?:\s+column\s+\d+)?"
    r"(?:\s+(?:in\s+)?function\s+(?P<func>\S+))?\s*$"
)
_FUNCTION_LINE = re.compile(r"^\s*(?:in\s+)?function\s+(?P<func>\S+)\s*$")
_SEPARATOR = re.compile(r"^\s*-{5,}\s*$")


def _ends_block(line: str) -> bool:
    s = line.strip()
    return (not s or s.startswith("VERIFICATION ") or s == BLOCK_MARK
            or _SEPARATOR.match(s) is not None)


def _blocks(text: str) -> Iterable[list[str]]:
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        if lines[i].strip() == BLOCK_MARK:
            j = i + 1
            while j < len(lines) and not _ends_block(lines[j]):
                j += 1
            yield lines[i:j]
            i = j
        else:
            i += 1


def parse_violation_blocks(text: str, fallback_function: str,
                           fallback_file: str = "") -> list[Violation]:
    """One unclassified Violation per ``Violated property:`` block of *text*.

    A block whose location line can't be read keeps line 0, category OTHER
    and the whole block as its property text.
    """
    found = []
    for block in _blocks(text):
        raw = "\n".join(block)
        body = block[1:]
        loc = _LOCATION.match(body[0].rstrip("\r")) if body else None
        if loc is None:
            found.append(Violation(
                source_file=fallback_file, line=0, function=fallback_function,
                category=ViolationCategory.OTHER, property_text=raw, raw_block=raw,
            ))
            continue
        func = loc.group("func")
        rest = body[1:]
        if func is None and rest:
            m = _FUNCTION_LINE.match(rest[0].rstrip("\r"))
            if m:
                func, rest = m.group("func"), rest[1:]
        found.append(Violation(
            source_file=loc.group("file"),
            line=int(loc.group("line")),
            function=func or fallback_function,
            category=ViolationCategory.OTHER,
            property_text="\n".join(rest),
            raw_block=raw,
        ))
    return found


def extract_violations(run: "CheckerRun", fallback_function: str) -> list[Violation]:
    fallback_file = run.command.target_file if run.command is not None else ""
    return (parse_violation_blocks(run.stdout_text, fallback_function, fallback_file)
            + parse_violation_blocks(run.stderr_text, fallback_function, fallback_file))


def annotate(violation: Violation, patterns: Optional[PatternTable] = None,
             cwes: Optional[CweTable] = None) -> Violation:
    """Fill in category and CWE list.  Malformed blocks stay OTHER."""
    if violation.line == 0:
        cat = ViolationCategory.OTHER
    else:
        cat = classify(violation.property_text, patterns)
    return dataclasses.replace(violation, category=cat, cwes=tuple(map_cwe(cat, cwes)))


def dedupe(violations: Iterable[Violation]) -> list[Violation]:
    """Collapse repeats of (file, line, function, category), counting them."""
    merged: dict[tuple, Violation] = {}
    for v in violations:
        prev = merged.get(v.dedup_key)
        if prev is None:
            merged[v.dedup_key] = v
        else:
            merged[v.dedup_key] = dataclasses.replace(
                prev, occurrences=prev.occurrences + v.occurrences)
    return list(merged.values())
