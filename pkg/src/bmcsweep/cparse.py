"""Lexical extraction of C function definitions.

No preprocessing and no grammar: comments and literals are blanked out,
preprocessor lines are ignored, and every top-level ``ident ( ... ) {``
becomes a record.  Offsets are preserved throughout, so positions found
in the blanked text index straight into the original.
"""

from __future__ import annotations

import bisect
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from bmcsweep.discovery import SourceFile
from bmcsweep.errors import InputError

log = logging.getLogger(__name__)

MAX_NESTING = 4096

_NONCODE = re.compile(
    r"""
      //(?:\\\n|[^\n])*                         # line comment, honours continuations
    | /\*[\s\S]*?(?P<bc>\*/|\Z)                 # block comment
    | "(?:\\[\s\S]|[^"\\\n])*(?P<dq>"?)         # string literal
    | '(?:\\[\s\S]|[^'\\\n])*(?P<sq>'?)         # character literal
    """,
    re.VERBOSE,
)
_NOT_NEWLINE = re.compile(r"[^\n]")

_DIRECTIVE = re.compile(r"^[ \t]*#(?:\\\n|[^\n])*", re.MULTILINE)
_BRACE = re.compile(r"[{}]")
_KNR_DECLS = re.compile(r"\s*(?:[A-Za-z_][\w\s\*,\[\]]*;\s*)+\Z")
_CALL = re.compile(r"(?<![\w$])([A-Za-z_]\w*)\s*\(")

# Names that precede "(" at top level without being a function name.
_NOT_A_NAME = frozenset(
    {"if", "while", "for", "switch", "return", "sizeof", "do", "else", "case",
     "_Alignof", "alignof", "_Static_assert", "typeof", "__typeof__", "_Generic"}
)
# Trailing annotations skipped between the parameter list and the body.
_ANNOTATIONS = frozenset({"__attribute__", "__attribute", "__declspec", "__asm__", "asm", "__asm"})


@dataclass(frozen=True)
class FunctionRecord:
    name: str
    params_text: str
    param_decls: tuple[str, ...]
    body_text: str
    start_line: int
    end_line: int
    source: str
    grade: Optional[int] = None
    # blanked twins of params_text/body_text, used for lexical rules
    params_code: str = field(default="", repr=False, compare=False)
    body_code: str = field(default="", repr=False, compare=False)

    def __post_init__(self) -> None:
        # hand-built records (tests, callers) get their blanked twins here
        if len(self.params_code) != len(self.params_text):
            object.__setattr__(self, "params_code", neutralize_noncode(self.params_text))
        if len(self.body_code) != len(self.body_text):
            object.__setattr__(self, "body_code", neutralize_noncode(self.body_text))

    @property
    def key(self) -> tuple[str, str]:
        return (self.source, self.name)


CallMap = Mapping[str, frozenset]


def _blank(match: re.Match) -> str:
    return _NOT_NEWLINE.sub(" ", match.group())


def neutralize_noncode(text: str) -> str:
    """Blank comments and string/character literals with spaces.

    Newlines survive and the length is unchanged, so every offset, line and
    column in the result refers to the same place in *text*.
    """
    def repl(m: re.Match) -> str:
        if m.group("bc") == "" or m.group("dq") == "" or m.group("sq") == "":
            log.warning("unterminated comment or literal at offset %d", m.start())
        return _blank(m)

    return _NONCODE.sub(repl, text)


def blank_directives(code: str) -> str:
    """Blank preprocessor lines (with continuations) in already-neutralized code."""
    return _DIRECTIVE.sub(_blank, code)


class _Lines:
    def __init__(self, text: str) -> None:
        self.starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def line_of(self, offset: int) -> int:
        return bisect.bisect_right(self.starts, offset)


def _ident_start(code: str, end: int) -> int:
    """Start of the identifier whose last character is code[end], or -1."""
    j = end
    while j >= 0 and (code[j].isalnum() or code[j] == "_"):
        j -= 1
    j += 1
    if j > end or code[j].isdigit():
        return -1
    return j


def _skip_ws_back(code: str, j: int) -> int:
    while j >= 0 and code[j].isspace():
        j -= 1
    return j


def _match_paren_back(code: str, close: int) -> int:
    """Index of the "(" matching the ")" at *close*, or -1."""
    depth = 0
    for j in range(close, -1, -1):
        c = code[j]
        if c == ")":
            depth += 1
        elif c == "(":
            depth -= 1
            if depth == 0:
                return j
        elif c in "{};":
            return -1
    return -1


def _header_before(code: str, brace: int) -> Optional[tuple[int, int, int]]:
    """Locate ``name ( params )`` right before the brace at *brace*.

    Returns (name_start, lparen, rparen) or None.
    """
    j = _skip_ws_back(code, brace - 1)
    while j >= 0 and code[j] == ")":
        lp = _match_paren_back(code, j)
        if lp < 0:
            return None
        k = _skip_ws_back(code, lp - 1)
        start = _ident_start(code, k)
        if start < 0:
            return None
        name = code[start:k + 1]
        if name in _ANNOTATIONS:
            # void f(void) __attribute__((noreturn)) { ... }
            j = _skip_ws_back(code, start - 1)
            continue
        if name in _NOT_A_NAME:
            return None
        return start, lp, j
    return None


def _looks_knr(code: str, brace: int) -> bool:
    j = _skip_ws_back(code, brace - 1)
    if j < 0 or code[j] != ";":
        return False
    rp = code.rfind(")", 0, j)
    if rp < 0 or not _KNR_DECLS.match(code, rp + 1, brace):
        return False
    return _header_before(code, rp + 1) is not None


def split_top_level(code: str, original: str) -> list[str]:
    """Split a parameter list on commas outside any bracket pair.

    *code* is the blanked version of *original*; cut points are found in the
    former and applied to the latter.
    """
    if not code.strip():
        return []
    parts, depth, last = [], 0, 0
    for i, c in enumerate(code):
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        elif c == "," and depth == 0:
            parts.append(original[last:i].strip())
            last = i + 1
    parts.append(original[last:].strip())
    return parts


def extract_from_text(text: str, source: str) -> list[FunctionRecord]:
    code = blank_directives(neutralize_noncode(text))
    lines = _Lines(text)
    records: list[FunctionRecord] = []

    depth = 0
    open_at = -1
    header: Optional[tuple[int, int, int]] = None
    for m in _BRACE.finditer(code):
        pos = m.start()
        if code[pos] == "{":
            if depth == 0:
                open_at = pos
                header = _header_before(code, pos)
                if header is None and _looks_knr(code, pos):
                    log.warning("%s:%d: K&R-style definition skipped",
                                source, lines.line_of(pos))
            depth += 1
            if depth > MAX_NESTING:
                log.warning("%s: brace nesting deeper than %d, file skipped", source, MAX_NESTING)
                return []
        else:
            if depth == 0:
                log.warning("%s:%d: unmatched '}' ignored", source, lines.line_of(pos))
                continue
            depth -= 1
            if depth == 0 and header is not None:
                name_at, lp, rp = header
                name_end = lp
                while code[name_end - 1].isspace():
                    name_end -= 1
                records.append(
                    FunctionRecord(
                        name=text[name_at:name_end],
                        params_text=text[lp + 1:rp],
                        param_decls=tuple(split_top_level(code[lp + 1:rp], text[lp + 1:rp])),
                        body_text=text[open_at + 1:pos],
                        start_line=lines.line_of(name_at),
                        end_line=lines.line_of(pos),
                        source=source,
                        params_code=code[lp + 1:rp],
                        body_code=code[open_at + 1:pos],
                    )
                )
                header = None
    if depth > 0:
        log.warning("%s: unbalanced braces at end of file", source)
    return records


def read_source(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            return fh.read().decode("utf-8", errors="replace")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def extract_functions(file: Union[SourceFile, str]) -> list[FunctionRecord]:
    """All top-level function definitions of *file*, in source order."""
    path = file.path if isinstance(file, SourceFile) else file
    return extract_from_text(read_source(path), path)


def called_names(body_code: str) -> set[str]:
    return {m.group(1) for m in _CALL.finditer(body_code)}


def build_call_map(functions: Iterable[FunctionRecord]) -> dict[str, frozenset]:
    """Map each function name to the extracted names its body calls.

    Only call-shaped uses (``name (``) count; taking a function's address
    does not.  Self-calls are dropped.
    """
    functions = list(functions)
    known = {f.name for f in functions}
    calls: dict[str, set] = {f.name: set() for f in functions}
    for f in functions:
        calls[f.name] |= (called_names(f.body_code) & known) - {f.name}
    return {name: frozenset(c) for name, c in calls.items()}
