"""Action grammar: parsing, rendering, and availability patterns.

The grammar is closed over three verbs::

    action   := "noop" | verb "[" quoted "]"
    verb     := "search" | "click"
    quoted   := '"' chars '"'        (backslash escapes for '"' and '\\' only)

Verbs are case-sensitive lowercase.  Whitespace around the whole action is
ignored; whitespace inside the brackets is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

_VERBS_WITH_ARG = ("search", "click")


class Verb(str, Enum):
    """The closed verb set of the action grammar."""

    SEARCH = "search"
    CLICK = "click"
    NOOP = "noop"


class ParseError(ValueError):
    """Raised when a string is not produced by the action grammar."""

    def __init__(self, position: int, reason: str) -> None:
        super().__init__(f"{reason} at position {position}")
        self.position = position
        self.reason = reason


@dataclass(frozen=True, slots=True)
class Action:
    """A grammar-constrained executable command."""

    verb: Verb
    arg: str | None = None

    def __post_init__(self) -> None:
        if self.verb is Verb.NOOP:
            if self.arg is not None:
                raise ValueError("noop carries no argument")
        elif not self.arg:
            raise ValueError(f"{self.verb.value} requires a non-empty argument")

    def __str__(self) -> str:
        return render_action(self)


NOOP = Action(Verb.NOOP)


def _escape(arg: str) -> str:
    return arg.replace("\\", "\\\\").replace('"', '\\"')


def render_action(a: Action) -> str:
    """Canonical text form; parse_action(render_action(a)) == a."""
    if a.verb is Verb.NOOP:
        return "noop"
    return f'{a.verb.value}["{_escape(a.arg or "")}"]'


def _skip_ws(s: str, i: int) -> int:
    while i < len(s) and s[i].isspace():
        i += 1
    return i


def _read_verb(s: str, i: int) -> tuple[str, int]:
    j = i
    while j < len(s) and "a" <= s[j] <= "z":
        j += 1
    return s[i:j], j


def _read_quoted(s: str, i: int) -> tuple[str, int]:
    # i points at the opening quote
    if i >= len(s) or s[i] != '"':
        raise ParseError(i, "argument must be double-quoted")
    start = i
    i += 1
    out: list[str] = []
    while True:
        if i >= len(s):
            raise ParseError(len(s), "unterminated string")
        c = s[i]
        if c == '"':
            i += 1
            break
        if c == "\\":
            if i + 1 >= len(s):
                raise ParseError(i, "unterminated escape")
            nxt = s[i + 1]
            if nxt not in ('"', "\\"):
                raise ParseError(i, f"invalid escape '\\{nxt}'")
            out.append(nxt)
            i += 2
        else:
            out.append(c)
            i += 1
    arg = "".join(out)
    if not arg:
        raise ParseError(start, "empty argument")
    return arg, i


def parse_action(text: str) -> Action:
    """Parse an action string, raising ParseError on any grammar violation."""
    s = text
    i = _skip_ws(s, 0)
    verb, j = _read_verb(s, i)
    if not verb:
        raise ParseError(i, "expected a verb")
    if verb == "noop":
        j = _skip_ws(s, j)
        if j != len(s):
            raise ParseError(j, "trailing characters after noop")
        return NOOP
    if verb not in _VERBS_WITH_ARG:
        raise ParseError(i, f"unknown verb {verb!r}")
    if j >= len(s) or s[j] != "[":
        raise ParseError(j, "expected '['")
    arg, j = _read_quoted(s, j + 1)
    if j >= len(s) or s[j] != "]":
        raise ParseError(j, "expected ']'")
    j = _skip_ws(s, j + 1)
    if j != len(s):
        raise ParseError(j, "trailing characters")
    return Action(Verb(verb), arg)


@dataclass(frozen=True, slots=True)
class ActionPattern:
    """An availability constraint: an exact action or a wildcard form.

    The wildcard form ``verb[*]`` permits any argument for that verb.
    """

    verb: Verb
    arg: str | None = None
    wildcard: bool = False

    def __post_init__(self) -> None:
        if self.wildcard:
            if self.arg is not None:
                raise ValueError("wildcard patterns carry no argument")
            if self.verb is Verb.NOOP:
                raise ValueError("noop has no wildcard form")
        elif self.verb is not Verb.NOOP and not self.arg:
            raise ValueError(f"{self.verb.value} pattern requires an argument")

    def matches(self, a: Action) -> bool:
        if a.verb is not self.verb:
            return False
        return self.wildcard or a.arg == self.arg

    def __str__(self) -> str:
        return render_pattern(self)


def render_pattern(p: ActionPattern) -> str:
    """Canonical text form; parse_pattern(render_pattern(p)) == p."""
    if p.wildcard:
        return f"{p.verb.value}[*]"
    return render_action(Action(p.verb, p.arg))


def parse_pattern(text: str) -> ActionPattern:
    """Parse an availability pattern: an action string or ``verb[*]``."""
    s = text.strip()
    for verb in _VERBS_WITH_ARG:
        if s == f"{verb}[*]":
            return ActionPattern(Verb(verb), wildcard=True)
    a = parse_action(s)
    return ActionPattern(a.verb, a.arg)


def pattern_for(a: Action) -> ActionPattern:
    """The exact pattern matching only ``a``."""
    return ActionPattern(a.verb, a.arg)


def allowed(a: Action, patterns: tuple[ActionPattern, ...] | list[ActionPattern]) -> bool:
    """True if ``a`` matches any pattern; an empty pattern set is unconstrained."""
    if not patterns:
        return True
    return any(p.matches(a) for p in patterns)


__all__ = [
    "Action",
    "ActionPattern",
    "NOOP",
    "ParseError",
    "Verb",
    "allowed",
    "parse_action",
    "parse_pattern",
    "pattern_for",
    "render_action",
    "render_pattern",
]
