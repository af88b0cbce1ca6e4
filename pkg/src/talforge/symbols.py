"""Symbol conventions shared by every formalism.

Symbols are plain strings.  Composite symbols (tri-labels, state-indexed
stack symbols, fresh pre-terminals) are spelled ``base<part|part|...>``; an
empty part stands for the absent slot (written ⊥ in the literature).  The
spelling contains no whitespace, so it survives a round trip through the
text format unchanged.
"""

from __future__ import annotations

from typing import Iterable, Optional

HOLE = "*"
"""Reserved hole marker used in holed yields.  It belongs to no alphabet."""

EPS = ""
"""The empty word / empty scan, written ``eps`` in the text format."""


class TalforgeError(ValueError):
    """Base class for all library errors."""


class ValidationError(TalforgeError):
    """Raised when a system violates its structural invariants."""

    def __init__(self, violations: Iterable[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid system")


class NotNormalFormError(TalforgeError):
    """Raised when an operation needs a normal-form input and did not get one."""


def compose(base: str, *parts: Optional[str]) -> str:
    """Build a composite symbol such as ``A<X|Z>`` or ``A<X|>``."""
    return f"{base}<{'|'.join('' if p is None else p for p in parts)}>"


def decompose(symbol: str) -> tuple[str, tuple[Optional[str], ...]]:
    """Inverse of :func:`compose` for the outermost bracket group.

    >>> decompose("A<X|>")
    ('A', ('X', None))
    """
    if not symbol.endswith(">") or "<" not in symbol:
        return symbol, ()
    depth = 0
    for i, ch in enumerate(symbol):
        if ch == "<":
            if depth == 0:
                open_at = i
                break
    else:  # pragma: no cover - guarded above
        return symbol, ()
    base, inner = symbol[:open_at], symbol[open_at + 1 : -1]
    parts: list[Optional[str]] = []
    buf: list[str] = []
    for ch in inner:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        if ch == "|" and depth == 0:
            parts.append("".join(buf) or None)
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf) or None)
    return base, tuple(parts)


def fresh(base: str, taken: set[str]) -> str:
    """Return ``base`` (or ``base'``, ``base''``...) not yet in ``taken``; records it."""
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def word(text: str | Iterable[str]) -> tuple[str, ...]:
    """Normalize a terminal string given as text or as a symbol sequence.

    A plain ``str`` is split into characters, which is what the examples in the
    docs and tests use; multi-character terminals must be given as a sequence.
    """
    if isinstance(text, str):
        return tuple(text)
    return tuple(text)


class NotSpinalError(TalforgeError):
    """Raised when a TAG or PAA rule is not spinal; carries the offending rule indices."""

    def __init__(self, offending: Iterable[int], what: str = "production"):
        self.offending = list(offending)
        super().__init__(f"not spinal: {what}s {self.offending}")
