"""Low-level text scanning helpers shared by the parser and the pattern matcher.

Solidity sources are never parsed against a grammar here; everything downstream
works on a *neutralized* view of the text in which comments and string literals
have been blanked out (offsets preserved), so braces and keywords inside them
can never confuse span computation or pattern matching.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from functools import lru_cache

# Order matters: at any position the leftmost alternative wins, so a `//`
# inside a string literal is consumed by the string branch and vice versa.
# Strings never span lines in Solidity; an unterminated literal ends at EOL.
_COMMENT_OR_STRING_RE = re.compile(
    r"//[^\n]*"
    r"|/\*.*?(?:\*/|\Z)"
    r'|"(?:\\.|[^"\\\n])*"?'
    r"|'(?:\\.|[^'\\\n])*'?",
    re.DOTALL,
)

_WS_RUN_RE = re.compile(r"\s+")


@lru_cache(maxsize=32)
def neutralize(source: str) -> str:
    """Blank comments and string literals with spaces, preserving offsets.

    Newlines inside blanked regions are kept so line numbers stay stable.
    The result has exactly the same length as the input.
    """
    pieces: list[str] = []
    last = 0
    for m in _COMMENT_OR_STRING_RE.finditer(source):
        start, end = m.span()
        pieces.append(source[last:start])
        pieces.append("".join("\n" if c == "\n" else " " for c in source[start:end]))
        last = end
    pieces.append(source[last:])
    return "".join(pieces)


def normalize_ws(text: str) -> tuple[str, list[int], list[int]]:
    """Collapse every whitespace run to a single space.

    Returns ``(normalized, starts, ends)`` where for normalized character
    ``i``, ``starts[i]`` is the offset of the first original character it
    stands for and ``ends[i]`` the exclusive end offset.  A normalized match
    span ``[a, b)`` maps back to ``(starts[a], ends[b - 1])``.
    """
    pieces: list[str] = []
    starts: list[int] = []
    ends: list[int] = []
    pos = 0
    for m in _WS_RUN_RE.finditer(text):
        s, e = m.span()
        if s > pos:
            pieces.append(text[pos:s])
            starts.extend(range(pos, s))
            ends.extend(range(pos + 1, s + 1))
        pieces.append(" ")
        starts.append(s)
        ends.append(e)
        pos = e
    if pos < len(text):
        pieces.append(text[pos:])
        starts.extend(range(pos, len(text)))
        ends.extend(range(pos + 1, len(text) + 1))
    return "".join(pieces), starts, ends


class BraceIndex:
    """Precomputed positions of ``{`` and ``}`` for fast matching."""

    def __init__(self, text: str):
        self._text = text
        self._positions = [m.start() for m in re.finditer(r"[{}]", text)]

    def match(self, open_idx: int) -> int | None:
        """Index of the ``}`` matching the ``{`` at *open_idx*, or None."""
        depth = 0
        i = bisect_left(self._positions, open_idx)
        for j in range(i, len(self._positions)):
            p = self._positions[j]
            depth += 1 if self._text[p] == "{" else -1
            if depth == 0:
                return p
        return None


def matching_paren(text: str, open_idx: int) -> int | None:
    """Index of the ``)`` matching the ``(`` at *open_idx*, or None."""
    depth = 0
    for i in range(open_idx, len(text)):
        c = text[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return i
    return None


def line_of(source: str, offset: int) -> int:
    """1-based line number of a character offset."""
    return source.count("\n", 0, offset) + 1
