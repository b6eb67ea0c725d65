"""Tokenizer for Java source.

The tokenizer never fails: characters it does not understand become
single-character punctuation tokens, unterminated strings stop at the end of
the line and unterminated block comments run to the end of the input.
Whitespace is skipped but every token records its offset, so the gaps between
tokens (always pure whitespace) can be recovered from the source.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORD = "keyword"
IDENTIFIER = "identifier"
NUMBER = "number-literal"
STRING = "string-literal"
CHAR = "char-literal"
OPERATOR = "operator"
PUNCTUATION = "punctuation"
COMMENT = "comment"

KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null
    """.split()
)

PRIMITIVES = frozenset("boolean byte char short int long float double".split())

# Longest first so that the alternation is greedy.
OPERATORS = sorted(
    """
    >>>= <<= >>= >>> ... -> :: ++ -- && || == != <= >= += -= *= /= %= &= |=
    ^= << >> + - * / % & | ^ ! ~ = < > ? : @
    """.split(),
    key=len,
    reverse=True,
)

_NUMBER_RE = re.compile(
    r"""
    0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?[0-9_]+)?[lLfFdD]?
  | 0[bB][01_]+[lL]?
  | (?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9][0-9_]*)(?:[eE][+-]?[0-9_]+)?[lLfFdD]?
    """,
    re.VERBOSE,
)
_OPERATOR_RE = re.compile("|".join(re.escape(op) for op in OPERATORS))
_LINE_BREAK_RE = re.compile(r"\r\n|\r|\n")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    offset: int

    def is_(self, text: str) -> bool:
        return self.text == text and self.kind not in (STRING, CHAR, COMMENT)


def split_lines(source: str) -> list[str]:
    """Split on the same line terminators the tokenizer counts."""
    return _LINE_BREAK_RE.split(source)


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def _scan_quoted(source: str, pos: int, quote: str) -> int:
    """Return the end offset of a quoted literal starting at ``pos``."""
    n = len(source)
    i = pos + 1
    while i < n:
        ch = source[i]
        if ch == "\\":
            if i + 1 < n and source[i + 1] in "\r\n":
                return i + 1
            i += 2
            continue
        if ch == quote:
            return i + 1
        if ch in "\r\n":
            return i
        i += 1
    return n


def tokenize(source: str | bytes) -> list[Token]:
    """Split ``source`` into tokens, comments included."""
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    tokens: list[Token] = []
    n = len(source)
    pos = 0
    line = 1
    line_start = 0

    def advance_lines(start: int, end: int) -> None:
        nonlocal line, line_start
        for m in _LINE_BREAK_RE.finditer(source, start, end):
            line += 1
            line_start = m.end()

    while pos < n:
        ch = source[pos]
        if ch.isspace():
            end = pos + 1
            while end < n and source[end].isspace():
                end += 1
            advance_lines(pos, end)
            pos = end
            continue

        col = pos - line_start + 1
        start_line = line
        if source.startswith("//", pos):
            m = _LINE_BREAK_RE.search(source, pos)
            end = m.start() if m else n
            kind = COMMENT
        elif source.startswith("/*", pos):
            close = source.find("*/", pos + 2)
            end = n if close < 0 else close + 2
            kind = COMMENT
        elif source.startswith('"""', pos):
            close = source.find('"""', pos + 3)
            end = n if close < 0 else close + 3
            kind = STRING
        elif ch == '"':
            end = _scan_quoted(source, pos, '"')
            kind = STRING
        elif ch == "'":
            end = _scan_quoted(source, pos, "'")
            kind = CHAR
        elif ch.isdigit() or (ch == "." and pos + 1 < n and source[pos + 1].isdigit()):
            m = _NUMBER_RE.match(source, pos)
            end = m.end() if m else pos + 1
            kind = NUMBER
            # digits glued to letters (e.g. "123abc") stay one lexeme
            while end < n and _is_ident_part(source[end]):
                end += 1
        elif _is_ident_start(ch):
            end = pos + 1
            while end < n and _is_ident_part(source[end]):
                end += 1
            kind = KEYWORD if source[pos:end] in KEYWORDS else IDENTIFIER
        else:
            m = _OPERATOR_RE.match(source, pos)
            if m and m.group() != "...":
                end = m.end()
                kind = OPERATOR
            elif m:
                end = m.end()
                kind = PUNCTUATION
            else:
                end = pos + 1
                kind = PUNCTUATION
        text = source[pos:end]
        tokens.append(Token(kind, text, start_line, col, pos))
        if kind in (COMMENT, STRING):
            advance_lines(pos, end)
        pos = end
    return tokens


def untokenize(tokens: list[Token], source: str) -> str:
    """Rebuild the source from tokens plus the whitespace between them."""
    parts: list[str] = []
    pos = 0
    for tok in tokens:
        parts.append(source[pos:tok.offset])
        parts.append(tok.text)
        pos = tok.offset + len(tok.text)
    parts.append(source[pos:])
    return "".join(parts)
