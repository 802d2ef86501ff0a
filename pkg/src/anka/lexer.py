"""Tokenizer for pipeline source text.

Keywords are case-sensitive upper-case. Whitespace (including newlines)
and ``#`` comments are skipped; block structure comes entirely from
keywords and colons, never from indentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional, Union

from anka.errors import ConversionError, ParseError
from anka.location import SourceLocation
from anka.values import INT64_MAX, INT64_MIN, parse_decimal

KEYWORDS = frozenset(
    {
        # structure
        "PIPELINE", "INPUT", "STEP", "OUTPUT", "TABLE",
        # types
        "INT", "STRING", "DECIMAL", "BOOL", "DATE", "DATETIME",
        # data statements
        "FILTER", "WHERE", "INTO", "SELECT", "COLUMNS", "DISTINCT",
        "MAP", "WITH", "RENAME", "COLUMN", "TO", "DROP", "ADD_COLUMN",
        "AGGREGATE", "GROUP_BY", "COMPUTE", "AS",
        "COUNT", "SUM", "AVG", "MIN", "MAX",
        "SORT", "BY", "ASC", "DESC", "LIMIT", "SKIP", "FIRST",
        "SLICE", "FROM", "JOIN", "LEFT_JOIN", "ON", "UNION",
        "READ", "WRITE", "FETCH", "POST", "JSON", "CSV",
        # control flow
        "IF", "THEN", "ELSE", "END_IF",
        "FOR_EACH", "IN", "DO", "END_FOR",
        "WHILE", "END_WHILE",
        "TRY", "ON_ERROR", "END_TRY",
        # boolean operators and literals
        "AND", "OR", "NOT", "TRUE", "FALSE",
    }
)

# Longest first so `==` wins over `=`, `=>` over `=`.
OPERATORS = ("=>", "==", "!=", ">=", "<=", ">", "<", "+", "-", "*", "/",
             "(", ")", "[", "]", ":", ",", "=")

KIND_KEYWORD = "KEYWORD"
KIND_IDENT = "IDENT"
KIND_INT = "INT"
KIND_DECIMAL = "DECIMAL"
KIND_STRING = "STRING"
KIND_OP = "OP"
KIND_EOF = "EOF"

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    location: SourceLocation
    value: Union[int, str, Decimal, None] = field(default=None)

    def describe(self) -> str:
        if self.kind == KIND_KEYWORD:
            return self.text
        if self.kind == KIND_OP:
            return f"'{self.text}'"
        if self.kind == KIND_EOF:
            return "end of input"
        return self.kind.lower() if self.kind != KIND_IDENT else "identifier"


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or _is_digit(ch)


def _is_digit(ch: str) -> bool:
    # ASCII only: str.isdigit() admits superscripts and other Unicode
    # digits that int() rejects
    return "0" <= ch <= "9"


class _Scanner:
    def __init__(self, source: str) -> None:
        self.source = source
        self.pos = 0
        self.line = 1
        self.column = 1
        self.byte_offset = 0
        self.ascii_only = source.isascii()

    def location(self) -> SourceLocation:
        return SourceLocation(self.line, self.column, self.byte_offset)

    def peek(self, ahead: int = 0) -> Optional[str]:
        i = self.pos + ahead
        return self.source[i] if i < len(self.source) else None

    def advance(self) -> str:
        ch = self.source[self.pos]
        self.pos += 1
        self.byte_offset += 1 if self.ascii_only else len(ch.encode("utf-8"))
        if ch == "\n":
            self.line += 1
            self.column = 1
        else:
            self.column += 1
        return ch

    def error(self, message: str, location: Optional[SourceLocation] = None) -> ParseError:
        return ParseError(message, location or self.location())


def tokenize(source: str) -> list[Token]:
    """Scan source text into tokens. Raises ParseError on an illegal
    character or an unterminated string literal."""
    sc = _Scanner(source)
    tokens: list[Token] = []
    while True:
        ch = sc.peek()
        if ch is None:
            return tokens
        if ch in " \t\r\n":
            sc.advance()
            continue
        if ch == "#":
            while sc.peek() is not None and sc.peek() != "\n":
                sc.advance()
            continue
        start = sc.location()
        if _is_ident_start(ch):
            tokens.append(_scan_word(sc, start))
        elif _is_digit(ch):
            tokens.append(_scan_number(sc, start))
        elif ch == '"':
            tokens.append(_scan_string(sc, start))
        else:
            op = _match_operator(sc)
            if op is None:
                raise sc.error(f"unexpected character {ch!r}", start)
            tokens.append(Token(KIND_OP, op, start))


def _match_operator(sc: _Scanner) -> Optional[str]:
    rest = sc.source[sc.pos : sc.pos + 2]
    for op in OPERATORS:
        if rest.startswith(op):
            for _ in op:
                sc.advance()
            return op
    return None


def _scan_word(sc: _Scanner, start: SourceLocation) -> Token:
    chars = [sc.advance()]
    while (nxt := sc.peek()) is not None and _is_ident_char(nxt):
        chars.append(sc.advance())
    word = "".join(chars)
    if word in KEYWORDS:
        return Token(KIND_KEYWORD, word, start)
    return Token(KIND_IDENT, word, start, value=word)


def _scan_number(sc: _Scanner, start: SourceLocation) -> Token:
    digits = [sc.advance()]
    while (nxt := sc.peek()) is not None and _is_digit(nxt):
        digits.append(sc.advance())
    is_decimal = sc.peek() == "." and (frac := sc.peek(1)) is not None and _is_digit(frac)
    if is_decimal:
        digits.append(sc.advance())
        while (nxt := sc.peek()) is not None and _is_digit(nxt):
            digits.append(sc.advance())
    text = "".join(digits)
    if is_decimal:
        try:
            value = parse_decimal(text)
        except ConversionError as exc:
            raise sc.error(str(exc), start) from None
        return Token(KIND_DECIMAL, text, start, value=value)
    number = int(text)
    if not INT64_MIN <= number <= INT64_MAX:
        raise sc.error(f"integer literal {text} out of 64-bit range", start)
    return Token(KIND_INT, text, start, value=number)


def _scan_string(sc: _Scanner, start: SourceLocation) -> Token:
    sc.advance()  # opening quote
    chars: list[str] = []
    while True:
        ch = sc.peek()
        if ch is None or ch == "\n":
            raise sc.error("unterminated string literal", start)
        sc.advance()
        if ch == '"':
            break
        if ch == "\\":
            esc = sc.peek()
            if esc is None:
                raise sc.error("unterminated string literal", start)
            if esc not in _ESCAPES:
                raise sc.error(f"invalid escape sequence '\\{esc}'")
            sc.advance()
            chars.append(_ESCAPES[esc])
        else:
            chars.append(ch)
    text = "".join(chars)
    return Token(KIND_STRING, text, start, value=text)
