"""Builtin scalar functions: signatures and implementations.

Every builtin propagates null: if any argument is null the result is
null and the implementation is not invoked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Optional

from anka.errors import ConversionError
from anka.values import (
    INT64_MAX,
    INT64_MIN,
    Cell,
    ValueType,
    format_cell,
    parse_decimal,
)

ANY = None  # argument accepts every value type

_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class Builtin:
    name: str
    params: tuple[Optional[frozenset[ValueType]], ...]
    result: ValueType
    fn: Callable[..., Cell]

    @property
    def arity(self) -> int:
        return len(self.params)


def _concat(a: str, b: str) -> str:
    return a + b


def _substring(s: str, start: int, length: int) -> str:
    if start < 0 or length < 0:
        raise ConversionError(
            f"SUBSTRING arguments must be non-negative, got start={start} length={length}"
        )
    return s[start : start + length]


def _replace(s: str, needle: str, replacement: str) -> str:
    if needle == "":
        return s
    return s.replace(needle, replacement)


def _to_int(value: Cell) -> int:
    if isinstance(value, bool):
        raise ConversionError("TO_INT does not accept BOOL")
    if isinstance(value, int):
        return value
    if isinstance(value, Decimal):
        result = int(value)  # truncates toward zero
    elif isinstance(value, str):
        if not _INT_RE.match(value.strip()):
            raise ConversionError(f"cannot convert {value!r} to INT")
        result = int(value.strip())
    else:
        raise ConversionError(f"cannot convert {type(value).__name__} to INT")
    if not INT64_MIN <= result <= INT64_MAX:
        raise ConversionError(f"INT overflow converting {value!r}")
    return result


def _to_decimal(value: Cell) -> Decimal:
    if isinstance(value, bool):
        raise ConversionError("TO_DECIMAL does not accept BOOL")
    if isinstance(value, Decimal):
        return value
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, str):
        return parse_decimal(value.strip())
    raise ConversionError(f"cannot convert {type(value).__name__} to DECIMAL")


_NUMERIC = frozenset({ValueType.INT, ValueType.DECIMAL})
_STRINGY = frozenset({ValueType.STRING})
_INTY = frozenset({ValueType.INT})
_TEMPORAL = frozenset({ValueType.DATE, ValueType.DATETIME})
_CASTABLE = frozenset({ValueType.STRING, ValueType.INT, ValueType.DECIMAL})

BUILTINS: dict[str, Builtin] = {
    b.name: b
    for b in [
        Builtin("CONCAT", (_STRINGY, _STRINGY), ValueType.STRING, _concat),
        Builtin("UPPER", (_STRINGY,), ValueType.STRING, str.upper),
        Builtin("LOWER", (_STRINGY,), ValueType.STRING, str.lower),
        Builtin("TRIM", (_STRINGY,), ValueType.STRING, str.strip),
        Builtin("LENGTH", (_STRINGY,), ValueType.INT, len),
        Builtin("SUBSTRING", (_STRINGY, _INTY, _INTY), ValueType.STRING, _substring),
        Builtin("REPLACE", (_STRINGY, _STRINGY, _STRINGY), ValueType.STRING, _replace),
        Builtin("TO_STRING", (ANY,), ValueType.STRING, format_cell),
        Builtin("TO_INT", (_CASTABLE,), ValueType.INT, _to_int),
        Builtin("TO_DECIMAL", (_CASTABLE,), ValueType.DECIMAL, _to_decimal),
        Builtin("YEAR", (_TEMPORAL,), ValueType.INT, lambda d: d.year),
        Builtin("MONTH", (_TEMPORAL,), ValueType.INT, lambda d: d.month),
        Builtin("DAY", (_TEMPORAL,), ValueType.INT, lambda d: d.day),
    ]
}


def call_builtin(name: str, args: list[Cell]) -> Cell:
    """Invoke a builtin with evaluated arguments. Null in, null out."""
    builtin = BUILTINS[name]
    if any(a is None for a in args):
        return None
    return builtin.fn(*args)
