"""Typed scalar values, schemas, and immutable tables.

Cells are plain Python objects tagged by their column's declared type:

    INT       -> int (64-bit range enforced)
    STRING    -> str
    DECIMAL   -> decimal.Decimal (exact, non-negative scale, scale <= 10)
    BOOL      -> bool
    DATE      -> datetime.date
    DATETIME  -> datetime.datetime (seconds precision, naive)
    null      -> None (admitted in any column)

``bool`` is an ``int`` subclass and ``datetime`` a ``date`` subclass in
Python, so all type dispatch here checks the narrow type first.
"""

from __future__ import annotations

import datetime
import decimal
import enum
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from anka.errors import (
    ConversionError,
    DivisionByZero,
    IncomparableError,
    TableError,
)

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# Fractional digits allowed when a decimal enters the system (literals,
# JSON, CSV). Arithmetic may produce finer intermediate scales.
MAX_DECIMAL_SCALE = 10

# Mantissa headroom comparable to a 128-bit integer (~38.5 digits).
# Exact operations that would need more digits fail loudly instead of
# rounding silently.
DECIMAL_PRECISION = 38

_EXACT_CTX = decimal.Context(
    prec=DECIMAL_PRECISION,
    traps=[decimal.Inexact, decimal.InvalidOperation, decimal.Overflow],
)

# Scale added by division and AVG on top of the operand scale.
DIVISION_EXTRA_SCALE = 4

Cell = Union[int, str, Decimal, bool, datetime.date, datetime.datetime, None]


class ValueType(str, enum.Enum):
    """The six cell types of the language."""

    INT = "INT"
    STRING = "STRING"
    DECIMAL = "DECIMAL"
    BOOL = "BOOL"
    DATE = "DATE"
    DATETIME = "DATETIME"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


NUMERIC_TYPES = frozenset({ValueType.INT, ValueType.DECIMAL})
ORDERED_TYPES = frozenset(ValueType)  # every type has a total order


def value_type_of(value: Cell) -> Optional[ValueType]:
    """Classify a non-null cell; returns None for None or foreign objects."""
    if value is None:
        return None
    if isinstance(value, bool):
        return ValueType.BOOL
    if isinstance(value, int):
        return ValueType.INT
    if isinstance(value, Decimal):
        return ValueType.DECIMAL
    if isinstance(value, str):
        return ValueType.STRING
    if isinstance(value, datetime.datetime):
        return ValueType.DATETIME
    if isinstance(value, datetime.date):
        return ValueType.DATE
    return None


def cell_matches(value: Cell, vtype: ValueType) -> bool:
    """True when ``value`` is null or a well-formed cell of ``vtype``."""
    if value is None:
        return True
    actual = value_type_of(value)
    if actual is not vtype:
        return False
    if vtype is ValueType.INT:
        return INT64_MIN <= value <= INT64_MAX
    if vtype is ValueType.DECIMAL:
        return value.is_finite()
    return True


@dataclass(frozen=True)
class Field:
    """A named, typed column."""

    name: str
    type: ValueType


class Schema:
    """Ordered field list with unique names. Order is significant."""

    __slots__ = ("fields", "_index")

    def __init__(self, fields: Iterable[Field]) -> None:
        fields = tuple(fields)
        if not fields:
            raise TableError("schema must have at least one field")
        index: dict[str, int] = {}
        for i, f in enumerate(fields):
            if f.name in index:
                raise TableError(f"duplicate field name '{f.name}' in schema")
            index[f.name] = i
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Schema is immutable")

    def __len__(self) -> int:
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Schema) and self.fields == other.fields

    def __hash__(self) -> int:
        return hash(self.fields)

    def __repr__(self) -> str:
        inner = ", ".join(f"{f.name}: {f.type.value}" for f in self.fields)
        return f"Schema[{inner}]"

    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def has(self, name: str) -> bool:
        return name in self._index

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"no field named '{name}'") from None

    def type_of(self, name: str) -> ValueType:
        return self.fields[self.index_of(name)].type


def schema_of(*pairs: tuple[str, ValueType]) -> Schema:
    """Shorthand constructor used heavily in tests."""
    return Schema(Field(name, vtype) for name, vtype in pairs)


class Table:
    """An immutable schema plus an ordered sequence of row tuples.

    Construction validates every row against the schema; a ``Table``
    that exists is valid. Operations return new tables and never mutate
    their inputs.
    """

    __slots__ = ("schema", "rows")

    def __init__(self, schema: Schema, rows: Iterable[Sequence[Cell]]) -> None:
        arity = len(schema)
        checked: list[tuple[Cell, ...]] = []
        for r, row in enumerate(rows):
            row = tuple(row)
            if len(row) != arity:
                raise TableError(
                    f"row {r} has {len(row)} cells, schema expects {arity}"
                )
            for c, (cell, field) in enumerate(zip(row, schema.fields)):
                if not cell_matches(cell, field.type):
                    actual = value_type_of(cell)
                    actual_name = actual.value if actual else type(cell).__name__
                    raise TableError(
                        f"row {r}, column '{field.name}': expected "
                        f"{field.type.value}, got {actual_name}"
                    )
            checked.append(row)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "rows", tuple(checked))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Table is immutable")

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Table) and table_equal(self, other)

    def __repr__(self) -> str:
        return f"Table({self.schema!r}, {len(self.rows)} rows)"

    def column(self, name: str) -> tuple[Cell, ...]:
        i = self.schema.index_of(name)
        return tuple(row[i] for row in self.rows)


def make_table(schema: Schema, rows: Iterable[Sequence[Cell]]) -> Table:
    """Construct a validated table. Raises TableError on bad rows."""
    return Table(schema, rows)


def values_equal(left: Cell, right: Cell) -> bool:
    """Cell equality as used by table comparison and DISTINCT.

    Null equals null. INT and DECIMAL compare numerically and exactly;
    any other cross-type pair is unequal. Decimal equality ignores
    trailing zeros (2.50 == 2.5).
    """
    if left is None or right is None:
        return left is None and right is None
    lt = value_type_of(left)
    rt = value_type_of(right)
    if lt is rt:
        return left == right
    if lt in NUMERIC_TYPES and rt in NUMERIC_TYPES:
        return left == right
    return False


def compare_values(left: Cell, right: Cell) -> int:
    """Three-way comparison: -1, 0, or 1.

    Total within each type family: numeric order across INT/DECIMAL,
    code-point order for STRING, chronological for DATE and DATETIME,
    false < true for BOOL. Null sorts after every non-null value and
    equals null. Raises IncomparableError for any other cross-type pair.
    """
    if left is None or right is None:
        if left is None and right is None:
            return 0
        return 1 if left is None else -1
    lt = value_type_of(left)
    rt = value_type_of(right)
    comparable = lt is rt or (lt in NUMERIC_TYPES and rt in NUMERIC_TYPES)
    if not comparable:
        raise IncomparableError(
            f"cannot compare {lt.value if lt else type(left).__name__} "
            f"with {rt.value if rt else type(right).__name__}"
        )
    if left == right:
        return 0
    return -1 if left < right else 1


def table_equal(left: Table, right: Table) -> bool:
    """Exact table equality: same schema (names, types, order) and the
    same rows in the same order. Null equals null."""
    if left.schema != right.schema:
        return False
    if len(left.rows) != len(right.rows):
        return False
    for lrow, rrow in zip(left.rows, right.rows):
        for lcell, rcell in zip(lrow, rrow):
            if not values_equal(lcell, rcell):
                return False
    return True


# ---------------------------------------------------------------------------
# Decimal and integer arithmetic
# ---------------------------------------------------------------------------


def decimal_scale(value: Decimal) -> int:
    """Number of fractional digits (0 for integral-form decimals)."""
    exponent = value.as_tuple().exponent
    if not isinstance(exponent, int):  # NaN/Inf carry string exponents
        raise ConversionError("non-finite DECIMAL value")
    return max(0, -exponent)


def normalize_decimal(value: Decimal) -> Decimal:
    """Canonicalize to a non-positive exponent so 1E+3 becomes 1000."""
    if not value.is_finite():
        raise ConversionError("non-finite DECIMAL value")
    exponent = value.as_tuple().exponent
    if isinstance(exponent, int) and exponent > 0:
        return value.quantize(Decimal(1), context=_EXACT_CTX)
    return value


def parse_decimal(text: str, max_scale: int = MAX_DECIMAL_SCALE) -> Decimal:
    """Parse decimal text exactly; rejects exponents beyond the scale cap,
    non-finite values, and mantissas past the precision limit."""
    try:
        value = Decimal(text)
    except decimal.InvalidOperation:
        raise ConversionError(f"malformed DECIMAL value {text!r}") from None
    if not value.is_finite():
        raise ConversionError(f"non-finite DECIMAL value {text!r}")
    value = normalize_decimal(value)
    if decimal_scale(value) > max_scale:
        raise ConversionError(
            f"DECIMAL value {text!r} exceeds maximum scale of {max_scale}"
        )
    if len(value.as_tuple().digits) > DECIMAL_PRECISION:
        raise ConversionError(f"DECIMAL value {text!r} exceeds precision")
    return value


def _check_int64(value: int, op: str) -> int:
    if not INT64_MIN <= value <= INT64_MAX:
        raise ConversionError(f"INT overflow in {op}")
    return value


def _exact(op: str, fn, *args: Decimal) -> Decimal:
    try:
        return fn(*args)
    except decimal.Inexact:
        raise ConversionError(f"DECIMAL overflow in {op}") from None
    except decimal.Overflow:
        raise ConversionError(f"DECIMAL overflow in {op}") from None


def add_values(left: Cell, right: Cell) -> Cell:
    """Numeric addition with INT->DECIMAL promotion; null propagates."""
    if left is None or right is None:
        return None
    if isinstance(left, int) and isinstance(right, int):
        return _check_int64(left + right, "addition")
    return _exact("addition", _EXACT_CTX.add, _as_decimal(left), _as_decimal(right))


def subtract_values(left: Cell, right: Cell) -> Cell:
    if left is None or right is None:
        return None
    if isinstance(left, int) and isinstance(right, int):
        return _check_int64(left - right, "subtraction")
    return _exact(
        "subtraction", _EXACT_CTX.subtract, _as_decimal(left), _as_decimal(right)
    )


def multiply_values(left: Cell, right: Cell) -> Cell:
    if left is None or right is None:
        return None
    if isinstance(left, int) and isinstance(right, int):
        return _check_int64(left * right, "multiplication")
    return _exact(
        "multiplication", _EXACT_CTX.multiply, _as_decimal(left), _as_decimal(right)
    )


def divide_values(left: Cell, right: Cell) -> Cell:
    """INT / INT truncates toward zero; DECIMAL division rounds half-even
    to scale max(operand scales) + 4. Division by zero raises."""
    if left is None or right is None:
        return None
    if isinstance(left, int) and isinstance(right, int):
        if right == 0:
            raise DivisionByZero("division by zero")
        quotient = abs(left) // abs(right)
        if (left < 0) != (right < 0):
            quotient = -quotient
        return _check_int64(quotient, "division")
    lv = _as_decimal(left)
    rv = _as_decimal(right)
    if rv == 0:
        raise DivisionByZero("division by zero")
    scale = max(decimal_scale(lv), decimal_scale(rv)) + DIVISION_EXTRA_SCALE
    return decimal_divide(lv, rv, scale)


def decimal_divide(numerator: Decimal, denominator: Decimal, scale: int) -> Decimal:
    """Exact rational division rounded half-even to ``scale`` digits."""
    if denominator == 0:
        raise DivisionByZero("division by zero")
    exact = Fraction(numerator) / Fraction(denominator) * 10**scale
    mantissa = round(exact)  # Fraction.__round__ is half-even
    if len(str(abs(mantissa))) > DECIMAL_PRECISION:
        raise ConversionError("DECIMAL overflow in division")
    return Decimal(mantissa).scaleb(-scale, context=_EXACT_CTX)


def negate_value(value: Cell) -> Cell:
    if value is None:
        return None
    if isinstance(value, int):
        return _check_int64(-value, "negation")
    return _exact("negation", _EXACT_CTX.minus, value)


def _as_decimal(value: Cell) -> Decimal:
    if isinstance(value, Decimal):
        return value
    return Decimal(value)


# ---------------------------------------------------------------------------
# Date and datetime wire formats (ISO-8601, no timezones)
# ---------------------------------------------------------------------------

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_DATETIME_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}$")


def parse_date(text: str) -> datetime.date:
    if not _DATE_RE.match(text):
        raise ConversionError(f"malformed DATE value {text!r}, expected YYYY-MM-DD")
    try:
        return datetime.date.fromisoformat(text)
    except ValueError:
        raise ConversionError(f"invalid DATE value {text!r}") from None


def parse_datetime(text: str) -> datetime.datetime:
    if not _DATETIME_RE.match(text):
        raise ConversionError(
            f"malformed DATETIME value {text!r}, expected YYYY-MM-DDTHH:MM:SS"
        )
    try:
        return datetime.datetime.fromisoformat(text)
    except ValueError:
        raise ConversionError(f"invalid DATETIME value {text!r}") from None


def format_cell(value: Cell) -> str:
    """Canonical text form of a cell, as used by TO_STRING and CSV."""
    if value is None:
        raise ConversionError("cannot format null")
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime.datetime):
        return value.strftime("%Y-%m-%dT%H:%M:%S")
    if isinstance(value, datetime.date):
        return value.isoformat()
    if isinstance(value, Decimal):
        return format(value, "f")
    return str(value)
