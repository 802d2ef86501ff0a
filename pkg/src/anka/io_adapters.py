"""Table serialization (JSON, CSV) and HTTP transfer behind a
swappable adapter.

The adapter holds low-level file and HTTP capability handles plus a
sandbox flag. Sandboxed adapters (the default) deny every operation
deterministically before touching any handle, which makes benchmark
runs hermetic.
"""

from __future__ import annotations

import csv
import io
import json
import re
import urllib.error
import urllib.request
from decimal import Decimal
from typing import Optional

from anka.errors import ConversionError, HttpError, IoError
from anka.values import (
    MAX_DECIMAL_SCALE,
    Cell,
    Schema,
    Table,
    ValueType,
    decimal_scale,
    format_cell,
    normalize_decimal,
    parse_date,
    parse_datetime,
    parse_decimal,
)

DEFAULT_HTTP_TIMEOUT = 10.0

_INT_RE = re.compile(r"^[+-]?\d+$")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def table_to_json(table: Table) -> bytes:
    """Encode as a JSON array of objects, fields in schema order.
    DECIMAL cells become strings so no precision is lost in transit."""
    rows = []
    for row in table.rows:
        obj = {}
        for field, cell in zip(table.schema.fields, row):
            obj[field.name] = _json_cell(cell)
        rows.append(obj)
    return (json.dumps(rows, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _json_cell(cell: Cell):
    if cell is None:
        return None
    if isinstance(cell, bool) or isinstance(cell, int):
        return cell
    if isinstance(cell, Decimal):
        return format(cell, "f")
    if isinstance(cell, str):
        return cell
    return format_cell(cell)


def _reject_constant(text: str):
    raise ConversionError(f"non-finite number {text!r} in JSON input")


def table_from_json(data: bytes, schema: Schema) -> Table:
    """Decode a JSON array of objects against a declared schema.

    Missing keys become null; unknown keys are ignored. Numbers are
    decoded exactly (never through binary floats); DECIMAL accepts both
    numbers and strings.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConversionError(f"JSON input is not valid UTF-8: {exc}") from None
    try:
        parsed = json.loads(
            text,
            parse_float=Decimal,
            parse_int=int,
            parse_constant=_reject_constant,
        )
    except json.JSONDecodeError as exc:
        raise ConversionError(f"malformed JSON: {exc}") from None
    if not isinstance(parsed, list):
        raise ConversionError("JSON input must be an array of objects")
    return json_rows_to_table(parsed, schema)


def json_rows_to_table(items: list, schema: Schema) -> Table:
    """Build a table from already-decoded JSON row objects. Numbers must
    have been decoded with parse_float=Decimal to stay exact."""
    rows = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ConversionError(f"row {i}: expected a JSON object")
        row = []
        for field in schema.fields:
            value = item.get(field.name)
            try:
                row.append(_json_to_cell(value, field.type))
            except ConversionError as exc:
                raise ConversionError(
                    f"row {i}, field '{field.name}': {exc.message}"
                ) from None
        rows.append(tuple(row))
    return Table(schema, rows)


def _json_to_cell(value, vtype: ValueType) -> Cell:
    if value is None:
        return None
    if vtype is ValueType.INT:
        if isinstance(value, bool):
            raise ConversionError("expected INT, got boolean")
        if isinstance(value, int):
            return _check_int(value)
        if isinstance(value, Decimal):
            if value == value.to_integral_value():
                return _check_int(int(value))
            raise ConversionError(f"expected INT, got non-integral number {value}")
        raise ConversionError(f"expected INT, got {_json_type_name(value)}")
    if vtype is ValueType.DECIMAL:
        if isinstance(value, bool):
            raise ConversionError("expected DECIMAL, got boolean")
        if isinstance(value, Decimal):
            return _check_decimal(value)
        if isinstance(value, int):
            return Decimal(value)
        if isinstance(value, str):
            return parse_decimal(value)
        raise ConversionError(f"expected DECIMAL, got {_json_type_name(value)}")
    if vtype is ValueType.BOOL:
        if isinstance(value, bool):
            return value
        raise ConversionError(f"expected BOOL, got {_json_type_name(value)}")
    if vtype is ValueType.STRING:
        if isinstance(value, str):
            return value
        raise ConversionError(f"expected STRING, got {_json_type_name(value)}")
    if vtype is ValueType.DATE:
        if isinstance(value, str):
            return parse_date(value)
        raise ConversionError(f"expected DATE string, got {_json_type_name(value)}")
    if vtype is ValueType.DATETIME:
        if isinstance(value, str):
            return parse_datetime(value)
        raise ConversionError(
            f"expected DATETIME string, got {_json_type_name(value)}"
        )
    raise AssertionError(f"unhandled type {vtype}")


def _check_int(value: int) -> int:
    if not -(2**63) <= value <= 2**63 - 1:
        raise ConversionError(f"INT value {value} out of 64-bit range")
    return value


def _check_decimal(value: Decimal) -> Decimal:
    value = normalize_decimal(value)
    if decimal_scale(value) > MAX_DECIMAL_SCALE:
        raise ConversionError(
            f"DECIMAL value {value} exceeds maximum scale of {MAX_DECIMAL_SCALE}"
        )
    return value


def _json_type_name(value) -> str:
    return {
        bool: "boolean",
        int: "number",
        Decimal: "number",
        str: "string",
        list: "array",
        dict: "object",
    }.get(type(value), type(value).__name__)


# ---------------------------------------------------------------------------
# CSV (RFC 4180: comma delimiter, double-quote quoting, header row)
# ---------------------------------------------------------------------------


def table_to_csv(table: Table) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(table.schema.names())
    for row in table.rows:
        writer.writerow(["" if cell is None else format_cell(cell) for cell in row])
    return buf.getvalue().encode("utf-8")


def table_from_csv(data: bytes, schema: Schema) -> Table:
    """Decode CSV with a header row matching the schema names in order.
    An empty field reads as null for non-STRING columns and as the empty
    string for STRING columns; errors carry 1-based line numbers."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConversionError(f"CSV input is not valid UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ConversionError("CSV input is empty, expected a header row") from None
    expected = list(schema.names())
    if header != expected:
        raise ConversionError(
            f"line 1: header mismatch: expected {expected}, got {header}"
        )
    rows = []
    for record in reader:
        line = reader.line_num
        if record == []:
            # A blank line. For single-column tables this is how a null
            # cell serializes, so it is a real row; otherwise skip it.
            if len(schema) == 1:
                record = [""]
            else:
                continue
        if len(record) != len(schema):
            raise ConversionError(
                f"line {line}: expected {len(schema)} fields, got {len(record)}"
            )
        row = []
        for field, raw in zip(schema.fields, record):
            try:
                row.append(_csv_to_cell(raw, field.type))
            except ConversionError as exc:
                raise ConversionError(
                    f"line {line}, field '{field.name}': {exc.message}"
                ) from None
        rows.append(tuple(row))
    return Table(schema, rows)


def _csv_to_cell(raw: str, vtype: ValueType) -> Cell:
    if raw == "":
        return "" if vtype is ValueType.STRING else None
    if vtype is ValueType.STRING:
        return raw
    if vtype is ValueType.INT:
        if not _INT_RE.match(raw):
            raise ConversionError(f"cannot parse {raw!r} as INT")
        return _check_int(int(raw))
    if vtype is ValueType.DECIMAL:
        return parse_decimal(raw)
    if vtype is ValueType.BOOL:
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise ConversionError(f"cannot parse {raw!r} as BOOL, expected true/false")
    if vtype is ValueType.DATE:
        return parse_date(raw)
    if vtype is ValueType.DATETIME:
        return parse_datetime(raw)
    raise AssertionError(f"unhandled type {vtype}")


# ---------------------------------------------------------------------------
# Capability handles
# ---------------------------------------------------------------------------


class FileOps:
    """Real filesystem access."""

    def read_bytes(self, path: str) -> bytes:
        with open(path, "rb") as fh:
            return fh.read()

    def write_bytes(self, path: str, data: bytes) -> None:
        with open(path, "wb") as fh:
            fh.write(data)


class HttpOps:
    """Real HTTP access via urllib."""

    def get(self, url: str, timeout: float) -> tuple[int, bytes]:
        request = urllib.request.Request(url, method="GET")
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.status, response.read()

    def post(self, url: str, body: bytes, timeout: float) -> tuple[int, bytes]:
        request = urllib.request.Request(
            url,
            data=body,
            method="POST",
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.status, response.read()


class IoAdapter:
    """READ/WRITE/FETCH/POST capabilities with a deny-all sandbox flag.

    ``sandbox=True`` (the default) raises IoError/HttpError for every
    operation before any handle is touched.
    """

    def __init__(
        self,
        *,
        sandbox: bool = True,
        file_ops: Optional[FileOps] = None,
        http_ops: Optional[HttpOps] = None,
        timeout: float = DEFAULT_HTTP_TIMEOUT,
    ) -> None:
        self.sandbox = sandbox
        self.file_ops = file_ops if file_ops is not None else FileOps()
        self.http_ops = http_ops if http_ops is not None else HttpOps()
        self.timeout = timeout

    def read_table(self, path: str, fmt: str, schema: Schema) -> Table:
        if self.sandbox:
            raise IoError(f"sandboxed: cannot read {path!r}")
        try:
            data = self.file_ops.read_bytes(path)
        except OSError as exc:
            raise IoError(f"cannot read {path!r}: {exc}") from None
        return _decode_table(data, fmt, schema)

    def write_table(self, table: Table, path: str, fmt: str) -> None:
        if self.sandbox:
            raise IoError(f"sandboxed: cannot write {path!r}")
        data = encode_table(table, fmt)
        try:
            self.file_ops.write_bytes(path, data)
        except OSError as exc:
            raise IoError(f"cannot write {path!r}: {exc}") from None

    def fetch_table(self, url: str, schema: Schema) -> Table:
        if self.sandbox:
            raise HttpError(f"sandboxed: cannot fetch {url!r}")
        status, body = self._request("GET", url, None)
        if not 200 <= status < 300:
            raise HttpError(f"GET {url!r} returned status {status}", status=status)
        return table_from_json(body, schema)

    def post_table(self, url: str, table: Table) -> int:
        if self.sandbox:
            raise HttpError(f"sandboxed: cannot post to {url!r}")
        status, _ = self._request("POST", url, table_to_json(table))
        if not 200 <= status < 300:
            raise HttpError(f"POST {url!r} returned status {status}", status=status)
        return status

    def _request(self, method: str, url: str, body: Optional[bytes]) -> tuple[int, bytes]:
        if not url.startswith(("http://", "https://")):
            raise HttpError(f"unsupported URL {url!r}, expected http or https")
        try:
            if method == "GET":
                return self.http_ops.get(url, self.timeout)
            return self.http_ops.post(url, body or b"", self.timeout)
        except urllib.error.HTTPError as exc:
            return exc.code, exc.read() if exc.fp else b""
        except urllib.error.URLError as exc:
            raise HttpError(f"{method} {url!r} failed: {exc.reason}") from None
        except TimeoutError:
            raise HttpError(f"{method} {url!r} timed out") from None


def encode_table(table: Table, fmt: str) -> bytes:
    if fmt == "json":
        return table_to_json(table)
    if fmt == "csv":
        return table_to_csv(table)
    raise ValueError(f"unknown table format {fmt!r}")


def _decode_table(data: bytes, fmt: str, schema: Schema) -> Table:
    if fmt == "json":
        return table_from_json(data, schema)
    if fmt == "csv":
        return table_from_csv(data, schema)
    raise ValueError(f"unknown table format {fmt!r}")
