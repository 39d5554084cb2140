"""Reading observation files and writing plan tables.

Input formats (one record per line, blank lines ignored):

* ``durations``  - one positive decimal per line
* ``timestamps`` - one non-decreasing decimal per line; consecutive
  differences become the durations, zero differences are rejected
* ``ndjson``     - one JSON object per line carrying either a ``duration``
  or a ``timestamp`` field (all lines the same)

Numbers are parsed as ``decimal.Decimal`` so unit conversion and timestamp
differencing are exact before the final cast to float.
"""

import contextlib
import csv
import enum
import json
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .estimators import ObservationBatch, ObservationKind
from .planner import CriterionKind

STDIN = "-"

TABLE_COLUMNS = ("epsilon", "delta", "criterion", "n", "coverage_lb", "status")


class InputError(Exception):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class ParseError(InputError):
    pass


class NonMonotoneTimestamps(InputError):
    pass


class NonPositiveDuration(InputError):
    pass


class EmptyInput(InputError):
    pass


class InputFormat(enum.Enum):
    DURATIONS_CSV = "durations"
    TIMESTAMPS_CSV = "timestamps"
    NDJSON = "ndjson"


class Unit(enum.Enum):
    SECONDS = "s"
    MILLISECONDS = "ms"
    MICROSECONDS = "us"

    @property
    def scale(self):
        return {"s": Decimal(1), "ms": Decimal("1e-3"), "us": Decimal("1e-6")}[self.value]


class TableFormat(enum.Enum):
    CSV = "csv"
    NDJSON = "ndjson"


@dataclass(frozen=True)
class InputSpec:
    path: str
    format: InputFormat = InputFormat.DURATIONS_CSV
    unit: Unit = Unit.SECONDS

    def __post_init__(self):
        object.__setattr__(self, "path", str(self.path))
        object.__setattr__(self, "format", InputFormat(self.format))
        object.__setattr__(self, "unit", Unit(self.unit))


def _parse_decimal(text, line):
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise ParseError(f"not a decimal number: {text.strip()!r}", line) from None
    if not value.is_finite():
        raise ParseError(f"not a finite number: {text.strip()!r}", line)
    return value


def _records(lines, fmt):
    """Yield (line number, field kind, Decimal) for each non-blank line."""
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        if fmt is InputFormat.NDJSON:
            try:
                obj = json.loads(raw, parse_float=Decimal, parse_int=Decimal)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", lineno)
            keys = [k for k in ("duration", "timestamp") if k in obj]
            if len(keys) != 1:
                raise ParseError("object needs exactly one of 'duration' or 'timestamp'", lineno)
            value = obj[keys[0]]
            if not isinstance(value, Decimal):
                raise ParseError(f"{keys[0]} must be a number, got {value!r}", lineno)
            yield lineno, keys[0], value
        else:
            kind = "timestamp" if fmt is InputFormat.TIMESTAMPS_CSV else "duration"
            yield lineno, kind, _parse_decimal(raw, lineno)


def parse_durations(lines, fmt=InputFormat.DURATIONS_CSV, unit=Unit.SECONDS):
    """Durations in seconds from an iterable of text lines."""
    fmt = InputFormat(fmt)
    scale = Unit(unit).scale
    durations = []
    field_kind = None
    previous = None
    for lineno, kind, value in _records(lines, fmt):
        if field_kind is None:
            field_kind = kind
        elif kind != field_kind:
            raise ParseError(f"mixed 'duration' and 'timestamp' records (expected {field_kind})",
                             lineno)
        if kind == "duration":
            if value <= 0:
                raise NonPositiveDuration(f"duration must be positive, got {value}", lineno)
            durations.append(float(value * scale))
        else:
            if previous is not None:
                diff = value - previous
                if diff < 0:
                    raise NonMonotoneTimestamps(
                        f"timestamp {value} is earlier than the previous {previous}", lineno)
                if diff == 0:
                    raise NonPositiveDuration(
                        f"zero interarrival time (timestamp {value} repeated)", lineno)
                durations.append(float(diff * scale))
            previous = value
    if not durations:
        raise EmptyInput("no durations found" if field_kind != "timestamp"
                         else "need at least two timestamps")
    return durations


@contextlib.contextmanager
def _open_text(path, mode):
    if path == STDIN:
        yield sys.stdin if "r" in mode else sys.stdout
    else:
        with open(path, mode, encoding="utf-8", newline="") as fh:
            yield fh


def load_batch(spec, kind):
    kind = ObservationKind(kind)
    try:
        with _open_text(spec.path, "r") as fh:
            durations = parse_durations(fh, spec.format, spec.unit)
    except OSError as exc:
        raise InputError(f"cannot read {spec.path}: {exc.strerror or exc}") from exc
    source = "stdin" if spec.path == STDIN else spec.path
    return ObservationBatch(durations, kind, source=source)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def table_record(row):
    """Ordered mapping for a planner CurveRow or SampleSizePlan."""
    if hasattr(row, "plan"):
        epsilon, delta, criterion = row.epsilon, row.delta, row.criterion
        n, cov = row.n, row.coverage_lb
        status = "budget_exceeded" if row.budget_exceeded else "ok"
    else:
        epsilon, delta = row.precision.epsilon, row.precision.delta
        criterion, n, cov, status = row.criterion, row.n, row.coverage_lb_at_n, "ok"
    return {
        "epsilon": epsilon,
        "delta": delta,
        "criterion": criterion.value,
        "n": n,
        "coverage_lb": cov,
        "status": status,
    }


def write_table(rows, fh, fmt=TableFormat.CSV):
    fmt = TableFormat(fmt)
    records = [table_record(r) for r in rows]
    if fmt is TableFormat.CSV:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for rec in records:
            writer.writerow([_fmt(rec[c]) for c in TABLE_COLUMNS])
    else:
        for rec in records:
            out = {c: (float(_fmt(rec[c])) if isinstance(rec[c], float) else rec[c])
                   for c in TABLE_COLUMNS}
            fh.write(json.dumps(out) + "\n")


def emit_table(rows, fmt=TableFormat.CSV, destination=STDIN):
    """Write plan rows to a path (or stdout for ``-``); 12 significant digits."""
    rows = list(rows)
    try:
        with _open_text(str(destination), "w") as fh:
            write_table(rows, fh, fmt)
    except OSError as exc:
        raise OSError(f"cannot write table to {destination}: {exc.strerror or exc}") from exc


def read_table(source, fmt=TableFormat.CSV):
    """Parse a table written by emit_table back into plain dicts."""
    fmt = TableFormat(fmt)
    text = Path(source).read_text(encoding="utf-8") if not hasattr(source, "read") else source.read()
    lines = text.splitlines()
    if fmt is TableFormat.CSV:
        reader = csv.DictReader(lines)
        if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
            raise ParseError(f"unexpected header {reader.fieldnames}", 1)
        raw = list(reader)
    else:
        raw = [json.loads(line) for line in lines if line.strip()]
    rows = []
    for rec in raw:
        n = rec["n"]
        cov = rec["coverage_lb"]
        rows.append({
            "epsilon": float(rec["epsilon"]),
            "delta": float(rec["delta"]),
            "criterion": CriterionKind(rec["criterion"]),
            "n": int(n) if n not in ("", None) else None,
            "coverage_lb": float(cov) if cov not in ("", None) else None,
            "status": rec["status"],
        })
    return rows
