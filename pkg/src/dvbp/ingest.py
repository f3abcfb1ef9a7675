"""Instance file formats and VM-trace ingestion.

Canonical text format: line 1 ``d n``, line 2 the d capacity integers, then n
lines ``a_1 ... a_d start end``.  Ids are positional (0-based).  The JSON
variant is an object with ``capacity`` and ``requests`` arrays (each request
``[a_1, ..., a_d, start, end]``) plus an optional ``ids`` array that is only
written when ids differ from 0..n-1 (e.g. reduced instances keep their
original ids).  Both formats round-trip bit-exactly.

Trace ingestion is schema-driven: a :class:`TraceSchema` names the CSV
columns, per-dimension fixed-point scale factors (demands are scaled and
rounded up, so a packing feasible on the integers is feasible on the raw
fractional values), and optional flavor rules that override the scale for
matching rows.  Presets for two public VM datasets ship as JSON files under
``dvbp/schemas``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from importlib import resources
from io import StringIO
from pathlib import Path
from typing import IO, Iterable, Sequence

from .model import Instance, Request, validate_instance

PRESETS = ("huawei", "azure")


class ParseError(ValueError):
    """Malformed canonical instance file (message carries the line number)."""


class IngestError(ValueError):
    """Trace ingestion failed (too many bad rows, or schema problems)."""


def _read_text(source: str | Path | IO[str]) -> str:
    if hasattr(source, "read"):
        return source.read()  # type: ignore[union-attr]
    return Path(source).read_text()


def load_canonical(source: str | Path | IO[str]) -> Instance:
    """Parse an instance from the canonical text or JSON format.

    Validation failures propagate; parse errors carry line numbers.
    """
    text = _read_text(source)
    if text.lstrip()[:1] == "{":
        return _load_json(text)
    return _load_text(text)


def _load_text(text: str) -> Instance:
    lines = text.splitlines()

    def ints(line_no: int, expected: int | None = None) -> list[int]:
        if line_no > len(lines):
            raise ParseError(f"line {line_no}: unexpected end of file")
        tokens = lines[line_no - 1].split()
        try:
            values = [int(t) for t in tokens]
        except ValueError:
            raise ParseError(f"line {line_no}: non-integer token") from None
        if expected is not None and len(values) != expected:
            raise ParseError(
                f"line {line_no}: expected {expected} integers, got {len(values)}"
            )
        return values

    header = ints(1)
    if len(header) != 2:
        raise ParseError("line 1: expected 'd n' header")
    d, n = header
    if d < 1 or n < 0:
        raise ParseError("line 1: need d >= 1 and n >= 0")
    capacity = ints(2, d)
    rows = []
    for i in range(n):
        vals = ints(3 + i, d + 2)
        rows.append((tuple(vals[:d]), vals[d], vals[d + 1]))
    extra = [ln for ln in lines[2 + n :] if ln.strip()]
    if extra:
        raise ParseError(f"line {3 + n}: trailing content after {n} requests")
    return validate_instance(capacity, rows)


def _load_json(text: str) -> Instance:
    obj = json.loads(text)
    capacity = obj["capacity"]
    reqs = obj["requests"]
    ids = obj.get("ids")
    if ids is not None and len(ids) != len(reqs):
        raise ParseError("'ids' length differs from 'requests' length")
    d = len(capacity)

    def as_int(x, where: str) -> int:
        if isinstance(x, bool) or not isinstance(x, int):
            raise ParseError(f"{where}: expected integer, got {x!r}")
        return x

    rows = []
    for i, row in enumerate(reqs):
        if len(row) != d + 2:
            raise ParseError(f"request {i}: expected {d + 2} integers, got {len(row)}")
        vals = [as_int(x, f"request {i}") for x in row]
        rid = as_int(ids[i], f"ids[{i}]") if ids is not None else i
        rows.append(Request(rid, tuple(vals[:d]), vals[d], vals[d + 1]))
    return validate_instance([as_int(c, "capacity") for c in capacity], rows)


def save_canonical_text(instance: Instance) -> str:
    buf = StringIO()
    buf.write(f"{instance.d} {instance.n}\n")
    buf.write(" ".join(str(c) for c in instance.capacity) + "\n")
    for r in instance.requests:
        buf.write(" ".join(str(a) for a in r.demand) + f" {r.start} {r.end}\n")
    return buf.getvalue()


def save_canonical_json(instance: Instance) -> str:
    obj: dict = {
        "capacity": list(instance.capacity),
        "requests": [list(r.demand) + [r.start, r.end] for r in instance.requests],
    }
    ids = [r.id for r in instance.requests]
    if ids != list(range(instance.n)):
        obj["ids"] = ids
    return json.dumps(obj, separators=(",", ":")) + "\n"


def save_canonical(instance: Instance, fmt: str = "text") -> str:
    if fmt == "text":
        return save_canonical_text(instance)
    if fmt == "json":
        return save_canonical_json(instance)
    raise ValueError("fmt must be 'text' or 'json'")


@dataclass(frozen=True)
class FlavorRule:
    """Per-dimension scale override for rows matching a flavor name or a raw
    demand tuple (exact rational comparison)."""

    scale: tuple[Fraction, ...]
    names: frozenset[str] = frozenset()
    demands: frozenset[tuple[Fraction, ...]] = frozenset()

    def matches(self, name: str | None, raw: tuple[Fraction, ...]) -> bool:
        if name is not None and name in self.names:
            return True
        return raw in self.demands


@dataclass(frozen=True)
class TraceSchema:
    """How to read one CSV trace into an exact-integer instance.

    Demands become ``ceil(raw * scale_j)``; scale factors are exact rationals
    (>= 1).  Times are parsed exactly, divided by ``time_divisor``, and used
    directly when integral; otherwise the whole time axis is densely ranked
    to 1..m, which preserves order exactly.
    """

    capacity: tuple[int, ...]
    resource_columns: tuple[str, ...]
    start_column: str
    end_column: str
    scale: tuple[Fraction, ...]
    flavor_column: str | None = None
    rules: tuple[FlavorRule, ...] = ()
    delimiter: str = ","
    has_header: bool = True
    time_divisor: Fraction = Fraction(1)
    drop_nonpositive_duration: bool = True
    missing_end: str = "error"  # or "drop"
    max_errors: int = 100

    @property
    def d(self) -> int:
        return len(self.capacity)

    @classmethod
    def from_json(cls, text: str) -> "TraceSchema":
        obj = json.loads(text)
        rules = tuple(
            FlavorRule(
                scale=tuple(Fraction(str(s)) for s in r["scale"]),
                names=frozenset(r.get("names", ())),
                demands=frozenset(
                    tuple(Fraction(str(x)) for x in dem) for dem in r.get("demands", ())
                ),
            )
            for r in obj.get("rules", ())
        )
        return cls(
            capacity=tuple(int(c) for c in obj["capacity"]),
            resource_columns=tuple(obj["resource_columns"]),
            start_column=obj["start_column"],
            end_column=obj["end_column"],
            scale=tuple(Fraction(str(s)) for s in obj["scale"]),
            flavor_column=obj.get("flavor_column"),
            rules=rules,
            delimiter=obj.get("delimiter", ","),
            has_header=obj.get("has_header", True),
            time_divisor=Fraction(str(obj.get("time_divisor", 1))),
            drop_nonpositive_duration=obj.get("drop_nonpositive_duration", True),
            missing_end=obj.get("missing_end", "error"),
            max_errors=int(obj.get("max_errors", 100)),
        )


def load_schema(name_or_path: str | Path) -> TraceSchema:
    """Load a schema: a preset name ('huawei', 'azure') or a JSON file path."""
    name = str(name_or_path)
    if name in PRESETS:
        text = resources.files("dvbp.schemas").joinpath(f"{name}.json").read_text()
        return TraceSchema.from_json(text)
    return TraceSchema.from_json(Path(name_or_path).read_text())


@dataclass
class IngestReport:
    rows: int = 0
    dropped_nonpositive: int = 0
    dropped_missing_end: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)


_MISSING = ("", "null", "NULL", "None", "NaN", "nan")


def _exact(token: str) -> Fraction:
    try:
        return Fraction(Decimal(token.strip()))
    except (InvalidOperation, ValueError):
        raise ValueError(f"not a number: {token!r}") from None


def _scaled_ceil(raw: Fraction, scale: Fraction) -> int:
    return math.ceil(raw * scale)


def ingest_trace(
    source: str | Path | IO[str] | Iterable[str], schema: TraceSchema
) -> tuple[Instance, IngestReport]:
    """Stream one CSV trace into a validated instance.

    Row-level parse failures are collected in the report (aborting via
    :class:`IngestError` past ``schema.max_errors``); rows with end <= start
    are dropped and counted when the schema says so.  Demand scaling rounds
    up, so it never understates a demand.  Time order is preserved strictly.
    """
    close_me = None
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        close_me = open(source, newline="")
        lines: Iterable[str] = close_me
    elif isinstance(source, str):
        lines = StringIO(source)
    else:
        lines = source
    reader = csv.reader(lines, delimiter=schema.delimiter)

    report = IngestReport()
    d = schema.d
    raw_rows: list[tuple[tuple[int, ...], Fraction, Fraction]] = []
    try:
        col: dict[str, int] = {}
        needed = list(schema.resource_columns) + [schema.start_column, schema.end_column]
        if schema.flavor_column:
            needed.append(schema.flavor_column)
        if schema.has_header:
            try:
                header = next(reader)
            except StopIteration:
                raise IngestError("empty trace: no header row") from None
            col = {name.strip(): i for i, name in enumerate(header)}
            missing_cols = [c for c in needed if c not in col]
            if missing_cols:
                raise IngestError(f"missing columns in header: {missing_cols}")
        else:
            col = {c: int(c) for c in needed}

        line_no = 1 if schema.has_header else 0
        for row in reader:
            line_no += 1
            if not row or all(not f.strip() for f in row):
                continue
            report.rows += 1
            try:
                end_tok = row[col[schema.end_column]].strip()
                if end_tok in _MISSING:
                    if schema.missing_end == "drop":
                        report.dropped_missing_end += 1
                        continue
                    raise ValueError("missing end time")
                raw_demand = tuple(_exact(row[col[c]]) for c in schema.resource_columns)
                start = _exact(row[col[schema.start_column]]) / schema.time_divisor
                end = _exact(end_tok) / schema.time_divisor
                name = (
                    row[col[schema.flavor_column]].strip()
                    if schema.flavor_column
                    else None
                )
                scale = schema.scale
                for rule in schema.rules:
                    if rule.matches(name, raw_demand):
                        scale = rule.scale
                        break
                demand = tuple(_scaled_ceil(a, s) for a, s in zip(raw_demand, scale))
                if len(demand) != d:
                    raise ValueError(f"expected {d} resources, got {len(demand)}")
                if end <= start:
                    if schema.drop_nonpositive_duration:
                        report.dropped_nonpositive += 1
                        continue
                    raise ValueError(f"end {end} not after start {start}")
                raw_rows.append((demand, start, end))
            except (ValueError, IndexError) as exc:
                report.errors.append((line_no, str(exc)))
                if len(report.errors) > schema.max_errors:
                    raise IngestError(
                        f"aborting after {len(report.errors)} bad rows; "
                        f"first: line {report.errors[0][0]}: {report.errors[0][1]}"
                    ) from None
    finally:
        if close_me is not None:
            close_me.close()

    times = _integral_times(
        [s for _, s, _ in raw_rows], [e for _, _, e in raw_rows]
    )
    requests = [
        Request(i, dem, times[0][i], times[1][i]) for i, (dem, _, _) in enumerate(raw_rows)
    ]
    instance = validate_instance(schema.capacity, requests)
    return instance, report


def _integral_times(
    starts: Sequence[Fraction], ends: Sequence[Fraction]
) -> tuple[list[int], list[int]]:
    """Exact times to ints: direct when integral, dense rank otherwise."""
    if all(v.denominator == 1 for v in starts) and all(v.denominator == 1 for v in ends):
        return [int(v) for v in starts], [int(v) for v in ends]
    distinct = sorted(set(starts) | set(ends))
    rank = {v: i + 1 for i, v in enumerate(distinct)}
    return [rank[v] for v in starts], [rank[v] for v in ends]
