"""The dataset CSV: one row per (system, release, service).

Map- and set-valued metrics are stored as compact JSON with sorted keys;
decimals carry four fractional digits (round-half-even). Derived decimals
are recomputed from the integer columns on read, after checking that the
stored cell agrees with them, so a read returns exactly what was written.
The per-release denominator of the ``*Per`` columns is the number of
business-role rows of that release (at least 1).
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Iterable

from .discovery import InfraRole
from .metrics import MicroserviceRecord, check_record, share

HEADER = (
    "system", "release", "service", "infra_role", "codeSize", "entityNum", "entityAttributeNum",
    "aveEntityAttribute", "controllerNum", "interfaceNum", "abstractClassNum", "serviceClassNum",
    "dtoClassNum", "APINum", "maxParamNum", "APIVersionSet", "APIVersionNum", "serviceImplCall",
    "serviceImplCallNum", "serviceCall", "serviceCalled", "maxServiceCall", "serviceCallGate",
    "serviceCallPer", "maxServiceCalled", "serviceCalledGate", "serviceCalledPer",
)
_IDENTITY = {"system": "system", "release": "release_id", "service": "service_name"}
_INT_COLUMNS = ("codeSize", "entityNum", "entityAttributeNum", "controllerNum", "interfaceNum",
                "abstractClassNum", "serviceClassNum", "dtoClassNum", "APINum", "maxParamNum",
                "APIVersionNum", "serviceImplCallNum", "maxServiceCall", "serviceCallGate",
                "maxServiceCalled", "serviceCalledGate")
_MAP_COLUMNS = ("serviceImplCall", "serviceCall", "serviceCalled")
_DECIMAL_COLUMNS = ("aveEntityAttribute", "serviceCallPer", "serviceCalledPer")
_QUANTUM = Decimal("0.0001")
# a stored decimal may differ from the exact value by half a quantum
_DECIMAL_SLACK = 0.00005 + 1e-12


class DatasetError(ValueError):
    pass


def format_decimal(value: float) -> str:
    return str(Decimal(repr(float(value))).quantize(_QUANTUM, rounding=ROUND_HALF_EVEN))


def _json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _cells(r: MicroserviceRecord) -> list[str]:
    row = []
    for col in HEADER:
        if col in _IDENTITY:
            row.append(getattr(r, _IDENTITY[col]))
        elif col == "infra_role":
            row.append(InfraRole(r.infra_role).value)
        elif col == "APIVersionSet":
            row.append(_json(sorted(r.APIVersionSet)))
        elif col in _MAP_COLUMNS:
            row.append(_json(dict(getattr(r, col))))
        elif col in _DECIMAL_COLUMNS:
            row.append(format_decimal(getattr(r, col)))
        else:
            row.append(str(int(getattr(r, col))))
    return row


def sort_records(records: Iterable[MicroserviceRecord]) -> list[MicroserviceRecord]:
    """Order by system, release (commit time when known, else first appearance), service."""
    records = list(records)
    first_seen: dict[tuple[str, str], int] = {}
    stamps: dict[tuple[str, str], object] = {}
    for r in records:
        key = (r.system, r.release_id)
        first_seen.setdefault(key, len(first_seen))
        stamps.setdefault(key, r.release_timestamp)
    timed_systems = {s for s in {k[0] for k in first_seen}
                     if all(stamps[k] is not None for k in first_seen if k[0] == s)}

    def release_rank(key):
        if key[0] in timed_systems:
            return (0, stamps[key].timestamp(), first_seen[key])
        return (1, 0.0, first_seen[key])

    return sorted(records, key=lambda r: (r.system, release_rank((r.system, r.release_id)), r.service_name))


def _check_unique(records: Iterable[MicroserviceRecord]) -> None:
    counts = Counter(r.key for r in records)
    dupes = [k for k, n in counts.items() if n > 1]
    if dupes:
        raise DatasetError(f"duplicate (system, release, service): {dupes[:5]}")


def release_totals(records: Iterable[MicroserviceRecord]) -> dict[tuple[str, str], int]:
    """Business-service count per (system, release), floored at 1."""
    totals: Counter = Counter()
    keys = set()
    for r in records:
        keys.add((r.system, r.release_id))
        if InfraRole(r.infra_role) is InfraRole.BUSINESS:
            totals[(r.system, r.release_id)] += 1
    return {k: max(1, totals[k]) for k in keys}


def render_dataset(records: Iterable[MicroserviceRecord]) -> str:
    records = list(records)
    _check_unique(records)
    totals = release_totals(records)
    for r in records:
        problems = check_record(r, totals[(r.system, r.release_id)])
        if problems:
            raise DatasetError(f"invalid record {r.key}: {'; '.join(problems)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in sort_records(records):
        writer.writerow(_cells(r))
    return buf.getvalue()


def write_dataset(records: Iterable[MicroserviceRecord], path) -> None:
    text = render_dataset(records)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise DatasetError(f"cannot write {path}: {exc}") from exc


def write_jsonl(records: Iterable[MicroserviceRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for r in sort_records(records):
            obj = dict(zip(HEADER, _cells(r)))
            for col in _MAP_COLUMNS + ("APIVersionSet",):
                obj[col] = json.loads(obj[col])
            for col in _INT_COLUMNS:
                obj[col] = int(obj[col])
            for col in _DECIMAL_COLUMNS:
                obj[col] = float(obj[col])
            fh.write(_json(obj) + "\n")


def _parse_row(row: dict[str, str], lineno: int) -> MicroserviceRecord:
    def fail(msg):
        raise DatasetError(f"row {lineno}: {msg}")

    kwargs = {_IDENTITY[c]: row[c] for c in _IDENTITY}
    if not all(kwargs.values()):
        fail("empty system/release/service")
    try:
        kwargs["infra_role"] = InfraRole(row["infra_role"])
    except ValueError:
        fail(f"unknown infra_role {row['infra_role']!r}")
    for col in _INT_COLUMNS:
        try:
            kwargs[col] = int(row[col])
        except ValueError:
            fail(f"{col} is not an integer: {row[col]!r}")
    for col in _DECIMAL_COLUMNS:
        try:
            kwargs[col] = float(row[col])
        except ValueError:
            fail(f"{col} is not a decimal: {row[col]!r}")
    try:
        versions = json.loads(row["APIVersionSet"])
    except json.JSONDecodeError as exc:
        fail(f"malformed JSON in APIVersionSet: {exc}")
    if not isinstance(versions, list) or not all(isinstance(v, str) for v in versions):
        fail("APIVersionSet must be a JSON array of strings")
    if len(set(versions)) != len(versions):
        fail("APIVersionSet has repeated entries")
    kwargs["APIVersionSet"] = frozenset(versions)
    for col in _MAP_COLUMNS:
        try:
            value = json.loads(row[col])
        except json.JSONDecodeError as exc:
            fail(f"malformed JSON in {col}: {exc}")
        if not isinstance(value, dict) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in value.values()):
            fail(f"{col} must be a JSON object of integers")
        kwargs[col] = value
    return MicroserviceRecord(**kwargs)


def parse_dataset(text: str, source: str = "<dataset>") -> list[MicroserviceRecord]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError(f"{source}: empty file") from None
    if tuple(header) != HEADER:
        extra = [c for c in header if c not in HEADER]
        missing = [c for c in HEADER if c not in header]
        detail = []
        if extra:
            detail.append(f"unknown column(s) {extra}")
        if missing:
            detail.append(f"missing column(s) {missing}")
        if not detail:
            detail.append("columns out of order")
        raise DatasetError(f"{source}: header mismatch: {'; '.join(detail)}")

    records, lines = [], []
    for lineno, cells in enumerate(reader, start=2):
        if not cells:
            continue
        if len(cells) != len(HEADER):
            raise DatasetError(f"{source}: row {lineno}: expected {len(HEADER)} cells, got {len(cells)}")
        records.append(_parse_row(dict(zip(HEADER, cells)), lineno))
        lines.append(lineno)

    seen: dict[tuple, int] = {}
    for r, lineno in zip(records, lines):
        if r.key in seen:
            raise DatasetError(f"{source}: row {lineno}: duplicate of row {seen[r.key]} {r.key}")
        seen[r.key] = lineno

    totals = release_totals(records)
    for r, lineno in zip(records, lines):
        total = totals[(r.system, r.release_id)]
        problems = check_record(r, total, tolerance=_DECIMAL_SLACK)
        if problems:
            raise DatasetError(f"{source}: row {lineno}: {'; '.join(problems)}")
        r.aveEntityAttribute = r.entityAttributeNum / r.entityNum if r.entityNum else 0.0
        r.serviceCallPer = share(r.serviceCallGate, total)
        r.serviceCalledPer = share(r.serviceCalledGate, total)
    return records


def read_dataset(path) -> list[MicroserviceRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    return parse_dataset(text, str(path))


def aggregate_releases(per_release_files: Iterable, out) -> list[MicroserviceRecord]:
    records: list[MicroserviceRecord] = []
    for path in per_release_files:
        records.extend(read_dataset(path))
    _check_unique(records)
    write_dataset(records, out)
    return records
