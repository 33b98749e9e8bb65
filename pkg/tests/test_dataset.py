import csv
import dataclasses
import io
import json
import random
from datetime import datetime, timezone

import pytest

from msfeatures.dataset import (HEADER, DatasetError, aggregate_releases, format_decimal, parse_dataset,
                                read_dataset, render_dataset, sort_records, write_dataset, write_jsonl)
from msfeatures.discovery import InfraRole
from msfeatures.metrics import MicroserviceRecord, derive_metrics

from generators import records


def rec(system, release, name, when=None, **kw):
    return derive_metrics(MicroserviceRecord(system, release, name, release_timestamp=when, **kw), 1)


def test_header_has_identity_role_and_metrics():
    assert HEADER[:4] == ("system", "release", "service", "infra_role")
    assert len(HEADER) == 4 + 23


@pytest.mark.parametrize("value, text", [
    (0.0, "0.0000"), (1, "1.0000"), (2 / 3, "0.6667"), (0.00005, "0.0000"), (0.00015, "0.0002"),
    (0.12345, "0.1234"), (7 / 3, "2.3333"),
])
def test_format_decimal(value, text):
    assert format_decimal(value) == text


def test_round_trip_small(tmp_path):
    rs = records(random.Random(7), 30)
    path = tmp_path / "d.csv"
    write_dataset(rs, path)
    assert read_dataset(path) == sort_records(rs)
    first = path.read_bytes()
    write_dataset(read_dataset(path), path)
    assert path.read_bytes() == first


def test_cells_are_canonical():
    r = rec("s", "v", "a", serviceCall={"z-service": 1, "a-service": 2}, APIVersionSet=frozenset({"v2", "v1"}),
            entityNum=3, entityAttributeNum=7)
    row = dict(zip(HEADER, list(csv.reader(io.StringIO(render_dataset([r]))))[1]))
    assert row["serviceCall"] == '{"a-service":2,"z-service":1}'
    assert row["APIVersionSet"] == '["v1","v2"]'
    assert row["aveEntityAttribute"] == "2.3333"
    assert row["infra_role"] == "business"


def test_sort_order():
    t = lambda y: datetime(y, 1, 1, tzinfo=timezone.utc)
    rs = [rec("b", "r1", "x"), rec("a", "v2", "y", t(2021)), rec("a", "v10", "x", t(2019)),
          rec("a", "v2", "a", t(2021)), rec("b", "r0", "x")]
    got = [r.key for r in sort_records(rs)]
    # timed releases sort by time, untimed ones keep their first appearance
    assert got == [("a", "v10", "x"), ("a", "v2", "a"), ("a", "v2", "y"), ("b", "r1", "x"), ("b", "r0", "x")]


def test_write_rejects_invalid_and_duplicates(tmp_path):
    good = rec("s", "v", "a")
    with pytest.raises(DatasetError, match="duplicate"):
        render_dataset([good, dataclasses.replace(good)])
    with pytest.raises(DatasetError, match="invalid record"):
        render_dataset([dataclasses.replace(good, serviceCallGate=3)])


def _text(rows):
    return render_dataset(rows)


def test_parse_errors():
    base = _text([rec("s", "v", "a")])
    with pytest.raises(DatasetError, match="empty file"):
        parse_dataset("")
    with pytest.raises(DatasetError, match=r"unknown column\(s\) \['bogus'\]"):
        parse_dataset(base.replace("serviceCalledPer", "bogus", 1))
    lines = base.splitlines()
    with pytest.raises(DatasetError, match="row 2: malformed JSON in serviceCall"):
        parse_dataset("\n".join([lines[0], lines[1].replace(",{},{},", ",{},{oops,", 1)]))
    with pytest.raises(DatasetError, match="row 3: duplicate of row 2"):
        parse_dataset("\n".join([lines[0], lines[1], lines[1]]))
    with pytest.raises(DatasetError, match="unknown infra_role"):
        parse_dataset(base.replace(",business,", ",worker,"))
    with pytest.raises(DatasetError, match="row 2: expected 27 cells"):
        parse_dataset(lines[0] + "\na,b\n")


def test_parse_checks_invariants():
    r = rec("s", "v", "a", serviceCall={"x-service": 1})
    text = _text([r]).replace(",1,1,1.0000,", ",1,2,1.0000,")
    with pytest.raises(DatasetError, match="serviceCallGate"):
        parse_dataset(text)


def test_denominator_counts_business_rows_only():
    rs = [derive_metrics(MicroserviceRecord("s", "v", n, serviceCall=c, infra_role=role), 2)
          for n, c, role in [("a", {"b": 1}, InfraRole.BUSINESS), ("b", {}, InfraRole.BUSINESS),
                             ("reg", {}, InfraRole.REGISTRY)]]
    back = parse_dataset(render_dataset(rs))
    assert [r.serviceCallPer for r in back] == [0.5, 0.0, 0.0]


def test_jsonl(tmp_path):
    rs = records(random.Random(3), 5)
    write_jsonl(rs, tmp_path / "d.jsonl")
    objs = [json.loads(line) for line in (tmp_path / "d.jsonl").read_text().splitlines()]
    assert len(objs) == 5 and set(objs[0]) == set(HEADER)
    assert isinstance(objs[0]["codeSize"], int) and isinstance(objs[0]["serviceCall"], dict)


def test_aggregate(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_dataset([rec("s", "v1", "x")], a)
    write_dataset([rec("s", "v2", "x")], b)
    out = aggregate_releases([a, b], tmp_path / "all.csv")
    assert [r.release_id for r in out] == ["v1", "v2"]
    with pytest.raises(DatasetError, match="duplicate"):
        aggregate_releases([a, a], tmp_path / "dup.csv")


def test_read_missing(tmp_path):
    with pytest.raises(DatasetError, match="cannot read"):
        read_dataset(tmp_path / "nope.csv")
