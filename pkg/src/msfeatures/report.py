"""Distribution summaries and heuristic smell flags over a dataset."""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .discovery import InfraRole
from .metrics import MicroserviceRecord

NUMERIC_METRICS = (
    "codeSize", "entityNum", "entityAttributeNum", "aveEntityAttribute", "controllerNum",
    "interfaceNum", "abstractClassNum", "serviceClassNum", "dtoClassNum", "APINum", "maxParamNum",
    "APIVersionNum", "serviceImplCallNum", "maxServiceCall", "serviceCallGate", "serviceCallPer",
    "maxServiceCalled", "serviceCalledGate", "serviceCalledPer",
)
NANO_SERVICE = "nano_service"
RULES = (NANO_SERVICE,)


@dataclass
class MetricSummary:
    metric_name: str
    count: int
    mean: float
    median: float
    q1: float
    q3: float
    minimum: float
    maximum: float
    outliers: list[tuple] = field(default_factory=list)

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @property
    def fences(self) -> tuple[float, float]:
        return self.q1 - 1.5 * self.iqr, self.q3 + 1.5 * self.iqr


def quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    """(q1, median, q3); for odd n the median is left out of both halves."""
    data = sorted(values)
    n = len(data)
    half = n // 2
    lower = data[:half]
    upper = data[half + 1:] if n % 2 else data[half:]
    median = statistics.median(data)
    q1 = statistics.median(lower) if lower else median
    q3 = statistics.median(upper) if upper else median
    return q1, median, q3


def summarize_metric(values: Sequence[float], name: str,
                     labels: Optional[Sequence[tuple]] = None) -> MetricSummary:
    """Box-plot statistics; ``labels[i]`` identifies ``values[i]`` in the outlier list."""
    if not values:
        raise ValueError(f"no values for metric {name}")
    if labels is not None and len(labels) != len(values):
        raise ValueError("labels and values differ in length")
    q1, median, q3 = quartiles(values)
    summary = MetricSummary(name, len(values), statistics.fmean(values), median, q1, q3,
                            min(values), max(values))
    lo, hi = summary.fences
    for i, v in enumerate(values):
        if v < lo or v > hi:
            label = tuple(labels[i]) if labels is not None else ()
            summary.outliers.append((*label, v))
    summary.outliers.sort(key=lambda o: (o[-1], o[:-1]))
    return summary


def summarize_records(records: Sequence[MicroserviceRecord],
                      metrics: Iterable[str] = NUMERIC_METRICS) -> list[MetricSummary]:
    labels = [r.key for r in records]
    return [summarize_metric([float(getattr(r, m)) for r in records], m, labels) for m in metrics]


def _num(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".") if v != int(v) else str(int(v))


def format_summary_table(summaries: Sequence[MetricSummary]) -> str:
    head = ("metric", "n", "mean", "min", "q1", "median", "q3", "max", "outliers")
    rows = [head] + [(s.metric_name, str(s.count), _num(round(s.mean, 4)), _num(s.minimum), _num(s.q1),
                      _num(s.median), _num(s.q3), _num(s.maximum), str(len(s.outliers)))
                     for s in summaries]
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_boxplot_data(summaries: Sequence[MetricSummary], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "min", "q1", "median", "q3", "max", "outliers"])
        for s in summaries:
            writer.writerow([s.metric_name, _num(s.minimum), _num(s.q1), _num(s.median), _num(s.q3),
                             _num(s.maximum), ";".join(_num(o[-1]) for o in s.outliers)])


@dataclass
class SmellFlag:
    system: str
    release_id: str
    service_name: str
    rule_name: str
    triggering_values: dict[str, float]


def flag_nano_services(records: Iterable[MicroserviceRecord],
                       thresholds: Optional[Mapping[str, int]] = None) -> list[SmellFlag]:
    """Demonstration heuristic: business services tiny in entities, controllers and APIs.

    The default thresholds (1, 1, 2) are illustrative, not normative.
    """
    limits = {"entityNum": 1, "controllerNum": 1, "APINum": 2}
    limits.update(thresholds or {})
    flags = []
    for r in records:
        if InfraRole(r.infra_role) is not InfraRole.BUSINESS:
            continue
        values = {m: getattr(r, m) for m in limits}
        if all(values[m] <= limits[m] for m in limits):
            flags.append(SmellFlag(r.system, r.release_id, r.service_name, NANO_SERVICE, values))
    return flags
