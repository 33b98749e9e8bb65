"""Per-microservice records: fourteen extracted metrics plus nine derived ones.

Attribute names are the metric names themselves, so records, CSV
columns and documentation line up one to one.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Optional

from .apis import ApiMetrics
from .discovery import InfraRole
from .tiers import TierCounts

DIRECT_METRICS = (
    "codeSize", "entityNum", "entityAttributeNum", "controllerNum", "interfaceNum",
    "abstractClassNum", "serviceClassNum", "dtoClassNum", "APINum", "maxParamNum",
    "APIVersionSet", "serviceImplCall", "serviceCall", "serviceCalled",
)
DERIVED_METRICS = (
    "aveEntityAttribute", "APIVersionNum", "serviceImplCallNum", "maxServiceCall",
    "serviceCallGate", "serviceCallPer", "maxServiceCalled", "serviceCalledGate",
    "serviceCalledPer",
)
ALL_METRICS = DIRECT_METRICS + DERIVED_METRICS

AVE_TOLERANCE = 1e-9


class RecordError(ValueError):
    pass


@dataclass
class MicroserviceRecord:
    system: str
    release_id: str
    service_name: str
    infra_role: InfraRole = InfraRole.BUSINESS
    codeSize: int = 0
    entityNum: int = 0
    entityAttributeNum: int = 0
    controllerNum: int = 0
    interfaceNum: int = 0
    abstractClassNum: int = 0
    serviceClassNum: int = 0
    dtoClassNum: int = 0
    APINum: int = 0
    maxParamNum: int = 0
    APIVersionSet: frozenset[str] = frozenset()
    serviceImplCall: dict[str, int] = field(default_factory=dict)
    serviceCall: dict[str, int] = field(default_factory=dict)
    serviceCalled: dict[str, int] = field(default_factory=dict)
    aveEntityAttribute: float = 0.0
    APIVersionNum: int = 0
    serviceImplCallNum: int = 0
    maxServiceCall: int = 0
    serviceCallGate: int = 0
    serviceCallPer: float = 0.0
    maxServiceCalled: int = 0
    serviceCalledGate: int = 0
    serviceCalledPer: float = 0.0
    # ordering hint for the writer; not a metric and not serialised
    release_timestamp: Optional[datetime] = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.system, self.release_id, self.service_name)


def assemble_record(identity: tuple[str, str, str], tier_counts: TierCounts, code_size: int,
                    api_metrics: ApiMetrics, impl_calls: Mapping[str, int],
                    graph_row_out: Mapping[str, int], graph_row_in: Mapping[str, int],
                    infra_role: InfraRole = InfraRole.BUSINESS,
                    release_timestamp: Optional[datetime] = None) -> MicroserviceRecord:
    system, release_id, service = identity
    return MicroserviceRecord(
        system=system,
        release_id=release_id,
        service_name=service,
        infra_role=InfraRole(infra_role),
        codeSize=int(code_size),
        **dataclasses.asdict(tier_counts),
        APINum=api_metrics.APINum,
        maxParamNum=api_metrics.maxParamNum,
        APIVersionSet=frozenset(api_metrics.APIVersionSet),
        serviceImplCall={k: int(v) for k, v in impl_calls.items() if v},
        serviceCall={k: int(v) for k, v in graph_row_out.items() if v},
        serviceCalled={k: int(v) for k, v in graph_row_in.items() if v},
        release_timestamp=release_timestamp,
    )


def share(gate: int, total_services: int) -> float:
    # partners outside the system (external hosts, infra) can push gate above total
    return min(gate, total_services) / total_services


def derive_metrics(record: MicroserviceRecord, total_services: int) -> MicroserviceRecord:
    if total_services < 1:
        raise RecordError("total_services must be at least 1")
    return dataclasses.replace(
        record,
        aveEntityAttribute=record.entityAttributeNum / record.entityNum if record.entityNum else 0.0,
        APIVersionNum=len(record.APIVersionSet),
        serviceImplCallNum=sum(record.serviceImplCall.values()),
        maxServiceCall=max(record.serviceCall.values(), default=0),
        serviceCallGate=len(record.serviceCall),
        serviceCallPer=share(len(record.serviceCall), total_services),
        maxServiceCalled=max(record.serviceCalled.values(), default=0),
        serviceCalledGate=len(record.serviceCalled),
        serviceCalledPer=share(len(record.serviceCalled), total_services),
    )


def check_record(record: MicroserviceRecord, total_services: Optional[int] = None,
                 tolerance: float = AVE_TOLERANCE) -> list[str]:
    """Return the invariant violations of ``record`` (empty when consistent)."""
    problems = []
    r = record
    for name in ("codeSize", "entityNum", "entityAttributeNum", "controllerNum", "interfaceNum",
                 "abstractClassNum", "serviceClassNum", "dtoClassNum", "APINum", "maxParamNum"):
        if getattr(r, name) < 0:
            problems.append(f"{name} is negative")
    for name in ("serviceImplCall", "serviceCall", "serviceCalled"):
        bad = [k for k, v in getattr(r, name).items() if v < 1 or not k]
        if bad:
            problems.append(f"{name} has non-positive or empty entries: {bad}")
    if r.entityNum == 0 and r.entityAttributeNum != 0:
        problems.append("entityAttributeNum without entities")
    if r.APIVersionNum != len(r.APIVersionSet):
        problems.append(f"APIVersionNum {r.APIVersionNum} != |APIVersionSet| {len(r.APIVersionSet)}")
    if r.serviceCallGate != len(r.serviceCall):
        problems.append("serviceCallGate != |serviceCall|")
    if r.serviceCalledGate != len(r.serviceCalled):
        problems.append("serviceCalledGate != |serviceCalled|")
    if r.maxServiceCall != max(r.serviceCall.values(), default=0):
        problems.append("maxServiceCall != max(serviceCall)")
    if r.maxServiceCalled != max(r.serviceCalled.values(), default=0):
        problems.append("maxServiceCalled != max(serviceCalled)")
    if r.serviceImplCallNum != sum(r.serviceImplCall.values()):
        problems.append("serviceImplCallNum != sum(serviceImplCall)")
    expected_ave = r.entityAttributeNum / r.entityNum if r.entityNum else 0.0
    if abs(r.aveEntityAttribute - expected_ave) >= tolerance or (r.entityNum == 0 and r.aveEntityAttribute != 0):
        problems.append(f"aveEntityAttribute {r.aveEntityAttribute} != {expected_ave}")
    for name in ("serviceCallPer", "serviceCalledPer"):
        if not 0.0 <= getattr(r, name) <= 1.0:
            problems.append(f"{name} outside [0, 1]")
    if total_services is not None:
        for per, gate in (("serviceCallPer", r.serviceCallGate), ("serviceCalledPer", r.serviceCalledGate)):
            if abs(getattr(r, per) - share(gate, total_services)) >= tolerance:
                problems.append(f"{per} != gate/total ({gate}/{total_services})")
    return problems
