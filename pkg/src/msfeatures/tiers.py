"""Three-tier role assignment and the class-count metrics."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .config import ExtractionConfig
from .javasrc import SourceUnit, TypeDecl


class TierRole(str, enum.Enum):
    CONTROLLER = "Controller"
    SERVICE_IMPL = "ServiceImpl"
    INTERFACE = "Interface"
    ABSTRACT_CLASS = "AbstractClass"
    ENTITY = "Entity"
    DTO = "Dto"
    PLAIN = "Plain"


CONTROLLER_ANNOTATIONS = ("RestController", "Controller")


def classify_type(decl: TypeDecl, unit: SourceUnit, cfg: ExtractionConfig) -> set[TierRole]:
    roles: set[TierRole] = set()
    if decl.has_annotation(*CONTROLLER_ANNOTATIONS):
        roles.add(TierRole.CONTROLLER)
    if decl.has_annotation("Service"):
        roles.add(TierRole.SERVICE_IMPL)
    if decl.kind == "interface":
        roles.add(TierRole.INTERFACE)
    if decl.kind == "class":
        if decl.is_abstract:
            roles.add(TierRole.ABSTRACT_CLASS)
        # a controller is never an entity, whatever its package says
        if (TierRole.CONTROLLER not in roles
                and cfg.regex("entity_package_pattern").search(unit.package_path)
                and any(a.name in cfg.entity_annotations for a in decl.annotations)):
            roles.add(TierRole.ENTITY)
        if (cfg.regex("dto_name_pattern").search(decl.simple_name)
                or cfg.regex("dto_package_pattern").search(unit.package_path)):
            roles.add(TierRole.DTO)
    return roles or {TierRole.PLAIN}


@dataclass(frozen=True)
class TierCounts:
    entityNum: int = 0
    entityAttributeNum: int = 0
    controllerNum: int = 0
    interfaceNum: int = 0
    abstractClassNum: int = 0
    serviceClassNum: int = 0
    dtoClassNum: int = 0


def _own_attribute_count(decl: TypeDecl) -> int:
    return sum(1 for f in decl.fields if not f.is_static)


def _inherited_attribute_count(decl: TypeDecl, classes: dict[str, TypeDecl]) -> int:
    total, seen = 0, {decl.simple_name}
    current = decl
    while current.super_type_names:
        parent = classes.get(current.super_type_names[0])
        if parent is None or parent.simple_name in seen:
            break
        seen.add(parent.simple_name)
        total += _own_attribute_count(parent)
        current = parent
    return total


def count_tier_metrics(units: Iterable[SourceUnit], cfg: ExtractionConfig) -> TierCounts:
    units = list(units)
    counts = dict.fromkeys(TierCounts.__dataclass_fields__, 0)
    classes = {d.simple_name: d for u in units for d in u.types if d.kind == "class"}
    for unit in units:
        for decl in unit.types:
            roles = classify_type(decl, unit, cfg)
            if TierRole.ENTITY in roles:
                counts["entityNum"] += 1
                counts["entityAttributeNum"] += _own_attribute_count(decl)
                if cfg.include_inherited_entity_fields:
                    counts["entityAttributeNum"] += _inherited_attribute_count(decl, classes)
            counts["controllerNum"] += TierRole.CONTROLLER in roles
            counts["interfaceNum"] += TierRole.INTERFACE in roles
            counts["abstractClassNum"] += TierRole.ABSTRACT_CLASS in roles
            counts["serviceClassNum"] += TierRole.SERVICE_IMPL in roles
            counts["dtoClassNum"] += TierRole.DTO in roles
    return TierCounts(**counts)


def types_with_role(units: Iterable[SourceUnit], role: TierRole, cfg: ExtractionConfig) -> list[TypeDecl]:
    return [d for u in units for d in u.types if role in classify_type(d, u, cfg)]
