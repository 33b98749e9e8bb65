"""REST endpoints exposed by controller classes."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .config import ExtractionConfig
from .javasrc import Annotation, TypeDecl

MAPPING_VERBS = {
    "GetMapping": "GET",
    "PostMapping": "POST",
    "PutMapping": "PUT",
    "DeleteMapping": "DELETE",
    "PatchMapping": "PATCH",
    "RequestMapping": None,
}
_VERBS = ("GET", "POST", "PUT", "DELETE", "PATCH")


@dataclass
class ApiInfo:
    controller_name: str
    method_name: str
    http_path: str
    http_verbs: frozenset[str] = frozenset({"ANY"})
    param_count: int = 0
    versions: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True)
class ApiMetrics:
    APINum: int
    maxParamNum: int
    APIVersionSet: frozenset[str]


def join_paths(*parts: str) -> str:
    """Join mapping paths with exactly one ``/`` between non-empty segments."""
    segments = [p.strip().strip("/") for p in parts if p and p.strip().strip("/")]
    return "/" + "/".join(re.sub(r"/{2,}", "/", s) for s in segments)


def _mapping_path(ann: Annotation | None) -> str:
    if ann is None:
        return ""
    return ann.members.get("value", ann.members.get("path", ""))


def _verbs(ann: Annotation) -> frozenset[str]:
    fixed = MAPPING_VERBS[ann.name]
    if fixed:
        return frozenset({fixed})
    raw = ann.raw.get("method", "")
    found = {v for v in _VERBS if re.search(rf"\b{v}\b", raw)}
    return frozenset(found) if found else frozenset({"ANY"})


def path_versions(path: str, cfg: ExtractionConfig) -> frozenset[str]:
    return frozenset(m.group(0).lower() for m in cfg.regex("version_pattern").finditer(path))


def extract_apis(controllers: Iterable[TypeDecl], cfg: ExtractionConfig) -> list[ApiInfo]:
    apis = []
    for ctrl in controllers:
        base = _mapping_path(ctrl.annotation("RequestMapping"))
        for method in ctrl.methods:
            if method.visibility != "public":
                continue
            mapping = next((a for a in method.annotations if a.name in MAPPING_VERBS), None)
            if mapping is None:
                continue
            path = join_paths(base, _mapping_path(mapping))
            apis.append(ApiInfo(
                controller_name=ctrl.simple_name,
                method_name=method.name,
                http_path=path,
                http_verbs=_verbs(mapping),
                param_count=len(method.parameters),
                versions=path_versions(path, cfg),
            ))
    return apis


def extract_api_metrics(apis: list[ApiInfo], cfg: ExtractionConfig) -> ApiMetrics:
    versions: set[str] = set()
    for api in apis:
        versions |= path_versions(api.http_path, cfg)
    return ApiMetrics(
        APINum=len(apis),
        maxParamNum=max((a.param_count for a in apis), default=0),
        APIVersionSet=frozenset(versions),
    )
