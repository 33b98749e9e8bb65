"""Inter-service invocation maps and controller-to-service call counts.

RestTemplate call sites have their URL argument rebuilt by substituting
local variables, field initialisers and single-return helper methods of
the same class; the host token of the rebuilt URL names the callee.
Feign clients name their target in the ``FeignClient`` annotation.
"""

from __future__ import annotations

import csv
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional

from .config import ExtractionConfig
from .javasrc import (Call, Concat, Expr, FieldDecl, MethodDecl, NameRef, Opaque,
                      SourceUnit, StringLiteral, TypeDecl)

log = logging.getLogger(__name__)

PLACEHOLDER = "{?}"
MAX_DEPTH = 16
# Hard cap on substitutions per URL, for pathological fan-out.
MAX_EXPANSIONS = 20000

CallMap = Counter  # callee service name -> invocation count


def merge_call_maps(*maps: Mapping[str, int]) -> Counter:
    total: Counter = Counter()
    for m in maps:
        total.update(m)
    return +total


# -- RestTemplate --------------------------------------------------------------

def find_rest_client_fields(decl: TypeDecl, cfg: ExtractionConfig | None = None) -> list[str]:
    types = (cfg or ExtractionConfig()).rest_client_types
    return [f.name for f in decl.fields if f.declared_type_name in types]


class _Reducer:
    def __init__(self, ctx: TypeDecl):
        self.ctx = ctx
        self.expansions = 0

    def reduce(self, expr: Expr, bindings: Mapping[str, Expr], depth: int, visiting: frozenset) -> str:
        if isinstance(expr, StringLiteral):
            return expr.value
        if isinstance(expr, Concat):
            return (self.reduce(expr.left, bindings, depth, visiting)
                    + self.reduce(expr.right, bindings, depth, visiting))
        if depth >= MAX_DEPTH or self.expansions >= MAX_EXPANSIONS:
            return PLACEHOLDER
        if isinstance(expr, NameRef):
            key = "name:" + expr.identifier
            if key in visiting:
                return PLACEHOLDER
            if expr.identifier in bindings:
                target, scope = bindings[expr.identifier], bindings
            else:
                fld = self.ctx.field_named(expr.identifier)
                if fld is None or fld.initializer is None:
                    return PLACEHOLDER
                # field initialisers cannot see method locals
                target, scope = fld.initializer, {}
            self.expansions += 1
            return self.reduce(target, scope, depth + 1, visiting | {key})
        if isinstance(expr, Call):
            if expr.receiver_name not in (None, "this"):
                return PLACEHOLDER
            method = self.ctx.find_method(expr.method_name, len(expr.arguments))
            if method is None or method.return_expr is None:
                return PLACEHOLDER
            key = f"method:{method.name}/{len(method.parameters)}"
            if key in visiting:
                return PLACEHOLDER
            self.expansions += 1
            args = [self.reduce(a, bindings, depth + 1, visiting) for a in expr.arguments]
            callee_scope = {name: StringLiteral(value)
                            for (name, _), value in zip(method.parameters, args)}
            return self.reduce(method.return_expr, callee_scope, depth + 1, visiting | {key})
        return PLACEHOLDER


def reduce_url_expression(expr: Expr, ctx: TypeDecl, bindings: Mapping[str, Expr] | None = None) -> str:
    """Rewrite a URL expression into a flat string, ``{?}`` marking unknown parts."""
    return _Reducer(ctx).reduce(expr, bindings or {}, 0, frozenset())


_SCHEME = re.compile(r"://")
_PORT = re.compile(r":(\d+|\{\?\})$")


def host_token(url: str) -> str:
    m = _SCHEME.search(url)
    if m:
        rest = url[m.end():]
        token = re.match(r"[^/\s]*", rest).group(0)
    else:
        token = url.split("/", 1)[0]
    return _PORT.sub("", token)


def match_service_name(url: str, cfg: ExtractionConfig | None = None) -> Optional[str]:
    cfg = cfg or ExtractionConfig()
    token = host_token(url)
    if not token or PLACEHOLDER in token or re.search(r"\s", token):
        return None
    return token if cfg.regex("service_name_pattern").fullmatch(token) else None


@dataclass
class RestCallSite:
    type_name: str
    method_name: str
    call: Call
    url: str
    service: Optional[str]


def _context(fields: list[FieldDecl], methods: list[MethodDecl], i: int) -> TypeDecl:
    owner = methods[i].declared_in
    if owner is not None:
        return owner
    return TypeDecl("<anonymous>", "class", fields=list(fields), methods=list(methods))


def rest_call_sites(fields: list[FieldDecl], methods: list[MethodDecl], i: int,
                    cfg: ExtractionConfig | None = None) -> Iterator[RestCallSite]:
    cfg = cfg or ExtractionConfig()
    ctx = _context(fields, methods, i)
    clients = {f.name for f in fields if f.declared_type_name in cfg.rest_client_types}
    method = methods[i]
    for call in method.body_calls:
        if call.receiver_name not in clients or call.method_name not in cfg.rest_call_methods:
            continue
        if not call.arguments:
            continue
        url = reduce_url_expression(call.arguments[0], ctx, method.bindings_at(call.offset))
        yield RestCallSite(ctx.simple_name, method.name, call, url, match_service_name(url, cfg))


def extract_rest_calls_in_method(fields: list[FieldDecl], methods: list[MethodDecl], i: int,
                                 cfg: ExtractionConfig | None = None,
                                 diagnostics: list[str] | None = None) -> Counter:
    call_map: Counter = Counter()
    for site in rest_call_sites(fields, methods, i, cfg):
        if site.service:
            call_map[site.service] += 1
        elif diagnostics is not None:
            diagnostics.append(f"{site.type_name}.{site.method_name}: unresolved RestTemplate URL {site.url!r}")
    return call_map


def extract_rest_calls(decl: TypeDecl, cfg: ExtractionConfig | None = None,
                       diagnostics: list[str] | None = None) -> Counter:
    if not find_rest_client_fields(decl, cfg):
        return Counter()
    return merge_call_maps(*(
        extract_rest_calls_in_method(decl.fields, decl.methods, i, cfg, diagnostics)
        for i in range(len(decl.methods))
    ))


# -- Feign -------------------------------------------------------------------------

def extract_feign_targets(units: Iterable[SourceUnit], diagnostics: list[str] | None = None) -> dict[str, str]:
    targets = {}
    for unit in units:
        for decl in unit.types:
            ann = decl.annotation("FeignClient")
            if ann is None:
                continue
            target = ann.members.get("value") or ann.members.get("name")
            if not target:
                msg = f"{unit.file_path}: FeignClient on {decl.simple_name} has no literal value/name"
                log.debug(msg)
                if diagnostics is not None:
                    diagnostics.append(msg)
                continue
            targets[decl.simple_name] = target.strip()
    return targets


def count_feign_usage(units: Iterable[SourceUnit], feign_targets: Mapping[str, str]) -> Counter:
    call_map: Counter = Counter()
    for unit in units:
        for decl in unit.types:
            clients = {f.name: feign_targets[f.declared_type_name]
                       for f in decl.fields if f.declared_type_name in feign_targets}
            if not clients:
                continue
            for method in decl.methods:
                for call in method.body_calls:
                    if call.receiver_name in clients:
                        call_map[clients[call.receiver_name]] += 1
    return call_map


# -- controller -> service implementation ------------------------------------------

def extract_service_impl_calls(controllers: Iterable[TypeDecl], service_types: Iterable[TypeDecl]) -> Counter:
    service_types = list(service_types)
    names = {s.simple_name for s in service_types}
    for s in service_types:
        names.update(s.super_type_names)
    calls: Counter = Counter()
    for ctrl in controllers:
        fields = {f.name: f.declared_type_name for f in ctrl.fields if f.declared_type_name in names}
        if not fields:
            continue
        for method in ctrl.methods:
            for call in method.body_calls:
                if call.receiver_name in fields:
                    calls[f"{fields[call.receiver_name]}.{call.method_name}"] += 1
    return calls


# -- system graph ------------------------------------------------------------------

@dataclass
class SystemCallGraph:
    service_call: dict[str, dict[str, int]] = field(default_factory=dict)
    service_called: dict[str, dict[str, int]] = field(default_factory=dict)
    external: set[str] = field(default_factory=set)


def transpose(graph: Mapping[str, Mapping[str, int]]) -> dict[str, dict[str, int]]:
    out: dict[str, dict[str, int]] = {}
    for caller, row in graph.items():
        for callee, count in row.items():
            out.setdefault(callee, {})[caller] = out.get(callee, {}).get(caller, 0) + count
    return out


def build_system_call_graph(per_service: Mapping[str, Mapping[str, int]],
                            known_services: Iterable[str] | None = None) -> SystemCallGraph:
    known = list(known_services) if known_services is not None else list(per_service)
    canonical = {}
    for name in known:
        canonical.setdefault(name.lower(), name)
    graph = SystemCallGraph()
    for caller, row in per_service.items():
        merged: dict[str, int] = {}
        for callee, count in row.items():
            if count <= 0 or not callee:
                continue
            resolved = canonical.get(callee.lower())
            if resolved is None:
                resolved = callee
                graph.external.add(callee)
            merged[resolved] = merged.get(resolved, 0) + count
        if merged:
            graph.service_call[caller] = merged
    graph.service_called = transpose(graph.service_call)
    return graph


def write_edge_list(graph: SystemCallGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["caller", "callee", "count"])
        for caller in sorted(graph.service_call):
            for callee, count in sorted(graph.service_call[caller].items()):
                writer.writerow([caller, callee, count])


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dot(graph: SystemCallGraph, path, nodes: Iterable[str] = ()) -> None:
    lines = ["digraph services {"]
    for name in sorted(set(nodes)):
        lines.append(f"  {_dot_id(name)};")
    for name in sorted(graph.external):
        lines.append(f"  {_dot_id(name)} [style=dashed];")
    for caller in sorted(graph.service_call):
        for callee, count in sorted(graph.service_call[caller].items()):
            lines.append(f"  {_dot_id(caller)} -> {_dot_id(callee)} [label={count}];")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
