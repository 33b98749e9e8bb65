"""End-to-end extraction: catalog -> clone -> releases -> checkout -> records."""

from __future__ import annotations

import logging
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

from .apis import extract_api_metrics, extract_apis
from .callgraph import (SystemCallGraph, build_system_call_graph, count_feign_usage,
                        extract_feign_targets, extract_rest_calls, extract_service_impl_calls,
                        merge_call_maps, write_dot, write_edge_list)
from .catalog import (CatalogError, RepositoryError, checkout_release, fetch_repository,
                      list_releases, load_catalog)
from .config import ExtractionConfig
from .dataset import DatasetError, read_dataset, sort_records, write_dataset, write_jsonl
from .discovery import (DiscoveryError, InfraRole, MicroserviceModule, classify_infrastructure_role,
                        discover_module_tree, find_module_roots, identify_microservices,
                        resolve_service_name)
from .javasrc import SourceParseError, enumerate_source_files, parse_source_unit
from .loc import count_effective_lines
from .metrics import MicroserviceRecord, assemble_record, derive_metrics
from .tiers import TierRole, count_tier_metrics, types_with_role

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_NO_OUTPUT = 0, 1, 2


@dataclass
class Options:
    config: ExtractionConfig = field(default_factory=ExtractionConfig)
    include_tests: bool = False
    business_only: bool = False
    emit_graph: Optional[Path] = None
    emit_jsonl: bool = False
    jobs: int = 1


@dataclass
class Analysis:
    records: list[MicroserviceRecord]
    graph: SystemCallGraph
    services: list[MicroserviceModule]
    diagnostics: list[str] = field(default_factory=list)


def _unique_names(services: list[MicroserviceModule], root: Path, diagnostics: list[str]) -> None:
    taken: set[str] = set()
    for ms in services:
        name = ms.service_name
        if name in taken:
            rel = ms.module.path.relative_to(root).as_posix() if root in ms.module.path.parents else ms.module.path.name
            new = f"{name}@{rel}"
            diagnostics.append(f"duplicate service name {name!r}; module {rel} renamed to {new!r}")
            ms.service_name = name = new
        taken.add(name)


def analyze_checkout(root, system: str, release_id: str = "HEAD", options: Options | None = None,
                     release_timestamp: Optional[datetime] = None) -> Analysis:
    """Extract records for every microservice of one checked-out system."""
    options = options or Options()
    cfg = options.config
    root = Path(root).resolve()
    diagnostics: list[str] = []

    module_roots = find_module_roots(root)
    if not module_roots:
        raise DiscoveryError(f"no pom.xml found under {root}")
    trees = []
    for mr in module_roots:
        try:
            trees.append(discover_module_tree(mr))
        except DiscoveryError as exc:
            diagnostics.append(str(exc))
    if not trees:
        raise DiscoveryError(f"{system}@{release_id}: no readable Maven project")

    sources, files = {}, {}
    for tree in trees:
        for node in tree.walk():
            if node.missing_descriptor:
                diagnostics.append(f"module {node.path} has no pom.xml")
            if not node.path.is_dir():
                continue
            paths = enumerate_source_files(node.path, [c.path for c in node.children], options.include_tests)
            units = []
            for p in paths:
                try:
                    units.append(parse_source_unit(p))
                except SourceParseError as exc:
                    diagnostics.append(f"skipped {exc}")
            sources[node.path], files[node.path] = units, paths

    services = [ms for tree in trees for ms in identify_microservices(tree, sources)]
    for ms in services:
        ms.infra_role = classify_infrastructure_role(ms)
        ms.service_name = resolve_service_name(ms)
    _unique_names(services, root, diagnostics)

    all_units = [u for units in sources.values() for u in units]
    feign_targets = extract_feign_targets(all_units, diagnostics)

    per_service, partial = {}, []
    for ms in services:
        units = ms.units
        controllers = types_with_role(units, TierRole.CONTROLLER, cfg)
        impls = types_with_role(units, TierRole.SERVICE_IMPL, cfg)
        rest = merge_call_maps(*(extract_rest_calls(d, cfg, diagnostics) for u in units for d in u.types))
        per_service[ms.service_name] = merge_call_maps(rest, count_feign_usage(units, feign_targets))
        if any(i.endswith("WebClient") for u in units for i in u.import_names):
            diagnostics.append(f"{ms.service_name}: uses WebClient; those calls are not detected")
        code_size = sum(count_effective_lines(p) for p in files[ms.module.path])
        partial.append((ms, count_tier_metrics(units, cfg), code_size,
                        extract_api_metrics(extract_apis(controllers, cfg), cfg),
                        extract_service_impl_calls(controllers, impls)))

    graph = build_system_call_graph(per_service, [ms.service_name for ms in services])
    for name in sorted(graph.external):
        diagnostics.append(f"call target {name!r} is not a microservice of {system}")
    total = max(1, sum(ms.infra_role is InfraRole.BUSINESS for ms in services))
    records = [
        derive_metrics(assemble_record(
            (system, release_id, ms.service_name), tiers, code_size, api_metrics, impl,
            graph.service_call.get(ms.service_name, {}), graph.service_called.get(ms.service_name, {}),
            infra_role=ms.infra_role, release_timestamp=release_timestamp), total)
        for ms, tiers, code_size, api_metrics, impl in partial
    ]
    for d in diagnostics:
        log.debug("%s@%s: %s", system, release_id, d)
    return Analysis(records, graph, services, diagnostics)


def _safe(name: str) -> str:
    return re.sub(r"[^\w.@-]+", "_", name)


def emit_graph(analysis: Analysis, directory: Path, system: str, release_id: str) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    stem = directory / f"{_safe(system)}@{_safe(release_id)}"
    write_edge_list(analysis.graph, stem.with_name(stem.name + ".edges.csv"))
    write_dot(analysis.graph, stem.with_name(stem.name + ".dot"), [ms.service_name for ms in analysis.services])


@dataclass
class SystemResult:
    name: str
    records: list[MicroserviceRecord] = field(default_factory=list)
    releases: int = 0
    diagnostics: list[str] = field(default_factory=list)
    failed: bool = False


def process_system(entry, workspace: Path, options: Options) -> SystemResult:
    result = SystemResult(entry.name)
    try:
        repo = fetch_repository(entry, workspace)
        releases = list_releases(repo)
    except (RepositoryError, OSError) as exc:
        result.failed = True
        result.diagnostics.append(f"{entry.name}: {exc}")
        log.error("%s: skipped: %s", entry.name, exc)
        return result
    for release in releases:
        try:
            checkout_release(repo, release)
            analysis = analyze_checkout(repo, entry.name, release.release_id, options, release.commit_timestamp)
        except (RepositoryError, DiscoveryError, OSError) as exc:
            result.diagnostics.append(f"{entry.name}@{release.release_id}: {exc}")
            log.warning("%s@%s: skipped: %s", entry.name, release.release_id, exc)
            continue
        result.releases += 1
        result.diagnostics.extend(analysis.diagnostics)
        result.records.extend(analysis.records)
        if options.emit_graph is not None:
            emit_graph(analysis, options.emit_graph, entry.name, release.release_id)
    return result


def finalize_output(records: list[MicroserviceRecord], out_path, options: Options) -> list[MicroserviceRecord]:
    """Write the dataset, then re-read it as a validation pass."""
    if options.business_only:
        records = [r for r in records if r.infra_role is InfraRole.BUSINESS]
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_dataset(records, out_path)
    reread = read_dataset(out_path)
    if reread != sort_records(records):
        raise DatasetError(f"{out_path}: written dataset does not read back identically")
    if options.emit_jsonl:
        write_jsonl(records, out_path.with_suffix(".jsonl"))
    return records


def run_pipeline(catalog_path, workspace, out_path, options: Options | None = None, echo=print) -> int:
    options = options or Options()
    try:
        entries = load_catalog(catalog_path)
    except CatalogError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    if not entries:
        log.error("catalog %s lists no systems", catalog_path)
        return EXIT_NO_OUTPUT
    workspace = Path(workspace)
    with ThreadPoolExecutor(max_workers=max(1, options.jobs)) as pool:
        results = list(pool.map(lambda e: process_system(e, workspace, options), entries))

    records = [r for res in results for r in res.records]
    stats = Counter(systems=sum(not r.failed for r in results), releases=sum(r.releases for r in results),
                    diagnostics=sum(len(r.diagnostics) for r in results))
    if records:
        records = finalize_output(records, out_path, options)
    echo(f"systems={stats['systems']}/{len(entries)} releases={stats['releases']} "
         f"records={len(records)} diagnostics={stats['diagnostics']}")
    return EXIT_OK if records else EXIT_NO_OUTPUT
