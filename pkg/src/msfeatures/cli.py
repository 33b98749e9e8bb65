"""Command line entry point.

    msfeatures fetch   --catalog systems.csv --workspace repos/
    msfeatures extract path/to/checkout --system NAME [--release ID] --out data.csv
    msfeatures scan    --catalog systems.csv --workspace repos/ --out data.csv [--jobs 4]
    msfeatures stats   data.csv [--boxplot box.csv]
    msfeatures flags   data.csv [--config cfg.yml]

Exit codes: 0 success, 1 usage or config error, 2 nothing produced.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .catalog import CatalogError, RepositoryError, fetch_repository, load_catalog
from .config import ConfigError, load_config
from .dataset import DatasetError, read_dataset
from .discovery import DiscoveryError
from .pipeline import (EXIT_NO_OUTPUT, EXIT_OK, EXIT_USAGE, Options, analyze_checkout, emit_graph,
                       finalize_output, run_pipeline)
from .report import flag_nano_services, format_summary_table, summarize_records, write_boxplot_data

log = logging.getLogger("msfeatures")


def _extraction_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, type=Path, help="dataset CSV to write")
    p.add_argument("--config", type=Path, help="YAML file overriding extraction settings")
    p.add_argument("--business-only", action="store_true", help="drop registry/gateway/config/other infra rows")
    p.add_argument("--include-tests", action="store_true", help="also analyse src/test sources")
    p.add_argument("--emit-graph", type=Path, metavar="DIR",
                   help="write <system>@<release>.edges.csv and .dot call graphs into DIR")
    p.add_argument("--emit-jsonl", action="store_true", help="also write a JSON-lines copy next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msfeatures",
                                     description="Extract microservice feature metrics from Spring Cloud repositories.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="clone or update every catalog repository")
    p.add_argument("--catalog", required=True, type=Path)
    p.add_argument("--workspace", required=True, type=Path)

    p = sub.add_parser("extract", help="analyse one checked-out system")
    p.add_argument("path", type=Path)
    p.add_argument("--system", help="system name (default: directory name)")
    p.add_argument("--release", default="HEAD")
    _extraction_flags(p)

    p = sub.add_parser("scan", help="fetch, checkout every release and extract a whole catalog")
    p.add_argument("--catalog", required=True, type=Path)
    p.add_argument("--workspace", required=True, type=Path)
    p.add_argument("--jobs", type=int, default=1)
    _extraction_flags(p)

    p = sub.add_parser("stats", help="distribution summary of a dataset")
    p.add_argument("dataset", type=Path)
    p.add_argument("--boxplot", type=Path, help="write per-metric box-plot data CSV")
    p.add_argument("--business-only", action="store_true")

    p = sub.add_parser("flags", help="heuristic nano-service flags over a dataset")
    p.add_argument("dataset", type=Path)
    p.add_argument("--config", type=Path)
    return parser


def _options(args) -> Options:
    return Options(
        config=load_config(args.config),
        include_tests=args.include_tests,
        business_only=args.business_only,
        emit_graph=args.emit_graph,
        emit_jsonl=args.emit_jsonl,
        jobs=getattr(args, "jobs", 1),
    )


def cmd_fetch(args) -> int:
    entries = load_catalog(args.catalog)
    fetched = 0
    for entry in entries:
        try:
            path = fetch_repository(entry, args.workspace)
        except RepositoryError as exc:
            log.error("%s", exc)
            continue
        fetched += 1
        print(f"{entry.name}\t{path}")
    return EXIT_OK if fetched else EXIT_NO_OUTPUT


def cmd_extract(args) -> int:
    options = _options(args)
    system = args.system or args.path.resolve().name
    try:
        analysis = analyze_checkout(args.path, system, args.release, options)
    except DiscoveryError as exc:
        log.error("%s", exc)
        return EXIT_NO_OUTPUT
    for d in analysis.diagnostics:
        log.info("%s", d)
    if options.emit_graph is not None:
        emit_graph(analysis, options.emit_graph, system, args.release)
    records = finalize_output(analysis.records, args.out, options) if analysis.records else []
    print(f"services={len(analysis.services)} records={len(records)} diagnostics={len(analysis.diagnostics)}")
    return EXIT_OK if records else EXIT_NO_OUTPUT


def cmd_scan(args) -> int:
    return run_pipeline(args.catalog, args.workspace, args.out, _options(args))


def cmd_stats(args) -> int:
    records = read_dataset(args.dataset)
    if args.business_only:
        records = [r for r in records if r.infra_role.value == "business"]
    if not records:
        log.error("%s has no rows", args.dataset)
        return EXIT_NO_OUTPUT
    summaries = summarize_records(records)
    sys.stdout.write(format_summary_table(summaries))
    if args.boxplot:
        write_boxplot_data(summaries, args.boxplot)
    return EXIT_OK


def cmd_flags(args) -> int:
    cfg = load_config(args.config)
    flags = flag_nano_services(read_dataset(args.dataset), cfg.nano_thresholds)
    for f in flags:
        values = " ".join(f"{k}={v}" for k, v in f.triggering_values.items())
        print(f"{f.system}\t{f.release_id}\t{f.service_name}\t{f.rule_name}\t{values}")
    return EXIT_OK


COMMANDS = {"fetch": cmd_fetch, "extract": cmd_extract, "scan": cmd_scan, "stats": cmd_stats, "flags": cmd_flags}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CatalogError, DatasetError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
