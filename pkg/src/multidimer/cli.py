"""Command line entry points for the analysis pipeline and the service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from multidimer.extract import extract_commit_refs, ref_from_json
from multidimer.forge import generate, genspec_from_json
from multidimer.ingest import CorpusQuery, load_corpus
from multidimer.mapping import attribute_bugs, load_component_map
from multidimer.model import parse_utc
from multidimer.scm import Resolver, backend_config_from_json, change_from_json, make_backend
from multidimer.service import resolve_data_dir, run_job
from multidimer.store import SnapshotStore


def _cmd_ingest(args: argparse.Namespace) -> int:
    reports, summary = load_corpus(args.input, format=args.format)
    if args.report:
        Path(args.report).write_text(
            json.dumps(summary.to_json(), indent=1, sort_keys=True), encoding="utf-8"
        )
    print(f"accepted={summary.accepted} rejected={summary.rejected}")
    for locator, reason in summary.rejection_reasons[:20]:
        print(f"  {locator}: {reason}", file=sys.stderr)
    return 0 if summary.rejected == 0 else 1


def _cmd_extract(args: argparse.Namespace) -> int:
    reports, summary = load_corpus(args.input, format="jsonl")
    count = 0
    with open(args.out, "w", encoding="utf-8") as handle:
        for report in reports:
            for ref in extract_commit_refs(report.answer_text, report.bug_id):
                handle.write(json.dumps(ref.to_json(), sort_keys=True) + "\n")
                count += 1
    print(f"bugs={summary.accepted} refs={count}")
    return 0


def _cmd_resolve(args: argparse.Namespace) -> int:
    config = backend_config_from_json(json.loads(Path(args.backend).read_text(encoding="utf-8")))
    backend = make_backend(config, base_dir=Path(args.backend).parent)
    resolver = Resolver(backend, parallelism=config.parallelism, disk_cache_path=args.cache)
    refs = [
        ref_from_json(json.loads(line))
        for line in Path(args.refs).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    changes, anomalies = resolver.resolve(refs)
    with open(args.out, "w", encoding="utf-8") as handle:
        for change in changes:
            handle.write(json.dumps(change.to_json(), sort_keys=True) + "\n")
    if args.anomalies:
        with open(args.anomalies, "w", encoding="utf-8") as handle:
            for anomaly in anomalies:
                handle.write(json.dumps(anomaly.to_json(), sort_keys=True) + "\n")
    print(f"resolved={len(changes)} anomalies={len(anomalies)}")
    return 0


def _cmd_map(args: argparse.Namespace) -> int:
    reports, _ = load_corpus(args.corpus, format="jsonl")
    cmap = load_component_map(args.map)
    changes_by_bug: dict[str, list] = {}
    for line in Path(args.changes).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        change = change_from_json(json.loads(line))
        changes_by_bug.setdefault(change.ref.source_bug_id, []).append(change)
    attributions = attribute_bugs(reports, changes_by_bug, cmap)
    with open(args.out, "w", encoding="utf-8") as handle:
        for attribution in attributions:
            handle.write(json.dumps(attribution.to_json(), sort_keys=True) + "\n")
    print(f"attributed={len(attributions)}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    query = CorpusQuery(
        product_ids=frozenset(args.products.split(",")),
        from_ts=parse_utc(getattr(args, "from")),
        to_ts=parse_utc(args.to),
    )
    snapshot = run_job(args.corpus, args.config, query)
    store = SnapshotStore(args.out)
    snapshot_id = store.save(snapshot)
    print(f"snapshot={snapshot_id} bugs={len(snapshot.bugs)} anomalies={len(snapshot.anomalies)}")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    store = SnapshotStore(resolve_data_dir(args.data_dir))
    body = store.export_csv(args.snapshot)
    Path(args.out).write_bytes(body)
    print(f"wrote {args.out} ({len(body)} bytes)")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from multidimer.api import serve

    serve(
        port=args.port,
        data_dir=args.data_dir,
        ui_dir=args.ui_dir,
        schedule_hours=args.schedule_hours,
        schedule_products=args.schedule_products.split(",") if args.schedule_products else None,
    )
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    spec = genspec_from_json(json.loads(Path(args.spec).read_text(encoding="utf-8")))
    generated = generate(spec, args.out)
    totals = generated.manifest["totals"]
    print(
        f"generated {totals['n_bugs']} bugs, {totals['refs_total']} refs "
        f"({totals['broken_refs']} broken) in {generated.out_dir}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multidimer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--report", help="write the ingest report JSON here")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("extract", help="extract commit/change identifiers from answer texts")
    p.add_argument("--input", required=True, help="JSONL corpus")
    p.add_argument("--out", required=True, help="JSONL of extracted refs")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("resolve", help="resolve extracted refs against an SCM backend")
    p.add_argument("--refs", required=True, help="JSONL of refs (extract output)")
    p.add_argument("--backend", required=True, help="backend config JSON")
    p.add_argument("--out", required=True, help="JSONL of resolved changes")
    p.add_argument("--anomalies", help="JSONL of resolution anomalies")
    p.add_argument("--cache", help="on-disk resolution cache path")
    p.set_defaults(func=_cmd_resolve)

    p = sub.add_parser("map", help="attribute bugs to components")
    p.add_argument("--corpus", required=True)
    p.add_argument("--changes", required=True, help="JSONL of resolved changes")
    p.add_argument("--map", required=True, help="component map JSON")
    p.add_argument("--out", required=True, help="JSONL of attributions")
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("analyze", help="run a full analysis job")
    p.add_argument("--corpus", required=True)
    p.add_argument("--products", required=True, help="comma separated product ids")
    p.add_argument("--from", required=True, help="window start (RFC 3339)")
    p.add_argument("--to", required=True, help="window end (RFC 3339), exclusive")
    p.add_argument("--config", required=True, help="config directory")
    p.add_argument("--out", required=True, help="snapshot store root")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("export", help="export a snapshot as CSV")
    p.add_argument("--snapshot", required=True, help="snapshot id")
    p.add_argument("--out", required=True)
    p.add_argument("--data-dir", help="store root (or MULTIDIMER_DATA_DIR)")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="run the REST service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--ui-dir", help="static UI assets to mount under /ui")
    p.add_argument("--schedule-hours", type=float, help="recurring analysis interval")
    p.add_argument("--schedule-products", help="comma separated products for scheduled runs")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("gen", help="generate a synthetic corpus with ground truth")
    p.add_argument("--spec", required=True, help="generator spec JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
