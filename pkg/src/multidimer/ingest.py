"""Load bug-report corpora from canonical export files and filter them.

The canonical interchange format is JSONL (one record per line, field names
matching BugReport).  The CSV variant reads back the consolidated export
produced by the snapshot store; rows of one bug collapse into a single
record and derived columns are ignored.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional

from multidimer.model import (
    BugReport,
    ModelError,
    Vocabulary,
    format_utc,
    parse_utc,
    report_from_record,
)


class IngestError(Exception):
    """Fatal ingest failure (unreadable file, unusable header)."""


@dataclass(frozen=True)
class CorpusQuery:
    """Product and half-open time-window selection: [from_ts, to_ts)."""

    product_ids: frozenset[str]
    from_ts: datetime
    to_ts: datetime

    def __post_init__(self) -> None:
        if not self.product_ids:
            raise ModelError("query needs at least one product id")
        if not self.from_ts < self.to_ts:
            raise ModelError("query window is empty: from must precede to")

    def to_json(self) -> dict:
        return {
            "product_ids": sorted(self.product_ids),
            "from": format_utc(self.from_ts),
            "to": format_utc(self.to_ts),
        }


def query_from_json(data: dict) -> CorpusQuery:
    ids = data.get("product_ids")
    if not isinstance(ids, (list, tuple)) or not all(isinstance(p, str) for p in ids):
        raise ModelError("product_ids must be a list of strings")
    return CorpusQuery(
        product_ids=frozenset(ids),
        from_ts=parse_utc(data.get("from")),
        to_ts=parse_utc(data.get("to")),
    )


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    rejection_reasons: list[tuple[str, str]] = field(default_factory=list)

    def reject(self, locator: str, reason: str) -> None:
        self.rejected += 1
        self.rejection_reasons.append((locator, reason))

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "rejection_reasons": [
                {"locator": loc, "reason": reason} for loc, reason in self.rejection_reasons
            ],
        }


def load_corpus(
    path: Path | str,
    format: str = "jsonl",
    vocabulary: Optional[Vocabulary] = None,
) -> tuple[list[BugReport], IngestReport]:
    """Read a corpus file; malformed records become rejection entries,
    an unreadable file is fatal.

    Accepted records keep file order and satisfy all BugReport invariants
    (including bug_id uniqueness within the corpus).
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read corpus {path}: {exc}") from exc
    if format == "jsonl":
        return _load_jsonl(raw, vocabulary)
    if format == "csv":
        return _load_csv(raw, vocabulary)
    raise IngestError(f"unsupported corpus format {format!r}")


def _validate(report: BugReport, vocabulary: Optional[Vocabulary]) -> None:
    if vocabulary and vocabulary.severities and report.severity is not None:
        if report.severity not in vocabulary.severities:
            raise ModelError(f"severity {report.severity!r} not in configured set")


def _load_jsonl(raw: str, vocabulary: Optional[Vocabulary]) -> tuple[list[BugReport], IngestReport]:
    reports: list[BugReport] = []
    seen: set[str] = set()
    summary = IngestReport()
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        locator = f"line {lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            summary.reject(locator, f"invalid JSON: {exc.msg}")
            continue
        try:
            report = report_from_record(record)
            _validate(report, vocabulary)
        except ModelError as exc:
            summary.reject(locator, str(exc))
            continue
        if report.bug_id in seen:
            summary.reject(locator, f"duplicate bug_id {report.bug_id!r}")
            continue
        seen.add(report.bug_id)
        reports.append(report)
        summary.accepted += 1
    return reports, summary


# Columns of the consolidated CSV export (see store.export_csv).  The bug
# text fields are not part of the export, so CSV round-trips carry the
# dimension attributes only.
CSV_COLUMNS = (
    "bug_id",
    "product_id",
    "release",
    "component",
    "repository",
    "file_count",
    "detection_phase",
    "answer_code",
    "answer_group",
    "severity",
    "status",
    "country",
    "customer",
    "document_refs",
    "commit_refs",
    "created_at",
)

_CSV_SCALARS = (
    "product_id",
    "release",
    "detection_phase",
    "answer_code",
    "severity",
    "status",
    "country",
    "customer",
    "document_refs",
    "created_at",
)


def _load_csv(raw: str, vocabulary: Optional[Vocabulary]) -> tuple[list[BugReport], IngestReport]:
    reader = csv.DictReader(io.StringIO(raw))
    if reader.fieldnames is None:
        return [], IngestReport()
    missing = set(CSV_COLUMNS) - set(reader.fieldnames)
    if missing:
        raise IngestError(f"csv header missing columns: {', '.join(sorted(missing))}")

    # One bug spans one CSV row per attributed component; collapse them.
    rows_by_bug: dict[str, list[tuple[int, dict]]] = {}
    order: list[str] = []
    summary = IngestReport()
    for rowno, row in enumerate(reader, start=2):
        bug_id = row.get("bug_id") or ""
        if not bug_id:
            summary.reject(f"row {rowno}", "missing bug_id")
            continue
        rows_by_bug.setdefault(bug_id, []).append((rowno, row))
        if len(rows_by_bug[bug_id]) == 1:
            order.append(bug_id)

    reports: list[BugReport] = []
    for bug_id in order:
        rows = rows_by_bug[bug_id]
        rowno, first = rows[0]
        locator = f"row {rowno}"
        conflict = next(
            (
                name
                for _, other in rows[1:]
                for name in _CSV_SCALARS
                if other.get(name) != first.get(name)
            ),
            None,
        )
        if conflict is not None:
            summary.reject(locator, f"conflicting {conflict} across rows of {bug_id!r}")
            continue
        record = {
            "bug_id": bug_id,
            "product_id": first.get("product_id") or "",
            "release": first.get("release") or "",
            "title": "",
            "observation_text": "",
            "answer_text": "",
            "answer_code": first.get("answer_code") or None,
            "severity": first.get("severity") or None,
            "status": first.get("status") or None,
            "detection_phase": first.get("detection_phase") or None,
            "country": first.get("country") or None,
            "customer": first.get("customer") or None,
            "document_refs": [d for d in (first.get("document_refs") or "").split(";") if d],
            "created_at": first.get("created_at") or "",
        }
        try:
            report = report_from_record(record)
            _validate(report, vocabulary)
        except ModelError as exc:
            summary.reject(locator, str(exc))
            continue
        reports.append(report)
        summary.accepted += 1
    return reports, summary


def filter_corpus(reports: Iterable[BugReport], query: CorpusQuery) -> list[BugReport]:
    """Product and half-open window filter; preserves relative order."""
    return [
        report
        for report in reports
        if report.product_id in query.product_ids
        and query.from_ts <= report.created_at < query.to_ts
    ]


def dump_corpus(reports: Iterable[BugReport], path: Path | str) -> None:
    """Write reports in the canonical JSONL schema."""
    with open(path, "w", encoding="utf-8") as handle:
        for report in reports:
            handle.write(json.dumps(report.to_record(), sort_keys=True) + "\n")
