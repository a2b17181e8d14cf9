"""Per-dimension aggregates, heatmap, source tree, cross-tabs and the FST
answer-code validation report, consolidated into immutable snapshots.

Counting rule: a bug holding k values of a multi-valued dimension adds 1 to
each value's count and appears once in each value's drill-down list, so
marginals of multi-valued dimensions may exceed the corpus size.  The
heatmap and cross-tabs count distinct bugs per cell.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Iterable, Mapping, Optional, Sequence

from multidimer.extract import CommitRef, extract_commit_refs
from multidimer.ingest import CorpusQuery, filter_corpus
from multidimer.mapping import Attribution, ComponentMap, attribute_bugs, map_file
from multidimer.model import (
    UNKNOWN,
    AnswerCodeGroup,
    BugReport,
    Dimension,
    Vocabulary,
    classify_answer_code,
    dimension_values,
    format_utc,
    utcnow,
)
from multidimer.scm import ChangeInfo, ResolutionAnomaly


@dataclass(frozen=True)
class AnalyzerConfig:
    release_order: Optional[tuple[str, ...]] = None
    flag_threshold: float = 0.20
    min_answered: int = 5
    internal_phases: Optional[frozenset[str]] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.flag_threshold < 1.0:
            raise ValueError("flag_threshold must be in (0, 1)")

    def to_json(self) -> dict:
        data: dict = {
            "flag_threshold": self.flag_threshold,
            "min_answered": self.min_answered,
        }
        if self.release_order is not None:
            data["release_order"] = list(self.release_order)
        if self.internal_phases is not None:
            data["internal_phases"] = sorted(self.internal_phases)
        return data


def analyzer_config_from_json(data: Mapping[str, object]) -> AnalyzerConfig:
    release_order = data.get("release_order")
    internal = data.get("internal_phases")
    return AnalyzerConfig(
        release_order=tuple(release_order) if release_order is not None else None,
        flag_threshold=float(data.get("flag_threshold", 0.20)),
        min_answered=int(data.get("min_answered", 5)),
        internal_phases=frozenset(internal) if internal is not None else None,
    )


@dataclass(frozen=True)
class FrequencyTable:
    """Rows sorted by count descending, ties by value ascending."""

    dimension: Dimension
    rows: tuple[tuple[str, int, tuple[str, ...]], ...]

    def row(self, value: str) -> Optional[tuple[str, int, tuple[str, ...]]]:
        for row in self.rows:
            if row[0] == value:
                return row
        return None

    def to_payload(self) -> dict:
        return {
            "dimension": self.dimension.value,
            "rows": [
                {"value": value, "count": count, "bug_ids": list(bug_ids)}
                for value, count, bug_ids in self.rows
            ],
        }


@dataclass(frozen=True)
class HeatmapMatrix:
    releases: tuple[str, ...]  # oldest -> newest, UNKNOWN trailing
    components: tuple[str, ...]  # by total count descending, then name
    cells: tuple[tuple[int, ...], ...]
    cell_bug_ids: tuple[tuple[tuple[str, ...], ...], ...]

    def to_payload(self) -> dict:
        return {
            "releases": list(self.releases),
            "components": list(self.components),
            "cells": [list(row) for row in self.cells],
            "cell_bug_ids": [[list(cell) for cell in row] for row in self.cell_bug_ids],
        }


@dataclass(frozen=True)
class SourceTreeNode:
    """Tree node with additive attribution counts.

    ``attributions`` counts (bug, file) pairs in the subtree and is exactly
    the sum over children; ``distinct_bugs`` deduplicates bugs across the
    subtree, so it is at most the sum over children.
    """

    name: str
    attributions: int
    distinct_bugs: int
    children: tuple["SourceTreeNode", ...] = ()

    def to_payload(self, depth: Optional[int] = None) -> dict:
        data: dict = {
            "name": self.name,
            "attributions": self.attributions,
            "distinct_bugs": self.distinct_bugs,
        }
        if depth is not None and depth <= 0:
            data["truncated"] = bool(self.children)
            data["children"] = []
            return data
        data["truncated"] = False
        data["children"] = [
            child.to_payload(None if depth is None else depth - 1) for child in self.children
        ]
        return data


@dataclass(frozen=True)
class CrossTab:
    dim_a: Dimension
    dim_b: Dimension
    row_values: tuple[str, ...]
    col_values: tuple[str, ...]
    cells: tuple[tuple[int, ...], ...]
    cell_bug_ids: tuple[tuple[tuple[str, ...], ...], ...]

    @property
    def name(self) -> str:
        return f"{self.dim_a.value}_x_{self.dim_b.value}"

    def to_payload(self) -> dict:
        return {
            "a": self.dim_a.value,
            "b": self.dim_b.value,
            "row_values": list(self.row_values),
            "col_values": list(self.col_values),
            "cells": [list(row) for row in self.cells],
            "cell_bug_ids": [[list(cell) for cell in row] for row in self.cell_bug_ids],
        }


@dataclass(frozen=True)
class FSTReport:
    """Answer-code group shares plus the detection-phase split.

    ``group_shares`` is None (serialized as "UNDEFINED") when no bug is
    answered; shares otherwise sum to 1 over the four groups.
    """

    group_shares: Optional[Mapping[AnswerCodeGroup, float]]
    flagged: bool
    flag_threshold: float
    per_answerer: tuple[tuple[str, float, int], ...]
    internal_share: Optional[float]
    answered_count: int

    def to_payload(self) -> dict:
        return {
            "group_shares": (
                {group.value: share for group, share in self.group_shares.items()}
                if self.group_shares is not None
                else "UNDEFINED"
            ),
            "flagged": self.flagged,
            "flag_threshold": self.flag_threshold,
            "per_answerer": [
                {"identity": identity, "already_corrected_share": share, "answered": count}
                for identity, share, count in self.per_answerer
            ],
            "internal_share": self.internal_share if self.internal_share is not None else "UNDEFINED",
            "answered_count": self.answered_count,
        }


@dataclass(frozen=True)
class AnalysisSnapshot:
    snapshot_id: str
    query: CorpusQuery
    tables: Mapping[Dimension, FrequencyTable]
    heatmap: HeatmapMatrix
    source_tree: SourceTreeNode
    cross_tabs: Mapping[str, CrossTab]
    fst: FSTReport
    anomalies: tuple[ResolutionAnomaly, ...]
    created_at: datetime
    corpus_fingerprint: str
    axis_orders: Mapping[str, tuple[str, ...]]
    bugs: Mapping[str, dict]

    def to_payload(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "created_at": format_utc(self.created_at),
            "corpus_fingerprint": self.corpus_fingerprint,
            "query": self.query.to_json(),
            "tables": {dim.value: table.to_payload() for dim, table in self.tables.items()},
            "heatmap": self.heatmap.to_payload(),
            "source_tree": self.source_tree.to_payload(),
            "cross_tabs": {name: tab.to_payload() for name, tab in self.cross_tabs.items()},
            "fst": self.fst.to_payload(),
            "anomalies": [anomaly.to_json() for anomaly in self.anomalies],
            "axis_orders": {dim: list(order) for dim, order in self.axis_orders.items()},
            "bugs": {bug_id: record for bug_id, record in sorted(self.bugs.items())},
        }


def _order_keys(reports: Sequence[BugReport]) -> dict[str, tuple[float, str]]:
    # created_at descending, bug_id ascending.
    return {
        report.bug_id: (-report.created_at.timestamp(), report.bug_id) for report in reports
    }


def _sorted_bug_ids(
    bug_ids: Iterable[str], order_keys: Mapping[str, tuple[float, str]]
) -> tuple[str, ...]:
    return tuple(sorted(bug_ids, key=order_keys.__getitem__))


def _values_by_bug(
    reports: Sequence[BugReport],
    attributions_by_bug: Mapping[str, Attribution],
    dim: Dimension,
) -> dict[str, set[str]]:
    return {
        report.bug_id: dimension_values(report, dim, attributions_by_bug.get(report.bug_id))
        for report in reports
    }


def aggregate_dimension(
    reports: Sequence[BugReport],
    attributions: Optional[Iterable[Attribution]],
    dim: Dimension,
) -> FrequencyTable:
    """Frequency table over exactly the values present (UNKNOWN included)."""
    by_bug = {a.bug_id: a for a in attributions} if attributions else {}
    return _aggregate(reports, _values_by_bug(reports, by_bug, dim), dim, _order_keys(reports))


def _aggregate(
    reports: Sequence[BugReport],
    values_by_bug: Mapping[str, set[str]],
    dim: Dimension,
    order_keys: Mapping[str, tuple[float, str]],
) -> FrequencyTable:
    buckets: dict[str, list[str]] = {}
    for report in reports:
        for value in values_by_bug[report.bug_id]:
            buckets.setdefault(value, []).append(report.bug_id)
    rows = [
        (value, len(bug_ids), _sorted_bug_ids(bug_ids, order_keys))
        for value, bug_ids in buckets.items()
    ]
    rows.sort(key=lambda row: (-row[1], row[0]))
    return FrequencyTable(dimension=dim, rows=tuple(rows))


def build_heatmap(
    reports: Sequence[BugReport],
    attributions: Iterable[Attribution],
    release_order: Optional[Sequence[str]] = None,
    _order_keys_cache: Optional[Mapping[str, tuple[float, str]]] = None,
) -> HeatmapMatrix:
    """Distinct attributed bugs per (release, component) cell.

    Releases follow *release_order* (all configured rows kept, zero or
    not); labels outside it collapse into a trailing UNKNOWN row.  Without
    a configured order the observed labels sort ascending.
    """
    by_bug = {a.bug_id: a for a in attributions}
    reports_by_id = {report.bug_id: report for report in reports}
    order_keys = _order_keys_cache if _order_keys_cache is not None else _order_keys(reports)

    if release_order is None:
        observed = {report.release for report in reports if report.release}
        releases = sorted(observed)
    else:
        releases = [label for label in release_order]
    known = set(releases)

    def release_bucket(report: BugReport) -> str:
        return report.release if report.release in known else UNKNOWN

    cell_sets: dict[tuple[str, str], set[str]] = {}
    component_totals: dict[str, int] = {}
    needs_unknown = False
    for bug_id, attribution in by_bug.items():
        report = reports_by_id.get(bug_id)
        if report is None:
            continue
        release = release_bucket(report)
        if release == UNKNOWN:
            needs_unknown = True
        for component in attribution.components:
            cell_sets.setdefault((release, component), set()).add(bug_id)
            component_totals[component] = component_totals.get(component, 0) + 1
    if needs_unknown:
        releases = releases + [UNKNOWN]

    components = sorted(component_totals, key=lambda name: (-component_totals[name], name))
    cells = []
    cell_bug_ids = []
    for release in releases:
        row_counts = []
        row_ids = []
        for component in components:
            bugs = cell_sets.get((release, component), set())
            row_counts.append(len(bugs))
            row_ids.append(_sorted_bug_ids(bugs, order_keys))
        cells.append(tuple(row_counts))
        cell_bug_ids.append(tuple(row_ids))
    return HeatmapMatrix(
        releases=tuple(releases),
        components=tuple(components),
        cells=tuple(cells),
        cell_bug_ids=tuple(cell_bug_ids),
    )


def build_source_tree(attributions: Iterable[Attribution], product_label: str) -> SourceTreeNode:
    """Tree keyed product -> repository -> path segments -> file, counting
    (bug, file) attributions additively and distinct bugs per subtree."""

    class _Node:
        __slots__ = ("children", "bugs", "direct")

        def __init__(self) -> None:
            self.children: dict[str, _Node] = {}
            self.bugs: set[str] = set()
            self.direct = 0

    root = _Node()
    for attribution in attributions:
        for repo, path in attribution.files:
            segments = [repo] + path.split("/")
            node = root
            node.bugs.add(attribution.bug_id)
            for segment in segments:
                node = node.children.setdefault(segment, _Node())
                node.bugs.add(attribution.bug_id)
            node.direct += 1

    def freeze(name: str, node: _Node) -> SourceTreeNode:
        children = tuple(freeze(child, node.children[child]) for child in sorted(node.children))
        attributions_total = node.direct + sum(child.attributions for child in children)
        return SourceTreeNode(
            name=name,
            attributions=attributions_total,
            distinct_bugs=len(node.bugs),
            children=children,
        )

    return freeze(product_label, root)


def axis_order(
    values_by_bug: Mapping[str, set[str]], preferred: Optional[Sequence[str]] = None
) -> tuple[str, ...]:
    """Presentation order for one cross-tab axis: the configured order where
    given (severity, release), frequency order for the rest."""
    counts: dict[str, int] = {}
    for values in values_by_bug.values():
        for value in values:
            counts[value] = counts.get(value, 0) + 1
    if preferred:
        head = [value for value in preferred if value in counts]
        tail = sorted((v for v in counts if v not in set(preferred)), key=lambda v: (-counts[v], v))
        return tuple(head + tail)
    return tuple(sorted(counts, key=lambda v: (-counts[v], v)))


def cross_tab(
    reports: Sequence[BugReport],
    attributions: Optional[Iterable[Attribution]],
    dim_a: Dimension,
    dim_b: Dimension,
    order_a: Optional[Sequence[str]] = None,
    order_b: Optional[Sequence[str]] = None,
    _values_a: Optional[Mapping[str, set[str]]] = None,
    _values_b: Optional[Mapping[str, set[str]]] = None,
    _order_keys_cache: Optional[Mapping[str, tuple[float, str]]] = None,
) -> CrossTab:
    """Distinct bugs per (value-a, value-b) pair; multi-valued dimensions
    contribute to every held value."""
    if dim_a == dim_b:
        raise ValueError("cross_tab needs two different dimensions")
    by_bug = {a.bug_id: a for a in attributions} if attributions else {}
    values_a = _values_a if _values_a is not None else _values_by_bug(reports, by_bug, dim_a)
    values_b = _values_b if _values_b is not None else _values_by_bug(reports, by_bug, dim_b)
    order_keys = _order_keys_cache if _order_keys_cache is not None else _order_keys(reports)

    row_values = tuple(order_a) if order_a is not None else axis_order(values_a)
    col_values = tuple(order_b) if order_b is not None else axis_order(values_b)
    cell_sets: dict[tuple[str, str], set[str]] = {}
    for report in reports:
        for value_a in values_a[report.bug_id]:
            for value_b in values_b[report.bug_id]:
                cell_sets.setdefault((value_a, value_b), set()).add(report.bug_id)
    cells = []
    cell_bug_ids = []
    for value_a in row_values:
        row_counts = []
        row_ids = []
        for value_b in col_values:
            bugs = cell_sets.get((value_a, value_b), set())
            row_counts.append(len(bugs))
            row_ids.append(_sorted_bug_ids(bugs, order_keys))
        cells.append(tuple(row_counts))
        cell_bug_ids.append(tuple(row_ids))
    return CrossTab(
        dim_a=dim_a,
        dim_b=dim_b,
        row_values=row_values,
        col_values=col_values,
        cells=tuple(cells),
        cell_bug_ids=tuple(cell_bug_ids),
    )


def fst_validation(
    reports: Sequence[BugReport],
    vocabulary: Vocabulary,
    flag_threshold: float = 0.20,
    min_answered: int = 5,
    internal_phases: Optional[frozenset[str]] = None,
) -> FSTReport:
    """Group shares over answered bugs plus the per-answerer breakdown and
    the internally-detected share.

    A bug is answered when it carries an answer code.  With zero answered
    bugs the shares are undefined (never fabricated from 0/0) and the flag
    stays down.
    """
    if internal_phases is None:
        internal_phases = vocabulary.internal_phases
    table = vocabulary.answer_code_groups
    answered = [report for report in reports if report.answer_code]
    answered_count = len(answered)

    group_shares: Optional[dict[AnswerCodeGroup, float]] = None
    flagged = False
    per_answerer: list[tuple[str, float, int]] = []
    if answered_count:
        group_counts = {group: 0 for group in AnswerCodeGroup}
        by_answerer: dict[str, list[AnswerCodeGroup]] = {}
        for report in answered:
            group = classify_answer_code(report.answer_code, table)
            group_counts[group] += 1
            by_answerer.setdefault(report.answered_by or UNKNOWN, []).append(group)
        group_shares = {group: count / answered_count for group, count in group_counts.items()}
        flagged = group_shares[AnswerCodeGroup.ALREADY_CORRECTED] > flag_threshold
        for identity, groups in by_answerer.items():
            if len(groups) < min_answered:
                continue
            share = groups.count(AnswerCodeGroup.ALREADY_CORRECTED) / len(groups)
            per_answerer.append((identity, share, len(groups)))
        per_answerer.sort(key=lambda item: (-item[1], -item[2], item[0]))

    internal_share: Optional[float] = None
    if reports:
        internal = sum(
            1 for report in reports if report.detection_phase in internal_phases
        )
        internal_share = internal / len(reports)
    return FSTReport(
        group_shares=group_shares,
        flagged=flagged,
        flag_threshold=flag_threshold,
        per_answerer=tuple(per_answerer),
        internal_share=internal_share,
        answered_count=answered_count,
    )


#: Cross-tab pairs materialized in every snapshot.
DEFAULT_CROSS_TABS = (
    (Dimension.SEVERITY, Dimension.COMPONENT),
    (Dimension.SEVERITY, Dimension.DETECTION_PHASE),
)


def _canonical(data: object) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _report_digest_line(report: BugReport) -> bytes:
    fields = (
        report.bug_id,
        report.product_id,
        report.release,
        report.title,
        report.observation_text,
        report.answer_text,
        report.answer_code or "",
        report.severity or "",
        report.status or "",
        report.detection_phase or "",
        report.country or "",
        report.customer or "",
        "\x1d".join(report.document_refs),
        report.created_at.isoformat(),
        report.answered_by or "",
        report.tracker_url or "",
    )
    return "\x1f".join(fields).encode("utf-8") + b"\x1e"


def corpus_fingerprint(
    reports: Sequence[BugReport],
    vocabulary: Vocabulary,
    component_map: ComponentMap,
    config: AnalyzerConfig,
) -> str:
    """Content hash of the analyzed corpus plus the configs that shape it."""
    digest = hashlib.sha256()
    for report in reports:
        digest.update(_report_digest_line(report))
    digest.update(_canonical(vocabulary.to_json()))
    digest.update(_canonical(component_map.to_json()))
    digest.update(_canonical(config.to_json()))
    return digest.hexdigest()


def _axis_preferred(
    dim: Dimension, vocabulary: Vocabulary, config: AnalyzerConfig
) -> Optional[Sequence[str]]:
    if dim is Dimension.SEVERITY and vocabulary.severities:
        return vocabulary.severities
    if dim is Dimension.RELEASE and config.release_order is not None:
        return config.release_order
    return None


def run_analysis(
    corpus: Sequence[BugReport],
    query: CorpusQuery,
    vocabulary: Vocabulary,
    component_map: ComponentMap,
    config: AnalyzerConfig,
    resolver,
    clock: Callable[[], datetime] = utcnow,
) -> AnalysisSnapshot:
    """Orchestrate filter -> extract -> resolve -> map -> aggregate.

    Deterministic given the corpus fingerprint and configs; SCM anomalies
    are recorded in the snapshot, never fatal.
    """
    reports = filter_corpus(corpus, query)

    refs_by_bug: dict[str, list[CommitRef]] = {}
    all_refs: list[CommitRef] = []
    for report in reports:
        refs = extract_commit_refs(report.answer_text, report.bug_id)
        refs_by_bug[report.bug_id] = refs
        all_refs.extend(refs)

    changes, anomalies = resolver.resolve(all_refs)
    payload_by_key: dict = {change.ref.key: change for change in changes}
    changes_by_bug: dict[str, list[ChangeInfo]] = {}
    for report in reports:
        resolved = [
            payload_by_key[ref.key] for ref in refs_by_bug[report.bug_id] if ref.key in payload_by_key
        ]
        if resolved:
            changes_by_bug[report.bug_id] = resolved

    attributions = attribute_bugs(reports, changes_by_bug, component_map)
    by_bug = {a.bug_id: a for a in attributions}

    order_keys = _order_keys(reports)
    values_by_dim = {
        dim: _values_by_bug(reports, by_bug, dim) for dim in Dimension
    }
    tables = {
        dim: _aggregate(reports, values_by_dim[dim], dim, order_keys) for dim in Dimension
    }
    heatmap = build_heatmap(
        reports, attributions, config.release_order, _order_keys_cache=order_keys
    )
    product_label = ",".join(sorted(query.product_ids))
    source_tree = build_source_tree(attributions, product_label)

    axis_orders = {
        dim.value: axis_order(values_by_dim[dim], _axis_preferred(dim, vocabulary, config))
        for dim in Dimension
    }
    cross_tabs = {}
    for dim_a, dim_b in DEFAULT_CROSS_TABS:
        tab = cross_tab(
            reports,
            attributions,
            dim_a,
            dim_b,
            order_a=axis_orders[dim_a.value],
            order_b=axis_orders[dim_b.value],
            _values_a=values_by_dim[dim_a],
            _values_b=values_by_dim[dim_b],
            _order_keys_cache=order_keys,
        )
        cross_tabs[tab.name] = tab

    fst = fst_validation(
        reports,
        vocabulary,
        flag_threshold=config.flag_threshold,
        min_answered=config.min_answered,
        internal_phases=config.internal_phases,
    )

    bugs: dict[str, dict] = {}
    for report in reports:
        attribution = by_bug.get(report.bug_id)
        files = []
        if attribution is not None:
            for repo, path in sorted(attribution.files):
                files.append([repo, path, map_file(repo, path, component_map)])
        bugs[report.bug_id] = {
            "bug_id": report.bug_id,
            "product_id": report.product_id,
            "release": report.release,
            "title": report.title,
            "severity": report.severity,
            "status": report.status,
            "detection_phase": report.detection_phase,
            "answer_code": report.answer_code,
            "answer_group": classify_answer_code(report.answer_code, vocabulary.answer_code_groups).value,
            "country": report.country,
            "customer": report.customer,
            "document_refs": list(report.document_refs),
            "commit_refs": [ref.value for ref in refs_by_bug[report.bug_id]],
            "created_at": format_utc(report.created_at),
            "answered_by": report.answered_by,
            "tracker_url": report.tracker_url,
            "components": sorted(attribution.components) if attribution else [],
            "files": files,
        }

    fingerprint = corpus_fingerprint(reports, vocabulary, component_map, config)
    snapshot_id = hashlib.sha256(
        fingerprint.encode()
        + _canonical(query.to_json())
        + _canonical(config.to_json())
    ).hexdigest()[:16]

    return AnalysisSnapshot(
        snapshot_id=snapshot_id,
        query=query,
        tables=tables,
        heatmap=heatmap,
        source_tree=source_tree,
        cross_tabs=cross_tabs,
        fst=fst,
        anomalies=tuple(anomalies),
        created_at=clock(),
        corpus_fingerprint=fingerprint,
        axis_orders={dim: tuple(order) for dim, order in axis_orders.items()},
        bugs=bugs,
    )
