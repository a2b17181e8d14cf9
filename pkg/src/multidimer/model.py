"""Canonical bug-report types, classification vocabularies and dimension accessors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

#: Bucket for absent or unconfigured attribute values.  Aggregations never
#: drop a bug silently; anything missing lands here.
UNKNOWN = "UNKNOWN"

#: Sentinel component for resolved changes that matched neither mapping table.
UNMAPPED = "UNMAPPED"


class AnswerCodeGroup(str, Enum):
    ALREADY_CORRECTED = "ALREADY_CORRECTED"
    WILL_BE_CORRECTED = "WILL_BE_CORRECTED"
    NO_ACTION = "NO_ACTION"
    UNKNOWN = "UNKNOWN"


class Dimension(str, Enum):
    """The ten classification dimensions."""

    COMPONENT = "COMPONENT"
    SOURCE_FILE = "SOURCE_FILE"
    ANSWER_CODE = "ANSWER_CODE"
    COUNTRY = "COUNTRY"
    CUSTOMER = "CUSTOMER"
    DETECTION_PHASE = "DETECTION_PHASE"
    DOCUMENT = "DOCUMENT"
    RELEASE = "RELEASE"
    SEVERITY = "SEVERITY"
    STATUS = "STATUS"


#: Dimensions where every bug holds exactly one value, so row counts add up
#: to the corpus size.
SINGLE_VALUED_DIMENSIONS = frozenset(
    {
        Dimension.ANSWER_CODE,
        Dimension.COUNTRY,
        Dimension.CUSTOMER,
        Dimension.DETECTION_PHASE,
        Dimension.RELEASE,
        Dimension.SEVERITY,
        Dimension.STATUS,
    }
)


class ModelError(ValueError):
    """Invalid record or configuration content."""


def parse_utc(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime.

    Accepts a trailing ``Z`` or an explicit offset; naive timestamps are
    rejected.
    """
    if not isinstance(value, str) or not value:
        raise ModelError("timestamp must be a non-empty string")
    text = value[:-1] + "+00:00" if value.endswith(("Z", "z")) else value
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ModelError(f"bad timestamp {value!r}: {exc}") from None
    if parsed.tzinfo is None:
        raise ModelError(f"timestamp {value!r} has no UTC offset")
    return parsed.astimezone(timezone.utc)


def format_utc(ts: datetime) -> str:
    """Render a UTC timestamp in the canonical RFC 3339 ``Z`` form."""
    if ts.tzinfo is not timezone.utc:
        ts = ts.astimezone(timezone.utc)
    text = ts.isoformat()
    if text.endswith("+00:00"):
        return text[:-6] + "Z"
    return text + "Z"


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class BugReport:
    """One tracker record with all dimension attributes.

    Optional attributes are ``None`` when absent; aggregation maps them to
    the UNKNOWN bucket.
    """

    bug_id: str
    product_id: str
    release: str
    title: str
    observation_text: str
    answer_text: str
    created_at: datetime
    answer_code: Optional[str] = None
    severity: Optional[str] = None
    status: Optional[str] = None
    detection_phase: Optional[str] = None
    country: Optional[str] = None
    customer: Optional[str] = None
    document_refs: tuple[str, ...] = ()
    answered_by: Optional[str] = None
    tracker_url: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.bug_id:
            raise ModelError("missing bug_id")
        if self.created_at.tzinfo is None:
            raise ModelError("created_at must be timezone-aware UTC")

    def to_record(self) -> dict:
        """Serialize to the canonical JSONL record."""
        return {
            "bug_id": self.bug_id,
            "product_id": self.product_id,
            "release": self.release,
            "title": self.title,
            "observation_text": self.observation_text,
            "answer_text": self.answer_text,
            "answer_code": self.answer_code,
            "severity": self.severity,
            "status": self.status,
            "detection_phase": self.detection_phase,
            "country": self.country,
            "customer": self.customer,
            "document_refs": list(self.document_refs),
            "created_at": format_utc(self.created_at),
            "answered_by": self.answered_by,
            "tracker_url": self.tracker_url,
        }


_REQUIRED_STR_FIELDS = ("bug_id", "product_id", "release", "title", "observation_text", "answer_text")
_OPTIONAL_STR_FIELDS = (
    "answer_code",
    "severity",
    "status",
    "detection_phase",
    "country",
    "customer",
    "answered_by",
    "tracker_url",
)
_KNOWN_FIELDS = frozenset(_REQUIRED_STR_FIELDS + _OPTIONAL_STR_FIELDS + ("document_refs", "created_at"))


def report_from_record(record: Mapping[str, object]) -> BugReport:
    """Build a BugReport from a canonical record, validating strictly.

    The only coercions are timestamp parsing and normalising empty optional
    strings to absent.
    """
    if not isinstance(record, Mapping):
        raise ModelError("record must be an object")
    unknown = set(record) - _KNOWN_FIELDS
    if unknown:
        raise ModelError(f"unknown fields: {', '.join(sorted(unknown))}")
    values: dict = {}
    for name in _REQUIRED_STR_FIELDS:
        value = record.get(name)
        if name == "bug_id" and not value:
            raise ModelError("missing bug_id")
        if value is None:
            value = ""
        if not isinstance(value, str):
            raise ModelError(f"field {name} must be a string")
        values[name] = value
    for name in _OPTIONAL_STR_FIELDS:
        value = record.get(name)
        if value is not None and not isinstance(value, str):
            raise ModelError(f"field {name} must be a string or null")
        values[name] = value or None
    docs = record.get("document_refs") or []
    if not isinstance(docs, (list, tuple)) or not all(isinstance(d, str) for d in docs):
        raise ModelError("document_refs must be a list of strings")
    values["document_refs"] = tuple(docs)
    if "created_at" not in record:
        raise ModelError("missing created_at")
    values["created_at"] = parse_utc(record["created_at"])  # type: ignore[arg-type]
    return BugReport(**values)


def classify_answer_code(
    code: Optional[str], table: Mapping[str, AnswerCodeGroup]
) -> AnswerCodeGroup:
    """Map a raw answer code onto its group; absent or unconfigured codes
    fall into UNKNOWN.  Total: never raises."""
    if not code:
        return AnswerCodeGroup.UNKNOWN
    return table.get(code, AnswerCodeGroup.UNKNOWN)


def dimension_values(report: BugReport, dim: Dimension, attribution=None) -> set[str]:
    """All values the report holds in a dimension; never empty.

    COMPONENT and SOURCE_FILE read the supplied attribution (an object with
    ``components`` and ``files``); a bug without one falls into UNKNOWN.
    """
    if dim is Dimension.COMPONENT:
        if attribution is not None and attribution.components:
            return set(attribution.components)
        return {UNKNOWN}
    if dim is Dimension.SOURCE_FILE:
        if attribution is not None and attribution.files:
            return {f"{repo}/{path}" for repo, path in attribution.files}
        return {UNKNOWN}
    if dim is Dimension.DOCUMENT:
        return set(report.document_refs) if report.document_refs else {UNKNOWN}
    if dim is Dimension.ANSWER_CODE:
        scalar = report.answer_code
    elif dim is Dimension.COUNTRY:
        scalar = report.country
    elif dim is Dimension.CUSTOMER:
        scalar = report.customer
    elif dim is Dimension.DETECTION_PHASE:
        scalar = report.detection_phase
    elif dim is Dimension.RELEASE:
        scalar = report.release
    elif dim is Dimension.SEVERITY:
        scalar = report.severity
    elif dim is Dimension.STATUS:
        scalar = report.status
    else:
        raise ValueError(f"unhandled dimension {dim}")
    return {scalar} if scalar else {UNKNOWN}


@dataclass(frozen=True)
class Vocabulary:
    """Config-supplied classification vocabularies.

    The tracker's raw codes are site-specific, so every vocabulary comes
    from configuration and anything outside it maps to UNKNOWN.
    """

    answer_code_groups: Mapping[str, AnswerCodeGroup] = field(default_factory=dict)
    severities: tuple[str, ...] = ()  # most severe first
    detection_phases: tuple[str, ...] = ()
    internal_phases: frozenset[str] = frozenset()
    statuses: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.severities)) != len(self.severities):
            raise ModelError("severities must be unique")
        stray = self.internal_phases - set(self.detection_phases)
        if stray:
            raise ModelError(f"internal_phases not in detection_phases: {sorted(stray)}")
        for code, group in self.answer_code_groups.items():
            if group is AnswerCodeGroup.UNKNOWN:
                raise ModelError(f"answer code {code!r} may not map to UNKNOWN")

    def to_json(self) -> dict:
        return {
            "answer_code_groups": {c: g.value for c, g in sorted(self.answer_code_groups.items())},
            "severities": list(self.severities),
            "detection_phases": list(self.detection_phases),
            "internal_phases": sorted(self.internal_phases),
            "statuses": list(self.statuses),
        }


def vocabulary_from_json(data: Mapping[str, object]) -> Vocabulary:
    try:
        groups = {
            str(code): AnswerCodeGroup(group)
            for code, group in dict(data.get("answer_code_groups") or {}).items()
        }
    except ValueError as exc:
        raise ModelError(f"bad answer code group: {exc}") from None
    return Vocabulary(
        answer_code_groups=groups,
        severities=tuple(data.get("severities") or ()),
        detection_phases=tuple(data.get("detection_phases") or ()),
        internal_phases=frozenset(data.get("internal_phases") or ()),
        statuses=tuple(data.get("statuses") or ()),
    )


def load_vocabulary(path: Path | str) -> Vocabulary:
    with open(path, encoding="utf-8") as handle:
        return vocabulary_from_json(json.load(handle))
