"""Deterministic synthetic corpus generator with ground-truth manifests.

Stands in for the unreachable production tracker: emits a bug corpus, the
SCM fixtures resolving its planted identifiers, a matching component map,
and a manifest recording the exact planted truth per bug.  Share-type
fields (internal share, answer groups, ...) are realized by exact quota
with largest-remainder rounding, never by independent sampling, so
acceptance tests can assert equalities.

All randomness flows from a single splitmix64 stream (documented, fixed;
integer arithmetic only) to keep output byte-identical across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Mapping, Sequence

from multidimer.model import AnswerCodeGroup, ModelError, format_utc, parse_utc

_MASK64 = (1 << 64) - 1
_WEIGHT_SCALE = 1_000_000_000


class SplitMix64:
    """splitmix64: the single PRNG behind corpus generation."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, items: Sequence):
        return items[self.randbelow(len(items))]

    def hex_chars(self, length: int) -> str:
        chunks = []
        remaining = length
        while remaining > 0:
            chunks.append(f"{self.next_u64():016x}"[: min(16, remaining)])
            remaining -= 16
        return "".join(chunks)


def quota_counts(weights: Sequence[tuple], n: int) -> dict:
    """Largest-remainder apportionment of n over weighted keys, in integer
    arithmetic; ties break by key position."""
    scaled = [(key, round(weight * _WEIGHT_SCALE)) for key, weight in weights]
    total = sum(s for _, s in scaled)
    if total <= 0:
        raise ModelError("weights must sum to a positive value")
    counts = {}
    remainders = []
    for index, (key, s) in enumerate(scaled):
        share, remainder = divmod(n * s, total)
        counts[key] = share
        remainders.append((-remainder, index, key))
    leftover = n - sum(counts.values())
    for _, _, key in sorted(remainders)[:leftover]:
        counts[key] += 1
    return counts


def _check_weights(name: str, weights: Mapping) -> None:
    if not weights:
        raise ModelError(f"{name} must not be empty")
    total = 0.0
    for key, value in weights.items():
        if value < 0:
            raise ModelError(f"{name}[{key!r}] is negative")
        total += value
    if abs(total - 1.0) > 1e-9:
        raise ModelError(f"{name} weights sum to {total}, expected 1")


def _check_share(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ModelError(f"{name} must be within [0, 1]")


_DEFAULT_RELEASES = {"R1": 0.25, "R2": 0.35, "R3": 0.40}
_DEFAULT_COMPONENTS = {
    "Docs": 0.25,
    "Platform": 0.20,
    "Core": 0.20,
    "UI": 0.15,
    "Billing": 0.12,
    "Messaging": 0.08,
}
_DEFAULT_GROUPS = {
    AnswerCodeGroup.ALREADY_CORRECTED.value: 0.15,
    AnswerCodeGroup.WILL_BE_CORRECTED.value: 0.65,
    AnswerCodeGroup.NO_ACTION.value: 0.20,
}
#: Raw tracker codes per answer group (vocabulary emitted next to the corpus).
GROUP_CODES = {
    AnswerCodeGroup.ALREADY_CORRECTED.value: ("AC1", "AC2"),
    AnswerCodeGroup.WILL_BE_CORRECTED.value: ("WC1", "WC2", "WC3"),
    AnswerCodeGroup.NO_ACTION.value: ("NA1", "NA2"),
}


@dataclass(frozen=True)
class GenSpec:
    """Generator parameters.

    Weight-map order is semantic: it breaks quota-rounding ties, seeds the
    assignment order, and for ``releases`` encodes oldest-to-newest.  Keep
    JSON specs in the intended order (parsers preserve object order).
    """

    seed: int
    n_bugs: int
    product_id: str = "P1"
    start: str = "2025-01-01T00:00:00Z"
    window_days: int = 300
    releases: Mapping[str, float] = field(default_factory=lambda: dict(_DEFAULT_RELEASES))
    components: Mapping[str, float] = field(default_factory=lambda: dict(_DEFAULT_COMPONENTS))
    multiplicity: Mapping[int, float] = field(
        default_factory=lambda: {1: 0.75, 2: 0.20, 3: 0.05}
    )
    ref_share: float = 0.70
    broken_ref_rate: float = 0.0
    answered_share: float = 0.90
    answer_groups: Mapping[str, float] = field(default_factory=lambda: dict(_DEFAULT_GROUPS))
    internal_share: float = 0.83
    severities: Mapping[str, float] = field(default_factory=lambda: {"A": 0.2, "B": 0.5, "C": 0.3})
    statuses: Mapping[str, float] = field(
        default_factory=lambda: {"Open": 0.3, "Answered": 0.5, "Closed": 0.2}
    )
    countries: Mapping[str, float] = field(
        default_factory=lambda: {"SE": 0.35, "DE": 0.25, "US": 0.20, "JP": 0.10, "": 0.10}
    )
    customers: Mapping[str, float] = field(
        default_factory=lambda: {"ACME": 0.4, "Globex": 0.3, "Initech": 0.15, "": 0.15}
    )
    documents: Mapping[int, float] = field(default_factory=lambda: {0: 0.6, 1: 0.3, 2: 0.1})
    internal_phases: Mapping[str, float] = field(
        default_factory=lambda: {"function-test": 0.45, "system-test": 0.35, "integration-test": 0.20}
    )
    external_phases: Mapping[str, float] = field(default_factory=lambda: {"customer": 1.0})
    answerers: tuple[str, ...] = ("dag", "elin", "farid", "greta", "henrik", "ines", "jonas", "klara")
    files_per_component: int = 12
    files_per_ref: Mapping[int, float] = field(default_factory=lambda: {1: 0.55, 2: 0.30, 3: 0.15})
    distractor_rate: float = 0.5

    def __post_init__(self) -> None:
        if self.n_bugs < 0:
            raise ModelError("n_bugs must be non-negative")
        for name in ("releases", "components", "multiplicity", "answer_groups", "severities",
                     "statuses", "countries", "customers", "documents", "internal_phases",
                     "external_phases", "files_per_ref"):
            _check_weights(name, getattr(self, name))
        for name in ("ref_share", "broken_ref_rate", "answered_share", "internal_share",
                     "distractor_rate"):
            _check_share(name, getattr(self, name))
        positive_components = sum(1 for weight in self.components.values() if weight > 0)
        if max(self.multiplicity) > positive_components:
            raise ModelError("multiplicity exceeds the weighted component universe")
        unknown_groups = set(self.answer_groups) - set(GROUP_CODES)
        if unknown_groups:
            raise ModelError(f"unknown answer groups: {sorted(unknown_groups)}")
        if not self.answerers:
            raise ModelError("answerers must not be empty")

    def to_json(self) -> dict:
        data = {
            "seed": self.seed,
            "n_bugs": self.n_bugs,
            "product_id": self.product_id,
            "start": self.start,
            "window_days": self.window_days,
            "releases": dict(self.releases),
            "components": dict(self.components),
            "multiplicity": {str(k): v for k, v in self.multiplicity.items()},
            "ref_share": self.ref_share,
            "broken_ref_rate": self.broken_ref_rate,
            "answered_share": self.answered_share,
            "answer_groups": dict(self.answer_groups),
            "internal_share": self.internal_share,
            "severities": dict(self.severities),
            "statuses": dict(self.statuses),
            "countries": dict(self.countries),
            "customers": dict(self.customers),
            "documents": {str(k): v for k, v in self.documents.items()},
            "internal_phases": dict(self.internal_phases),
            "external_phases": dict(self.external_phases),
            "answerers": list(self.answerers),
            "files_per_component": self.files_per_component,
            "files_per_ref": {str(k): v for k, v in self.files_per_ref.items()},
            "distractor_rate": self.distractor_rate,
        }
        return data


def genspec_from_json(data: Mapping) -> GenSpec:
    kwargs = dict(data)
    for int_keyed in ("multiplicity", "documents", "files_per_ref"):
        if int_keyed in kwargs:
            kwargs[int_keyed] = {int(k): v for k, v in kwargs[int_keyed].items()}
    if "answerers" in kwargs:
        kwargs["answerers"] = tuple(kwargs["answerers"])
    return GenSpec(**kwargs)


# Filler vocabulary: no extraction cue words, no hex-only words of 7+ chars.
_FILLER = (
    "the", "report", "after", "review", "team", "build", "runtime", "queue",
    "handler", "retry", "logic", "updated", "patch", "applied", "node",
    "cluster", "during", "upgrade", "observed", "issue", "resolved", "when",
    "restarting", "under", "load", "timeout", "path", "decade", "facade",
)
# Hex-shaped tokens of 8-9 chars: below the free-standing threshold, and the
# templates keep them at token index >= 2 so no cue can precede them.
_DISTRACTOR_HEX = ("deadbeef", "cafebabe", "0badf00d", "feedface", "abadcafe", "beefcace")

_REF_TEMPLATES = {
    "change_id": ("Uploaded as {ref} to gerrit.", "Corrected under {ref} in the tracker."),
    "long": ("Rolled into the build at {ref} on main.", "Present in baseline {ref} already."),
    "medium": ("Landed with {ref} during hardening.", "Contained in {ref} on the stable track."),
    # Cue word at most two whitespace tokens before the identifier.
    "short": (
        "Fixed by commit {ref} upstream.",
        "See commit {ref} for details.",
        "Merged change {ref} yesterday.",
        "Duplicate of sha {ref} handled earlier.",
    ),
}
_SURFACE_FORMS = ("change_id", "long", "medium", "short")


def _distractor_sentence(rng: SplitMix64) -> str:
    words = [rng.choice(_FILLER), rng.choice(_FILLER), rng.choice(_DISTRACTOR_HEX), rng.choice(_FILLER)]
    return " ".join(words) + "."


def _filler_sentence(rng: SplitMix64) -> str:
    words = [rng.choice(_FILLER) for _ in range(4 + rng.randbelow(4))]
    return " ".join(words) + "."


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in name.lower())


def _weighted_scaled(weights: Mapping[str, float]) -> list[tuple[str, int]]:
    return [(key, round(value * _WEIGHT_SCALE)) for key, value in weights.items()]


def _pick_distinct_weighted(rng: SplitMix64, scaled: list[tuple[str, int]], k: int) -> list[str]:
    pool = list(scaled)
    chosen = []
    for _ in range(k):
        total = sum(weight for _, weight in pool)
        pick = rng.randbelow(total)
        acc = 0
        for index, (key, weight) in enumerate(pool):
            acc += weight
            if pick < acc:
                chosen.append(key)
                pool.pop(index)
                break
    return chosen


def _assignment(rng: SplitMix64, weights: Mapping, n: int) -> list:
    """Quota-exact value assignment for n slots, order shuffled."""
    counts = quota_counts(list(weights.items()), n)
    values = [key for key, count in counts.items() for _ in range(count)]
    rng.shuffle(values)
    return values


@dataclass
class GeneratedCorpus:
    out_dir: Path
    corpus_path: Path
    fixture_dir: Path
    manifest: dict

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / "manifest.json"


def generate(spec: GenSpec, out_dir: Path | str) -> GeneratedCorpus:
    """Write corpus.jsonl, fixtures/, config files and manifest.json.

    Byte-identical for a given spec; every planted identifier resolves
    against the emitted fixtures except the planted broken quota.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fixture_dir = out / "fixtures"
    fixture_dir.mkdir(exist_ok=True)

    rng = SplitMix64(spec.seed)
    n = spec.n_bugs
    start = parse_utc(spec.start)
    step_seconds = max(1, (spec.window_days * 86400) // max(1, n))

    # Component map: one dedicated repo per component plus a shared mono
    # repo mapped through path prefixes (exercises both tables).
    component_names = list(spec.components)
    repo_table = {f"repo-{_slug(name)}": name for name in component_names}
    path_table = [
        {"repo": "mono", "prefix": f"src/{_slug(name)}", "component": name}
        for name in component_names
    ]
    component_map_json = {
        "components": component_names,
        "repo_table": repo_table,
        "path_table": path_table,
    }
    file_pools = {
        name: {
            "repo": (f"repo-{_slug(name)}", [f"src/{_slug(name)}_{i}.c" for i in range(spec.files_per_component)]),
            "mono": ("mono", [f"src/{_slug(name)}/unit_{i}.c" for i in range(spec.files_per_component)]),
        }
        for name in component_names
    }

    # Quota-exact assignments, one stream, fixed order.
    release_of = _assignment(rng, spec.releases, n)
    severity_of = _assignment(rng, spec.severities, n)
    status_of = _assignment(rng, spec.statuses, n)
    country_of = _assignment(rng, spec.countries, n)
    customer_of = _assignment(rng, spec.customers, n)
    docs_of = _assignment(rng, spec.documents, n)
    internal_of = _assignment(rng, {True: spec.internal_share, False: 1.0 - spec.internal_share}, n)
    n_internal = sum(1 for flag in internal_of if flag)
    internal_pool = _assignment(rng, spec.internal_phases, n_internal)
    external_pool = _assignment(rng, spec.external_phases, n - n_internal)
    answered_of = _assignment(rng, {True: spec.answered_share, False: 1.0 - spec.answered_share}, n)
    n_answered = sum(1 for flag in answered_of if flag)
    group_pool = _assignment(rng, spec.answer_groups, n_answered)
    has_refs = _assignment(rng, {True: spec.ref_share, False: 1.0 - spec.ref_share}, n)
    n_ref_bugs = sum(1 for flag in has_refs if flag)
    multiplicity_pool = _assignment(rng, spec.multiplicity, n_ref_bugs)

    total_refs = sum(multiplicity_pool)
    broken_pool = _assignment(
        rng, {True: spec.broken_ref_rate, False: 1.0 - spec.broken_ref_rate}, total_refs
    )
    distract_of = _assignment(rng, {True: spec.distractor_rate, False: 1.0 - spec.distractor_rate}, n)

    doc_pool = [f"DOC-{i:03d}" for i in range(1, 21)]
    scaled_components = _weighted_scaled(spec.components)

    # Sentence pools keep text varied without paying per-word RNG cost on
    # every bug.
    filler_pool = [_filler_sentence(rng) for _ in range(256)]
    distractor_pool = [_distractor_sentence(rng) for _ in range(64)]
    title_pool = [f"{rng.choice(_FILLER)} {rng.choice(_FILLER)} failure" for _ in range(64)]

    corpus_lines: list[str] = []
    fixture_lines: list[str] = []
    manifest_bugs: list[dict] = []
    seen_sha_prefixes: set[str] = set()
    seen_change_ids: set[str] = set()
    internal_index = 0
    external_index = 0
    answered_index = 0
    ref_bug_index = 0
    ref_index = 0

    def fresh_sha() -> str:
        while True:
            value = rng.hex_chars(40)
            if value[:7] not in seen_sha_prefixes:
                seen_sha_prefixes.add(value[:7])
                return value

    def fresh_change_id() -> str:
        while True:
            value = "I" + rng.hex_chars(40)
            if value not in seen_change_ids:
                seen_change_ids.add(value)
                return value

    for i in range(n):
        bug_id = f"B{i + 1:06d}"
        created_at = start + timedelta(seconds=i * step_seconds)
        if internal_of[i]:
            phase = internal_pool[internal_index]
            internal_index += 1
        else:
            phase = external_pool[external_index]
            external_index += 1

        answer_code = None
        answer_group = AnswerCodeGroup.UNKNOWN.value
        answered_by = None
        if answered_of[i]:
            answer_group = group_pool[answered_index]
            answered_index += 1
            answer_code = rng.choice(GROUP_CODES[answer_group])
            answered_by = rng.choice(spec.answerers)

        refs: list[dict] = []
        sentences: list[str] = [rng.choice(filler_pool)]
        if has_refs[i]:
            k = multiplicity_pool[ref_bug_index]
            ref_bug_index += 1
            bug_components = _pick_distinct_weighted(rng, scaled_components, k)
            for component in bug_components:
                broken = broken_pool[ref_index]
                ref_index += 1
                form = rng.choice(_SURFACE_FORMS)
                mode = "repo" if rng.randbelow(2) == 0 else "mono"
                repo, pool = file_pools[component][mode]
                file_count = min(rng.choice(list(spec.files_per_ref)), len(pool))
                picked: list[str] = []
                while len(picked) < file_count:
                    candidate = pool[rng.randbelow(len(pool))]
                    if candidate not in picked:
                        picked.append(candidate)
                if form == "change_id":
                    full = fresh_change_id()
                    kind = "GERRIT_CHANGE_ID"
                    surfaced = full  # canonical: uppercase I + lowercase hex
                    normalized = full
                elif form == "long":
                    full = fresh_sha()
                    kind = "GIT_SHA"
                    surfaced = full
                    normalized = full
                elif form == "medium":
                    full = fresh_sha()
                    kind = "GIT_SHA"
                    surfaced = full[: 12 + rng.randbelow(5)]
                    normalized = surfaced
                else:
                    full = fresh_sha()
                    kind = "GIT_SHA"
                    surfaced = full[: 7 + rng.randbelow(5)]
                    normalized = surfaced
                surface_text = surfaced
                if kind == "GIT_SHA" and rng.randbelow(4) == 0:
                    surface_text = surfaced.upper()
                sentences.append(rng.choice(_REF_TEMPLATES[form]).format(ref=surface_text))
                if not broken:
                    fixture_lines.append(
                        json.dumps(
                            {
                                "ref": {"kind": kind, "value": full},
                                "repository": repo,
                                "changed_files": picked,
                            },
                            sort_keys=True,
                        )
                    )
                refs.append(
                    {
                        "kind": kind,
                        "value": normalized,
                        "full_value": full,
                        "broken": broken,
                        "component": component,
                        "repository": repo,
                        "files": picked,
                    }
                )
        if distract_of[i]:
            sentences.append(rng.choice(distractor_pool))
        sentences.append(rng.choice(filler_pool))

        doc_count = docs_of[i]
        documents: list[str] = []
        while len(documents) < doc_count:
            candidate = doc_pool[rng.randbelow(len(doc_pool))]
            if candidate not in documents:
                documents.append(candidate)

        tracker_url = (
            f"https://tracker.example/browse/{bug_id}" if rng.randbelow(10) > 0 else None
        )
        record = {
            "bug_id": bug_id,
            "product_id": spec.product_id,
            "release": release_of[i],
            "title": f"{rng.choice(title_pool)} in {release_of[i]}",
            "observation_text": rng.choice(filler_pool) + " " + rng.choice(filler_pool),
            "answer_text": " ".join(sentences),
            "answer_code": answer_code,
            "severity": severity_of[i],
            "status": status_of[i],
            "detection_phase": phase,
            "country": country_of[i] or None,
            "customer": customer_of[i] or None,
            "document_refs": documents,
            "created_at": format_utc(created_at),
            "answered_by": answered_by,
            "tracker_url": tracker_url,
        }
        corpus_lines.append(json.dumps(record, sort_keys=True))

        live_refs = [r for r in refs if not r["broken"]]
        manifest_bugs.append(
            {
                "bug_id": bug_id,
                "release": release_of[i],
                "severity": severity_of[i],
                "status": status_of[i],
                "detection_phase": phase,
                "internal": bool(internal_of[i]),
                "country": country_of[i] or None,
                "customer": customer_of[i] or None,
                "documents": documents,
                "answer_code": answer_code,
                "answer_group": answer_group,
                "answered_by": answered_by,
                "created_at": format_utc(created_at),
                "refs": [
                    {"kind": r["kind"], "value": r["value"], "broken": r["broken"]} for r in refs
                ],
                "components": sorted({r["component"] for r in live_refs}),
                "files": sorted({(r["repository"], f) for r in live_refs for f in r["files"]}),
            }
        )

    manifest = {
        "spec": spec.to_json(),
        "totals": {
            "n_bugs": n,
            "internal": n_internal,
            "answered": n_answered,
            "refs_total": total_refs,
            "broken_refs": sum(1 for flag in broken_pool if flag),
            "attributed_bugs": sum(1 for bug in manifest_bugs if bug["components"]),
        },
        "bugs": [
            {**bug, "files": [list(pair) for pair in bug["files"]]} for bug in manifest_bugs
        ],
    }

    (out / "corpus.jsonl").write_text(
        "\n".join(corpus_lines) + ("\n" if corpus_lines else ""), encoding="utf-8"
    )
    (fixture_dir / "changes.jsonl").write_text(
        "\n".join(fixture_lines) + ("\n" if fixture_lines else ""), encoding="utf-8"
    )
    (out / "component-map.json").write_text(
        json.dumps(component_map_json, indent=1, sort_keys=True), encoding="utf-8"
    )
    vocabulary = {
        "answer_code_groups": {
            code: group for group, codes in GROUP_CODES.items() for code in codes
        },
        "severities": list(spec.severities),
        "detection_phases": list(spec.internal_phases) + list(spec.external_phases),
        "internal_phases": list(spec.internal_phases),
        "statuses": list(spec.statuses),
    }
    (out / "vocabulary.json").write_text(
        json.dumps(vocabulary, indent=1, sort_keys=True), encoding="utf-8"
    )
    analyzer_config = {
        "release_order": list(spec.releases),
        "flag_threshold": 0.20,
        "min_answered": 5,
        "internal_phases": list(spec.internal_phases),
    }
    (out / "analyzer.json").write_text(
        json.dumps(analyzer_config, indent=1, sort_keys=True), encoding="utf-8"
    )
    (out / "scm.json").write_text(
        json.dumps(
            {"backend": "fixture", "fixture_dir": "fixtures", "parallelism": 1},
            indent=1,
            sort_keys=True,
        ),
        encoding="utf-8",
    )
    manifest_text = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    (out / "manifest.json").write_text(manifest_text, encoding="utf-8")

    return GeneratedCorpus(
        out_dir=out,
        corpus_path=out / "corpus.jsonl",
        fixture_dir=fixture_dir,
        manifest=manifest,
    )
