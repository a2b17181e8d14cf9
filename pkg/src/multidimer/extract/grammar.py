"""Commit/change identifier grammar over raw scanner candidates.

Pattern rules:
  (a) ``I`` + 40 hex chars, token-bounded -> GERRIT_CHANGE_ID;
  (b) word-bounded hex run of 12..40 chars -> GIT_SHA unconditionally;
  (c) word-bounded hex run of 7..11 chars -> GIT_SHA only with a cue token
      (``commit``, ``fixed``, ...) within two whitespace-delimited tokens
      before it.

Short hex runs collide with English words, so rule (c) keeps "deadbeef"
prose out while still catching "commit deadbeef01".  Runs longer than 40
chars are never matched and never split.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from multidimer.extract._backend import CHANGE_ID, scan


class RefKind(str, Enum):
    GERRIT_CHANGE_ID = "GERRIT_CHANGE_ID"
    GIT_SHA = "GIT_SHA"


@dataclass(frozen=True)
class CommitRef:
    """An extracted identifier.

    ``value`` is the normalized form used for identity and SCM lookup
    (lowercase hex; Change-Ids keep Gerrit's canonical leading uppercase
    ``I``).  ``span`` is the byte range in the UTF-8 source text.
    """

    kind: RefKind
    value: str
    span: tuple[int, int]
    source_bug_id: str

    @property
    def key(self) -> tuple[RefKind, str]:
        """Dedup and lookup identity: (kind, lowercase value)."""
        return (self.kind, self.value.lower())

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "span": list(self.span),
            "source_bug_id": self.source_bug_id,
        }


def ref_from_json(data: dict) -> CommitRef:
    span = data.get("span") or (0, 0)
    return CommitRef(
        kind=RefKind(data["kind"]),
        value=data["value"],
        span=(int(span[0]), int(span[1])),
        source_bug_id=data.get("source_bug_id", ""),
    )


DEFAULT_CUE_TOKENS = frozenset(
    {"commit", "commitid", "change", "changeid", "sha", "revision", "fix", "fixed", "merged"}
)

#: Hex runs at least this long are SHAs without needing a cue.
FREESTANDING_SHA_MIN = 12
#: A cue must appear within this many whitespace-delimited tokens before a
#: short run.
CUE_WINDOW = 2

_TOKEN_RE = re.compile(rb"[^ \t\n\r\f\v]+")
_ALNUM = frozenset(b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")


def _normalize_token(token: bytes) -> bytes:
    start, end = 0, len(token)
    while start < end and token[start] not in _ALNUM:
        start += 1
    while end > start and token[end - 1] not in _ALNUM:
        end -= 1
    return token[start:end].lower()


def _has_cue(data: bytes, token_spans: list[tuple[int, int]], start: int, cues: frozenset[bytes]) -> bool:
    index = bisect_right([s for s, _ in token_spans], start) - 1
    if index < 0:
        return False
    for back in range(1, CUE_WINDOW + 1):
        if index - back < 0:
            break
        t_start, t_end = token_spans[index - back]
        if _normalize_token(data[t_start:t_end]) in cues:
            return True
    return False


def extract_commit_refs(
    text: str, bug_id: str, cue_tokens: Iterable[str] = DEFAULT_CUE_TOKENS
) -> list[CommitRef]:
    """All grammar matches in *text*, deduplicated on (kind, lowercase
    value), in order of first occurrence.  Spans index the UTF-8 bytes."""
    data = text.encode("utf-8")
    candidates = scan(data)
    if not candidates:
        return []
    cues = frozenset(c.lower().encode("ascii") for c in cue_tokens)
    token_spans: Optional[list[tuple[int, int]]] = None
    refs: list[CommitRef] = []
    seen: set[tuple[RefKind, str]] = set()
    for kind_code, start, end in candidates:
        raw = data[start:end].decode("ascii")
        if kind_code == CHANGE_ID:
            kind = RefKind.GERRIT_CHANGE_ID
            value = "I" + raw[1:].lower()
        else:
            if end - start < FREESTANDING_SHA_MIN:
                if token_spans is None:
                    token_spans = [(m.start(), m.end()) for m in _TOKEN_RE.finditer(data)]
                if not _has_cue(data, token_spans, start, cues):
                    continue
            kind = RefKind.GIT_SHA
            value = raw.lower()
        ref = CommitRef(kind=kind, value=value, span=(start, end), source_bug_id=bug_id)
        if ref.key in seen:
            continue
        seen.add(ref.key)
        refs.append(ref)
    return refs


def extraction_metrics(
    predicted: Iterable[CommitRef], gold: Iterable[tuple[RefKind, str]]
) -> tuple[float, float]:
    """Precision and recall on (kind, lowercase value) identity.

    By convention an empty side scores 1.0 for its own metric.
    """
    pred_keys = {ref.key for ref in predicted}
    gold_keys = {(kind, value.lower()) for kind, value in gold}
    hits = len(pred_keys & gold_keys)
    precision = 1.0 if not pred_keys else hits / len(pred_keys)
    recall = 1.0 if not gold_keys else hits / len(gold_keys)
    return precision, recall
