"""Pure-Python identifier scanner (reference semantics for the compiled kernel).

Operates on UTF-8 bytes so spans are byte offsets and multi-byte characters
are plain non-word bytes.  Produces raw candidates only; cue-word
disambiguation and dedup live in the grammar layer.
"""

from __future__ import annotations

import re

CHANGE_ID = 0
HEX_RUN = 1

_WORD = frozenset(b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")

# Gerrit Change-Id: uppercase I + exactly 40 hex chars, token-bounded.
_CHANGE_ID_RE = re.compile(rb"(?<![0-9A-Za-z_])I[0-9a-fA-F]{40}(?![0-9A-Za-z_])")
# Maximal hex runs; boundedness and length checked per match.
_HEX_RUN_RE = re.compile(rb"[0-9a-fA-F]+")


def scan(data: bytes) -> list[tuple[int, int, int]]:
    """Return (kind, start, end) candidates ordered by position.

    Candidates are Change-Id tokens and word-bounded hex runs of 7..40
    chars; longer runs are dropped whole, never split.  A hex run inside a
    Change-Id span is not a candidate.
    """
    out: list[tuple[int, int, int]] = []
    consumed: list[tuple[int, int]] = []
    for match in _CHANGE_ID_RE.finditer(data):
        out.append((CHANGE_ID, match.start(), match.end()))
        consumed.append((match.start(), match.end()))
    size = len(data)
    for match in _HEX_RUN_RE.finditer(data):
        start, end = match.start(), match.end()
        if not 7 <= end - start <= 40:
            continue
        if start > 0 and data[start - 1] in _WORD:
            continue
        if end < size and data[end] in _WORD:
            continue
        if any(start < c_end and c_start < end for c_start, c_end in consumed):
            continue
        out.append((HEX_RUN, start, end))
    out.sort(key=lambda item: item[1])
    return out
