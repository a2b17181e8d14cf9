"""Commit/change identifier extraction from free answer text."""

from multidimer.extract._backend import SCANNER_BACKEND, scan
from multidimer.extract.grammar import (
    CUE_WINDOW,
    DEFAULT_CUE_TOKENS,
    FREESTANDING_SHA_MIN,
    CommitRef,
    RefKind,
    extract_commit_refs,
    extraction_metrics,
    ref_from_json,
)

__all__ = [
    "CUE_WINDOW",
    "DEFAULT_CUE_TOKENS",
    "FREESTANDING_SHA_MIN",
    "SCANNER_BACKEND",
    "CommitRef",
    "RefKind",
    "extract_commit_refs",
    "extraction_metrics",
    "ref_from_json",
    "scan",
]
