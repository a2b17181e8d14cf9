"""Resolve extracted identifiers to change details (repository + changed files).

Two backends sit behind one interface: a Gerrit-compatible wire adapter and
a local fixture directory, so the whole pipeline runs offline.  Every
submitted ref resolves to exactly one ChangeInfo or one ResolutionAnomaly;
results are cached per job so no backend is hit twice for the same
normalized ref.
"""

from __future__ import annotations

import json
import os
import threading
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional
from urllib.parse import unquote, urlsplit

import requests

from multidimer.extract import CommitRef, RefKind, ref_from_json
from multidimer.model import format_utc, parse_utc, utcnow

#: Anti-XSSI prefix Gerrit prepends to JSON responses.
XSSI_PREFIX = b")]}'"

SCM_TOKEN_ENV = "MULTIDIMER_SCM_TOKEN"

#: File-list entries that are response metadata, not changed files.
MAGIC_FILE_ENTRIES = frozenset({"/COMMIT_MSG", "/MERGE_LIST"})


class AnomalyReason(str, Enum):
    NOT_FOUND = "NOT_FOUND"
    AMBIGUOUS = "AMBIGUOUS"
    BACKEND_ERROR = "BACKEND_ERROR"


class RefNotFound(Exception):
    pass


class RefAmbiguous(Exception):
    pass


class BackendFailure(Exception):
    """Transport errors and malformed backend responses."""


@dataclass(frozen=True)
class ChangeInfo:
    ref: CommitRef
    repository: str
    changed_files: tuple[str, ...]
    resolved_at: datetime

    def to_json(self) -> dict:
        return {
            "ref": self.ref.to_json(),
            "repository": self.repository,
            "changed_files": list(self.changed_files),
            "resolved_at": format_utc(self.resolved_at),
        }


def change_from_json(data: dict) -> ChangeInfo:
    return ChangeInfo(
        ref=ref_from_json(data["ref"]),
        repository=data["repository"],
        changed_files=tuple(data["changed_files"]),
        resolved_at=parse_utc(data["resolved_at"]),
    )


@dataclass(frozen=True)
class ResolutionAnomaly:
    ref: CommitRef
    reason: AnomalyReason
    detail: str

    def to_json(self) -> dict:
        return {"ref": self.ref.to_json(), "reason": self.reason.value, "detail": self.detail}


def valid_repo_path(path: str) -> bool:
    """Repository-relative forward-slash path: no leading slash, no empty,
    ``.`` or ``..`` segments."""
    if not path or path.startswith("/"):
        return False
    return all(segment not in ("", ".", "..") for segment in path.split("/"))


def parse_gerrit_change_response(body: bytes) -> tuple[str, list[str], list[str]]:
    """Extract (project, changed file paths, warnings) from a change-detail
    response.

    Strips the ``)]}'`` prefix plus a following newline; a missing prefix is
    tolerated with a warning.  Magic entries (/COMMIT_MSG, /MERGE_LIST) are
    excluded.  Raises BackendFailure on anything unparseable.
    """
    warnings: list[str] = []
    if body.startswith(XSSI_PREFIX):
        body = body[len(XSSI_PREFIX):]
        if body.startswith(b"\n"):
            body = body[1:]
    else:
        warnings.append("response missing the )]}' anti-XSSI prefix")
    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BackendFailure(f"unparseable change response: {exc}") from None
    if not isinstance(payload, dict):
        raise BackendFailure("change response is not an object")
    project = payload.get("project")
    if not isinstance(project, str) or not project:
        raise BackendFailure("change response lacks a project name")
    files = payload.get("files")
    if files is None:
        # Standard Gerrit shape: files live under the current revision.
        revision = payload.get("current_revision")
        revisions = payload.get("revisions")
        if isinstance(revisions, dict) and revision in revisions:
            files = revisions[revision].get("files")
    if not isinstance(files, dict):
        raise BackendFailure("change response lacks a file list")
    paths = [name for name in files if name not in MAGIC_FILE_ENTRIES]
    return project, paths, warnings


class FixtureBackend:
    """Change lookup from a directory of JSONL fixture records.

    Record schema: {"ref": {"kind", "value"}, "repository", "changed_files"}.
    Short SHAs (below the full 40 chars) resolve by unique prefix, matching
    real short-SHA semantics; several matches raise RefAmbiguous.
    """

    def __init__(self, fixture_dir: Path | str):
        directory = Path(fixture_dir)
        if not directory.is_dir():
            raise BackendFailure(f"fixture directory {directory} does not exist")
        self._records: dict[tuple[RefKind, str], tuple[str, tuple[str, ...]]] = {}
        for fixture_file in sorted(directory.glob("*.jsonl")):
            for line in fixture_file.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                kind = RefKind(record["ref"]["kind"])
                value = str(record["ref"]["value"]).lower()
                files = tuple(record["changed_files"])
                self._records[(kind, value)] = (str(record["repository"]), files)
        self._sha_values = sorted(
            value for kind, value in self._records if kind is RefKind.GIT_SHA
        )

    def fetch(self, kind: RefKind, value: str) -> tuple[str, list[str]]:
        key = (kind, value.lower())
        hit = self._records.get(key)
        if hit is not None:
            return hit[0], list(hit[1])
        if kind is RefKind.GIT_SHA and len(value) < 40:
            prefix = value.lower()
            index = bisect_left(self._sha_values, prefix)
            matches = []
            while index < len(self._sha_values) and self._sha_values[index].startswith(prefix):
                matches.append(self._sha_values[index])
                index += 1
            if len(matches) == 1:
                repo, files = self._records[(RefKind.GIT_SHA, matches[0])]
                return repo, list(files)
            if len(matches) > 1:
                raise RefAmbiguous(f"{len(matches)} changes share prefix {prefix!r}")
        raise RefNotFound(f"no change for {kind.value} {value!r}")


class GerritBackend:
    """Wire adapter: GET /changes/{id}?o=CURRENT_REVISION&o=CURRENT_FILES.

    Bearer token comes from the MULTIDIMER_SCM_TOKEN env var.  Statuses map
    onto anomaly classes: 404 not found, 409 ambiguous, anything else a
    backend error.
    """

    def __init__(
        self,
        endpoint: str,
        token: Optional[str] = None,
        session: Optional[requests.Session] = None,
        timeout: float = 10.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self._token = token if token is not None else os.environ.get(SCM_TOKEN_ENV)
        self._session = session or requests.Session()
        self._timeout = timeout
        self.warnings: list[str] = []

    def fetch(self, kind: RefKind, value: str) -> tuple[str, list[str]]:
        url = f"{self.endpoint}/changes/{value}?o=CURRENT_REVISION&o=CURRENT_FILES"
        headers = {"Authorization": f"Bearer {self._token}"} if self._token else {}
        try:
            response = self._session.get(url, headers=headers, timeout=self._timeout)
        except requests.RequestException as exc:
            raise BackendFailure(f"backend unreachable: {exc}") from None
        if response.status_code == 404:
            raise RefNotFound(f"no change for {kind.value} {value!r}")
        if response.status_code == 409:
            raise RefAmbiguous(response.text.strip() or f"ambiguous ref {value!r}")
        if response.status_code != 200:
            raise BackendFailure(f"unexpected status {response.status_code}")
        project, paths, warnings = parse_gerrit_change_response(response.content)
        self.warnings.extend(warnings)
        return project, paths


#: Memo payloads: ("ok", repository, files, resolved_at) or
#: ("anomaly", reason, detail).
_MemoEntry = tuple


class Resolver:
    """Resolution with per-job memoisation and bounded fan-out.

    Results come back in input order regardless of completion order; a warm
    cache reproduces a cold run byte for byte (resolved_at included).
    """

    def __init__(
        self,
        backend,
        parallelism: int = 4,
        disk_cache_path: Optional[Path | str] = None,
        clock: Callable[[], datetime] = utcnow,
    ):
        self._backend = backend
        self._parallelism = max(1, int(parallelism))
        self._clock = clock
        self._memo: dict[tuple[RefKind, str], _MemoEntry] = {}
        self._lock = threading.Lock()
        self._disk_cache_path = Path(disk_cache_path) if disk_cache_path else None
        if self._disk_cache_path and self._disk_cache_path.exists():
            self._load_disk_cache()

    def resolve(
        self, refs: Iterable[CommitRef]
    ) -> tuple[list[ChangeInfo], list[ResolutionAnomaly]]:
        """Partition deduplicated refs into ChangeInfos and anomalies."""
        deduped: list[CommitRef] = []
        seen: set[tuple[RefKind, str]] = set()
        for ref in refs:
            if ref.key not in seen:
                seen.add(ref.key)
                deduped.append(ref)
        missing = [ref for ref in deduped if ref.key not in self._memo]
        if missing:
            if self._parallelism == 1 or len(missing) == 1:
                for ref in missing:
                    key, entry = self._fetch_one(ref)
                    self._memo[key] = entry
            else:
                with ThreadPoolExecutor(max_workers=self._parallelism) as pool:
                    for key, entry in pool.map(self._fetch_one, missing):
                        with self._lock:
                            self._memo[key] = entry
            if self._disk_cache_path:
                self._save_disk_cache()

        changes: list[ChangeInfo] = []
        anomalies: list[ResolutionAnomaly] = []
        for ref in deduped:
            entry = self._memo[ref.key]
            if entry[0] == "ok":
                changes.append(
                    ChangeInfo(
                        ref=ref,
                        repository=entry[1],
                        changed_files=entry[2],
                        resolved_at=entry[3],
                    )
                )
            else:
                anomalies.append(
                    ResolutionAnomaly(ref=ref, reason=AnomalyReason(entry[1]), detail=entry[2])
                )
        return changes, anomalies

    def _fetch_one(self, ref: CommitRef) -> tuple[tuple[RefKind, str], _MemoEntry]:
        try:
            repository, raw_files = self._backend.fetch(ref.kind, ref.value)
        except RefNotFound as exc:
            return ref.key, ("anomaly", AnomalyReason.NOT_FOUND.value, str(exc))
        except RefAmbiguous as exc:
            return ref.key, ("anomaly", AnomalyReason.AMBIGUOUS.value, str(exc))
        except BackendFailure as exc:
            return ref.key, ("anomaly", AnomalyReason.BACKEND_ERROR.value, str(exc))
        files: list[str] = []
        for path in raw_files:
            if not valid_repo_path(path):
                return ref.key, (
                    "anomaly",
                    AnomalyReason.BACKEND_ERROR.value,
                    f"malformed file path {path!r}",
                )
            if path not in files:
                files.append(path)
        if not files:
            # ChangeInfo requires a non-empty file set.
            return ref.key, ("anomaly", AnomalyReason.NOT_FOUND.value, "change has no changed files")
        return ref.key, ("ok", repository, tuple(files), self._clock())

    def _load_disk_cache(self) -> None:
        for line in self._disk_cache_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            key = (RefKind(record["kind"]), record["value"])
            if record["status"] == "ok":
                self._memo[key] = (
                    "ok",
                    record["repository"],
                    tuple(record["changed_files"]),
                    parse_utc(record["resolved_at"]),
                )
            else:
                self._memo[key] = ("anomaly", record["reason"], record["detail"])

    def _save_disk_cache(self) -> None:
        lines = []
        for (kind, value), entry in sorted(self._memo.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
            if entry[0] == "ok":
                record = {
                    "kind": kind.value,
                    "value": value,
                    "status": "ok",
                    "repository": entry[1],
                    "changed_files": list(entry[2]),
                    "resolved_at": format_utc(entry[3]),
                }
            else:
                record = {
                    "kind": kind.value,
                    "value": value,
                    "status": "anomaly",
                    "reason": entry[1],
                    "detail": entry[2],
                }
            lines.append(json.dumps(record, sort_keys=True))
        tmp = self._disk_cache_path.with_suffix(".tmp")
        tmp.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        tmp.replace(self._disk_cache_path)


@dataclass(frozen=True)
class BackendConfig:
    backend: str  # "gerrit" | "fixture"
    endpoint: Optional[str] = None
    credential_ref: Optional[str] = None
    fixture_dir: Optional[str] = None
    parallelism: int = 4

    def to_json(self) -> dict:
        data: dict = {"backend": self.backend, "parallelism": self.parallelism}
        if self.endpoint:
            data["endpoint"] = self.endpoint
        if self.credential_ref:
            data["credential_ref"] = self.credential_ref
        if self.fixture_dir:
            data["fixture_dir"] = self.fixture_dir
        return data


def backend_config_from_json(data: Mapping[str, object]) -> BackendConfig:
    backend = data.get("backend")
    if backend not in ("gerrit", "fixture"):
        raise BackendFailure(f"unknown backend {backend!r}")
    return BackendConfig(
        backend=str(backend),
        endpoint=data.get("endpoint"),  # type: ignore[arg-type]
        credential_ref=data.get("credential_ref"),  # type: ignore[arg-type]
        fixture_dir=data.get("fixture_dir"),  # type: ignore[arg-type]
        parallelism=int(data.get("parallelism", 4)),  # type: ignore[arg-type]
    )


def make_backend(config: BackendConfig, base_dir: Optional[Path] = None):
    """Instantiate the configured backend; fixture_dir resolves relative to
    *base_dir* (the config file's directory, typically)."""
    if config.backend == "fixture":
        if not config.fixture_dir:
            raise BackendFailure("fixture backend needs fixture_dir")
        fixture_dir = Path(config.fixture_dir)
        if base_dir and not fixture_dir.is_absolute():
            fixture_dir = base_dir / fixture_dir
        return FixtureBackend(fixture_dir)
    if not config.endpoint:
        raise BackendFailure("gerrit backend needs an endpoint")
    return GerritBackend(config.endpoint)


class GerritStubServer:
    """Local HTTP server speaking the wire adapter's Gerrit dialect from a
    FixtureBackend; used for offline wire-format testing and demos.

    Responses carry the )]}' prefix and a /COMMIT_MSG magic entry, so
    clients must implement both stripping rules.
    """

    def __init__(self, fixture: FixtureBackend, host: str = "127.0.0.1", port: int = 0):
        self._fixture = fixture
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self) -> None:  # noqa: N802 (http.server API)
                stub._handle(self)

            def log_message(self, *args) -> None:
                pass

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "GerritStubServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "GerritStubServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _handle(self, handler: BaseHTTPRequestHandler) -> None:
        path = urlsplit(handler.path).path
        if not path.startswith("/changes/"):
            self._send(handler, 400, b"bad request")
            return
        value = unquote(path[len("/changes/"):].split("/", 1)[0])
        kind = RefKind.GERRIT_CHANGE_ID if value[:1].lower() == "i" else RefKind.GIT_SHA
        try:
            repository, files = self._fixture.fetch(kind, value)
        except RefNotFound:
            self._send(handler, 404, b"Not found")
            return
        except RefAmbiguous as exc:
            self._send(handler, 409, str(exc).encode("utf-8"))
            return
        payload = {
            "project": repository,
            # Insertion order preserved: the parse side must see the same
            # file order the fixture backend returns.
            "files": {"/COMMIT_MSG": {"status": "A"}, **{name: {} for name in files}},
        }
        body = XSSI_PREFIX + b"\n" + json.dumps(payload).encode("utf-8")
        self._send(handler, 200, body, content_type="application/json")

    @staticmethod
    def _send(handler: BaseHTTPRequestHandler, status: int, body: bytes, content_type: str = "text/plain") -> None:
        handler.send_response(status)
        handler.send_header("Content-Type", content_type)
        handler.send_header("Content-Length", str(len(body)))
        handler.end_headers()
        handler.wfile.write(body)
