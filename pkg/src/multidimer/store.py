"""Persist immutable snapshots, export the consolidated CSV, and run
scheduled plus on-demand analysis jobs.

Persistence is a directory of JSON snapshot files (write to temp, publish
by atomic rename); no database.  Snapshots are append-only and re-exports
of a snapshot id are byte-identical forever.
"""

from __future__ import annotations

import csv
import io
import json
import queue
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

from multidimer.analyzer import AnalysisSnapshot
from multidimer.ingest import CSV_COLUMNS, CorpusQuery
from multidimer.model import ModelError, format_utc, utcnow


class StoreError(Exception):
    pass


class SnapshotNotFound(StoreError):
    pass


class SnapshotStore:
    """Append-only snapshot directory with atomic publication."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        (self.root / "snapshots").mkdir(parents=True, exist_ok=True)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)

    def _snapshot_path(self, snapshot_id: str) -> Path:
        return self.root / "snapshots" / f"{snapshot_id}.json"

    def save(self, snapshot: AnalysisSnapshot) -> str:
        """Persist a snapshot; an existing id is left untouched (identical
        analyses share identity, and published snapshots never change)."""
        payload = snapshot.to_payload()
        return self.save_payload(payload)

    def save_payload(self, payload: dict) -> str:
        snapshot_id = payload["snapshot_id"]
        path = self._snapshot_path(snapshot_id)
        if path.exists():
            return snapshot_id
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True, indent=1), encoding="utf-8")
        tmp.replace(path)
        return snapshot_id

    def get(self, snapshot_id: str) -> dict:
        path = self._snapshot_path(snapshot_id)
        if not path.exists():
            raise SnapshotNotFound(f"snapshot {snapshot_id!r} not found")
        return json.loads(path.read_text(encoding="utf-8"))

    def list_snapshots(self) -> list[dict]:
        """Metadata for every stored snapshot, newest first."""
        entries = []
        for path in (self.root / "snapshots").glob("*.json"):
            payload = json.loads(path.read_text(encoding="utf-8"))
            entries.append(
                {
                    "snapshot_id": payload["snapshot_id"],
                    "created_at": payload["created_at"],
                    "query": payload["query"],
                    "anomaly_count": len(payload.get("anomalies", [])),
                }
            )
        entries.sort(key=lambda entry: (entry["created_at"], entry["snapshot_id"]), reverse=True)
        return entries

    def latest(self) -> dict:
        entries = self.list_snapshots()
        if not entries:
            raise SnapshotNotFound("no snapshots stored")
        return self.get(entries[0]["snapshot_id"])

    def export_csv(self, snapshot_id: str) -> bytes:
        return export_csv(self.get(snapshot_id))


def export_csv(payload: dict) -> bytes:
    """Consolidated per-(bug, component) CSV: RFC 4180, UTF-8, header first,
    rows sorted by (bug_id, component).  Bugs without attribution emit one
    row with an empty component."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(CSV_COLUMNS)
    for bug_id in sorted(payload["bugs"]):
        record = payload["bugs"][bug_id]
        components = record.get("components") or []
        rows = sorted(components) if components else [""]
        for component in rows:
            files = [f for f in record.get("files", ()) if component and f[2] == component]
            repositories = sorted({repo for repo, _path, _comp in files})
            writer.writerow(
                [
                    record["bug_id"],
                    record["product_id"],
                    record["release"],
                    component,
                    ";".join(repositories),
                    len(files),
                    record.get("detection_phase") or "",
                    record.get("answer_code") or "",
                    record.get("answer_group") or "",
                    record.get("severity") or "",
                    record.get("status") or "",
                    record.get("country") or "",
                    record.get("customer") or "",
                    ";".join(record.get("document_refs", ())),
                    ";".join(record.get("commit_refs", ())),
                    record["created_at"],
                ]
            )
    return buffer.getvalue().encode("utf-8")


class JobState(str, Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAILED = "FAILED"


@dataclass
class JobRecord:
    """State machine QUEUED -> RUNNING -> (DONE | FAILED), timestamps per
    transition."""

    job_id: str
    query: CorpusQuery
    state: JobState = JobState.QUEUED
    snapshot_id: Optional[str] = None
    error: Optional[str] = None
    timestamps: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        data = {
            "job_id": self.job_id,
            "query": self.query.to_json(),
            "state": self.state.value,
            "timestamps": dict(self.timestamps),
        }
        if self.snapshot_id is not None:
            data["snapshot_id"] = self.snapshot_id
        if self.error is not None:
            data["error"] = self.error
        return data


_TERMINAL = (JobState.DONE, JobState.FAILED)
_VALID_TRANSITIONS = {
    JobState.QUEUED: {JobState.RUNNING},
    JobState.RUNNING: {JobState.DONE, JobState.FAILED},
    JobState.DONE: set(),
    JobState.FAILED: set(),
}


class JobRunner:
    """FIFO analysis job queue with a single worker, so at most one job per
    product set runs at a time and duplicates queue behind.

    ``synchronous=True`` executes jobs inline on submit (deterministic
    tests); otherwise a daemon worker thread drains the queue.
    """

    def __init__(
        self,
        store: SnapshotStore,
        run_fn: Callable[[CorpusQuery], AnalysisSnapshot],
        clock: Callable[[], datetime] = utcnow,
        synchronous: bool = False,
    ):
        self._store = store
        self._run_fn = run_fn
        self._clock = clock
        self._synchronous = synchronous
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()
        self._queue: "queue.Queue[Optional[str]]" = queue.Queue()
        self._worker: Optional[threading.Thread] = None
        if not synchronous:
            self._worker = threading.Thread(target=self._drain, daemon=True)
            self._worker.start()

    def submit(self, query: CorpusQuery) -> JobRecord:
        job = JobRecord(job_id=uuid.uuid4().hex[:12], query=query)
        job.timestamps["QUEUED"] = format_utc(self._clock())
        with self._lock:
            self._jobs[job.job_id] = job
        self._persist(job)
        if self._synchronous:
            self._execute(job.job_id)
        else:
            self._queue.put(job.job_id)
        return job

    def get(self, job_id: str) -> JobRecord:
        with self._lock:
            if job_id not in self._jobs:
                raise StoreError(f"job {job_id!r} not found")
            return self._jobs[job_id]

    def _transition(self, job: JobRecord, state: JobState) -> None:
        if state not in _VALID_TRANSITIONS[job.state]:
            raise StoreError(f"illegal transition {job.state} -> {state}")
        job.state = state
        job.timestamps[state.value] = format_utc(self._clock())

    def _execute(self, job_id: str) -> None:
        job = self.get(job_id)
        self._transition(job, JobState.RUNNING)
        self._persist(job)
        try:
            snapshot = self._run_fn(job.query)
            job.snapshot_id = self._store.save(snapshot)
            self._transition(job, JobState.DONE)
        except Exception as exc:  # noqa: BLE001 - job errors must not kill the worker
            job.error = f"{type(exc).__name__}: {exc}"
            self._transition(job, JobState.FAILED)
        self._persist(job)

    def _drain(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            self._execute(job_id)

    def _persist(self, job: JobRecord) -> None:
        path = self._store.root / "jobs" / f"{job.job_id}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(job.to_json(), sort_keys=True, indent=1), encoding="utf-8")
        tmp.replace(path)

    def shutdown(self) -> None:
        if self._worker is not None:
            self._queue.put(None)
            self._worker.join(timeout=5)


class RecurringSchedule:
    """Tick-based recurring submission with an injectable clock.

    One job per elapsed interval tick; ticks missed while the process was
    down coalesce into a single catch-up job (persisted anchor and last
    tick survive restarts).
    """

    def __init__(
        self,
        interval: timedelta,
        query_factory: Callable[[datetime], CorpusQuery],
        submit: Callable[[CorpusQuery], JobRecord],
        clock: Callable[[], datetime] = utcnow,
        state_path: Optional[Path | str] = None,
    ):
        if interval <= timedelta(0):
            raise ModelError("schedule interval must be positive")
        self._interval = interval
        self._query_factory = query_factory
        self._submit = submit
        self._clock = clock
        self._state_path = Path(state_path) if state_path else None
        self._anchor: Optional[datetime] = None
        self._last_tick = -1
        if self._state_path and self._state_path.exists():
            state = json.loads(self._state_path.read_text(encoding="utf-8"))
            from multidimer.model import parse_utc

            self._anchor = parse_utc(state["anchor"])
            self._last_tick = int(state["last_tick"])

    def run_pending(self) -> Optional[JobRecord]:
        """Submit at most one job: the catch-up for all ticks due since the
        last run.  Returns the submitted record, if any."""
        now = self._clock()
        if self._anchor is None:
            self._anchor = now
        tick = (now - self._anchor) // self._interval
        if tick <= self._last_tick:
            return None
        self._last_tick = tick
        self._save_state()
        return self._submit(self._query_factory(now))

    def _save_state(self) -> None:
        if not self._state_path:
            return
        state = {"anchor": format_utc(self._anchor), "last_tick": self._last_tick}
        tmp = self._state_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(state, sort_keys=True), encoding="utf-8")
        tmp.replace(self._state_path)


def schedule_recurring(
    interval: timedelta,
    query_factory: Callable[[datetime], CorpusQuery],
    runner: JobRunner,
    clock: Callable[[], datetime] = utcnow,
    state_path: Optional[Path | str] = None,
) -> RecurringSchedule:
    """Default 12-hour recurring analysis; pass a test clock to drive ticks
    manually."""
    return RecurringSchedule(
        interval=interval,
        query_factory=query_factory,
        submit=runner.submit,
        clock=clock,
        state_path=state_path,
    )
