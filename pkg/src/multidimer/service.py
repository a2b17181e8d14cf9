"""Wire configs, corpus, resolver, store and job queue into one service.

Config directory layout (all UTF-8 JSON):
    vocabulary.json      classification vocabularies
    component-map.json   the two mapping tables
    analyzer.json        release order, FST thresholds
    scm.json             backend selection (gerrit | fixture)
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Optional

from multidimer.analyzer import (
    AnalysisSnapshot,
    AnalyzerConfig,
    analyzer_config_from_json,
    run_analysis,
)
from multidimer.ingest import CorpusQuery, IngestError, load_corpus
from multidimer.mapping import ComponentMap, component_map_from_json, load_component_map
from multidimer.model import Vocabulary, load_vocabulary, utcnow
from multidimer.scm import BackendConfig, Resolver, backend_config_from_json, make_backend
from multidimer.store import JobRecord, JobRunner, RecurringSchedule, SnapshotStore

DATA_DIR_ENV = "MULTIDIMER_DATA_DIR"


@dataclass(frozen=True)
class Configs:
    vocabulary: Vocabulary
    component_map: ComponentMap
    analyzer: AnalyzerConfig
    scm: BackendConfig


def load_configs(config_dir: Path | str) -> Configs:
    config_dir = Path(config_dir)
    scm_path = config_dir / "scm.json"
    if scm_path.exists():
        scm = backend_config_from_json(json.loads(scm_path.read_text(encoding="utf-8")))
    else:
        scm = BackendConfig(backend="fixture", fixture_dir=str(config_dir / "fixtures"))
    analyzer_path = config_dir / "analyzer.json"
    analyzer = (
        analyzer_config_from_json(json.loads(analyzer_path.read_text(encoding="utf-8")))
        if analyzer_path.exists()
        else AnalyzerConfig()
    )
    return Configs(
        vocabulary=load_vocabulary(config_dir / "vocabulary.json"),
        component_map=load_component_map(config_dir / "component-map.json"),
        analyzer=analyzer,
        scm=scm,
    )


def run_job(
    corpus_path: Path | str,
    config_dir: Path | str,
    query: CorpusQuery,
    clock: Callable[[], datetime] = utcnow,
    corpus_format: str = "jsonl",
) -> AnalysisSnapshot:
    """Load everything from disk and run one analysis job."""
    configs = load_configs(config_dir)
    corpus, summary = load_corpus(corpus_path, format=corpus_format, vocabulary=configs.vocabulary)
    if summary.rejected:
        first = summary.rejection_reasons[0]
        raise IngestError(
            f"{summary.rejected} rejected records (first: {first[0]}: {first[1]})"
        )
    backend = make_backend(configs.scm, base_dir=Path(config_dir))
    resolver = Resolver(backend, parallelism=configs.scm.parallelism, clock=clock)
    return run_analysis(
        corpus,
        query,
        configs.vocabulary,
        configs.component_map,
        configs.analyzer,
        resolver,
        clock=clock,
    )


def resolve_data_dir(explicit: Optional[str]) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path(".")


class AnalysisService:
    """The long-running backend: store + job queue + optional schedule.

    Expects a data directory containing ``corpus.jsonl``, a ``config/``
    subdirectory and a snapshot store root.
    """

    def __init__(
        self,
        data_dir: Path | str,
        clock: Callable[[], datetime] = utcnow,
        synchronous_jobs: bool = False,
    ):
        self.data_dir = Path(data_dir)
        self.corpus_path = self.data_dir / "corpus.jsonl"
        # A generator output directory doubles as a data directory: configs
        # sit next to the corpus unless a config/ subdirectory exists.
        config_sub = self.data_dir / "config"
        self.config_dir = config_sub if config_sub.is_dir() else self.data_dir
        self.store = SnapshotStore(self.data_dir / "store")
        self.clock = clock
        self.runner = JobRunner(
            self.store,
            self._run_query,
            clock=clock,
            synchronous=synchronous_jobs,
        )
        self.schedule: Optional[RecurringSchedule] = None

    def _run_query(self, query: CorpusQuery) -> AnalysisSnapshot:
        # Configs reload per job: a component-map update affects future
        # jobs only, never published snapshots.
        return run_job(self.corpus_path, self.config_dir, query, clock=self.clock)

    def submit(self, query: CorpusQuery) -> JobRecord:
        return self.runner.submit(query)

    def update_component_map(self, data: dict) -> None:
        cmap = component_map_from_json(data)
        path = self.config_dir / "component-map.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(cmap.to_json(), indent=1, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    def enable_schedule(self, interval: timedelta, query_factory) -> RecurringSchedule:
        self.schedule = RecurringSchedule(
            interval=interval,
            query_factory=query_factory,
            submit=self.runner.submit,
            clock=self.clock,
            state_path=self.data_dir / "store" / "schedule.json",
        )
        return self.schedule
