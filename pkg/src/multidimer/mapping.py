"""Attribute resolved changes to architectural components via two tables.

One table maps whole repositories onto components; the other maps
(repository, path prefix) pairs, which wins over the repo table and by
longest prefix among themselves.  Prefixes match on segment boundaries:
``src/ui`` covers ``src/ui/a.c`` but not ``src/uix/a.c``.  Files matching
neither table surface as the UNMAPPED sentinel rather than disappearing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from multidimer.model import UNMAPPED, ModelError
from multidimer.scm import ChangeInfo


@dataclass(frozen=True)
class PathRule:
    repo: str
    prefix: str
    component: str


@dataclass(frozen=True)
class ComponentMap:
    components: frozenset[str]
    repo_table: Mapping[str, str]
    path_table: tuple[PathRule, ...]
    _rules_by_repo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        for repo, component in self.repo_table.items():
            if component not in self.components:
                raise ModelError(f"repo_table component {component!r} not declared")
        seen: set[tuple[str, str]] = set()
        for rule in self.path_table:
            if rule.component not in self.components:
                raise ModelError(f"path_table component {rule.component!r} not declared")
            if not rule.prefix or rule.prefix.endswith("/") or rule.prefix.startswith("/"):
                raise ModelError(f"path prefix {rule.prefix!r} not normalized")
            key = (rule.repo, rule.prefix)
            if key in seen:
                raise ModelError(f"duplicate path_table entry for {key}")
            seen.add(key)
        by_repo: dict[str, list[PathRule]] = {}
        for rule in self.path_table:
            by_repo.setdefault(rule.repo, []).append(rule)
        self._rules_by_repo.update(by_repo)

    def to_json(self) -> dict:
        return {
            "components": sorted(self.components),
            "repo_table": dict(sorted(self.repo_table.items())),
            "path_table": [
                {"repo": r.repo, "prefix": r.prefix, "component": r.component}
                for r in self.path_table
            ],
        }


def component_map_from_json(data: Mapping[str, object]) -> ComponentMap:
    components = data.get("components")
    if not isinstance(components, (list, tuple)):
        raise ModelError("components must be a list")
    rules = []
    for entry in data.get("path_table") or ():
        rules.append(
            PathRule(
                repo=str(entry["repo"]),
                prefix=str(entry["prefix"]).rstrip("/"),
                component=str(entry["component"]),
            )
        )
    return ComponentMap(
        components=frozenset(str(c) for c in components),
        repo_table={str(k): str(v) for k, v in dict(data.get("repo_table") or {}).items()},
        path_table=tuple(rules),
    )


def load_component_map(path: Path | str) -> ComponentMap:
    with open(path, encoding="utf-8") as handle:
        return component_map_from_json(json.load(handle))


def _prefix_covers(prefix: str, path: str) -> bool:
    return path == prefix or path.startswith(prefix + "/")


def map_file(repo: str, path: str, cmap: ComponentMap) -> str:
    """Component for one changed file: longest matching path prefix, else
    the repo table, else UNMAPPED."""
    best: Optional[PathRule] = None
    for rule in cmap._rules_by_repo.get(repo, ()):
        if _prefix_covers(rule.prefix, path):
            if best is None or len(rule.prefix) > len(best.prefix):
                best = rule
    if best is not None:
        return best.component
    return cmap.repo_table.get(repo, UNMAPPED)


def map_change(change: ChangeInfo, cmap: ComponentMap) -> frozenset[str]:
    """Union of per-file components for one resolved change."""
    return frozenset(map_file(change.repository, path, cmap) for path in change.changed_files)


@dataclass(frozen=True)
class Attribution:
    """A bug's component set with the contributing (repository, path) pairs.

    UNMAPPED appears only when at least one contributing file matched
    neither table.
    """

    bug_id: str
    components: frozenset[str]
    files: frozenset[tuple[str, str]]

    def to_json(self) -> dict:
        return {
            "bug_id": self.bug_id,
            "components": sorted(self.components),
            "files": [[repo, path] for repo, path in sorted(self.files)],
        }


def attribute_bugs(
    reports: Iterable,
    changes_by_bug: Mapping[str, Sequence[ChangeInfo]],
    cmap: ComponentMap,
) -> list[Attribution]:
    """One Attribution per bug with at least one resolved change, in report
    order.  Bugs without resolved changes get none (they still count in the
    non-component dimensions)."""
    attributions = []
    for report in reports:
        changes = changes_by_bug.get(report.bug_id) or ()
        if not changes:
            continue
        components: set[str] = set()
        files: set[tuple[str, str]] = set()
        for change in changes:
            components |= map_change(change, cmap)
            files |= {(change.repository, path) for path in change.changed_files}
        attributions.append(
            Attribution(bug_id=report.bug_id, components=frozenset(components), files=frozenset(files))
        )
    return attributions
