"""Randomized (path, table) case generator plus a naive longest-prefix
oracle, shared by the mapping tests and the acceptance suite."""

from __future__ import annotations

import random

from multidimer.mapping import ComponentMap, PathRule

_SEGMENTS = ["src", "lib", "ui", "core", "net", "io", "a", "bb", "ccc"]
_COMPONENTS = ["Alpha", "Beta", "Gamma", "Delta", "Epsilon", "Zeta", "Eta", "Theta"]
_REPOS = ["mono", "billing", "legacy", "tools", "edge"]


def naive_component(repo: str, path: str, rules: dict, repo_table: dict) -> str:
    """Enumerate every segment prefix of the path, pick the longest present;
    fall back to the repo table, then UNMAPPED."""
    segments = path.split("/")
    best = None
    for end in range(1, len(segments) + 1):
        prefix = "/".join(segments[:end])
        if (repo, prefix) in rules and (best is None or len(prefix) > len(best[0])):
            best = (prefix, rules[(repo, prefix)])
    if best is not None:
        return best[1]
    return repo_table.get(repo, "UNMAPPED")


def random_case(rng: random.Random):
    """One randomized mapping scenario: a valid ComponentMap plus a batch of
    probe (repo, path) pairs biased toward near-misses."""
    components = rng.sample(_COMPONENTS, rng.randrange(3, 7))
    repos = rng.sample(_REPOS, rng.randrange(2, 5))
    repo_table = {
        repo: rng.choice(components) for repo in repos if rng.random() < 0.6
    }
    rules: dict[tuple[str, str], str] = {}
    for _ in range(rng.randrange(1, 10)):
        repo = rng.choice(repos)
        depth = rng.randrange(1, 4)
        prefix = "/".join(rng.choice(_SEGMENTS) for _ in range(depth))
        rules.setdefault((repo, prefix), rng.choice(components))
    cmap = ComponentMap(
        components=frozenset(components),
        repo_table=repo_table,
        path_table=tuple(
            PathRule(repo=repo, prefix=prefix, component=component)
            for (repo, prefix), component in rules.items()
        ),
    )

    probes = []
    rule_keys = list(rules)
    for _ in range(rng.randrange(3, 9)):
        repo = rng.choice(repos + ["unknown-repo"])
        style = rng.random()
        if rule_keys and style < 0.5:
            # extend an existing prefix so it matches ...
            base_repo, base_prefix = rng.choice(rule_keys)
            repo = base_repo
            tail = [rng.choice(_SEGMENTS) for _ in range(rng.randrange(0, 3))]
            path = "/".join([base_prefix, *tail, "f.c"])
        elif rule_keys and style < 0.7:
            # ... or nearly match it: glue onto the last segment
            base_repo, base_prefix = rng.choice(rule_keys)
            repo = base_repo
            path = base_prefix + "x/f.c"
        else:
            depth = rng.randrange(1, 5)
            path = "/".join(rng.choice(_SEGMENTS) for _ in range(depth)) + "/f.c"
        probes.append((repo, path))
    return cmap, rules, repo_table, probes
