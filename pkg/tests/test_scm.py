import json
from datetime import datetime, timezone

import pytest

from multidimer.extract import CommitRef, RefKind
from multidimer.scm import (
    AnomalyReason,
    BackendFailure,
    FixtureBackend,
    GerritBackend,
    GerritStubServer,
    RefAmbiguous,
    RefNotFound,
    Resolver,
    parse_gerrit_change_response,
)

WHEN = datetime(2025, 6, 1, tzinfo=timezone.utc)
FIXED_CLOCK = lambda: WHEN  # noqa: E731

SHA_A = "aa" * 20
SHA_B = "ab" + "cd" * 19
CID = "I" + "0f" * 20


def ref(value, kind=RefKind.GIT_SHA, bug="B1"):
    return CommitRef(kind=kind, value=value, span=(0, len(value)), source_bug_id=bug)


def write_fixtures(tmp_path, records):
    fixture_dir = tmp_path / "fixtures"
    fixture_dir.mkdir(exist_ok=True)
    lines = [json.dumps(record) for record in records]
    (fixture_dir / "changes.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return fixture_dir


def standard_fixtures(tmp_path):
    return write_fixtures(
        tmp_path,
        [
            {
                "ref": {"kind": "GIT_SHA", "value": SHA_A},
                "repository": "billing-core",
                "changed_files": ["src/a.c", "src/b.c"],
            },
            {
                "ref": {"kind": "GIT_SHA", "value": SHA_B},
                "repository": "mono",
                "changed_files": ["src/ui/x.c"],
            },
            {
                "ref": {"kind": "GERRIT_CHANGE_ID", "value": CID},
                "repository": "mono",
                "changed_files": ["src/core/y.c"],
            },
        ],
    )


# --- wire format parsing -------------------------------------------------

def test_parse_strips_xssi_prefix():
    body = b")]}'\n" + json.dumps(
        {"project": "repo-x", "files": {"/COMMIT_MSG": {}, "src/m.c": {}}}
    ).encode()
    project, files, warnings = parse_gerrit_change_response(body)
    assert (project, files, warnings) == ("repo-x", ["src/m.c"], [])


def test_parse_without_prefix_warns_but_parses():
    body = json.dumps({"project": "repo-x", "files": {"src/m.c": {}}}).encode()
    project, files, warnings = parse_gerrit_change_response(body)
    assert project == "repo-x" and files == ["src/m.c"]
    assert len(warnings) == 1


def test_parse_excludes_merge_list():
    body = b")]}'\n" + json.dumps(
        {"project": "p", "files": {"/MERGE_LIST": {}, "/COMMIT_MSG": {}, "a.c": {}}}
    ).encode()
    assert parse_gerrit_change_response(body)[1] == ["a.c"]


def test_parse_standard_revision_shape():
    body = b")]}'\n" + json.dumps(
        {
            "project": "p",
            "current_revision": "r1",
            "revisions": {"r1": {"files": {"/COMMIT_MSG": {}, "deep/z.c": {}}}},
        }
    ).encode()
    assert parse_gerrit_change_response(body)[1] == ["deep/z.c"]


def test_parse_empty_body_is_backend_error():
    with pytest.raises(BackendFailure):
        parse_gerrit_change_response(b"")


def test_parse_missing_project_is_backend_error():
    with pytest.raises(BackendFailure):
        parse_gerrit_change_response(b")]}'\n{\"files\": {}}")


# --- fixture backend ------------------------------------------------------

def test_fixture_exact_hit(tmp_path):
    backend = FixtureBackend(standard_fixtures(tmp_path))
    assert backend.fetch(RefKind.GIT_SHA, SHA_A) == ("billing-core", ["src/a.c", "src/b.c"])


def test_fixture_prefix_hit_and_case(tmp_path):
    backend = FixtureBackend(standard_fixtures(tmp_path))
    assert backend.fetch(RefKind.GIT_SHA, SHA_A[:9].upper())[0] == "billing-core"


def test_fixture_ambiguous_prefix(tmp_path):
    backend = FixtureBackend(standard_fixtures(tmp_path))
    with pytest.raises(RefAmbiguous):
        backend.fetch(RefKind.GIT_SHA, "a")  # both aa... and ab... start with a
    # but 7+ char prefixes used by the pipeline are unambiguous here
    assert backend.fetch(RefKind.GIT_SHA, SHA_B[:7])[0] == "mono"


def test_fixture_not_found(tmp_path):
    backend = FixtureBackend(standard_fixtures(tmp_path))
    with pytest.raises(RefNotFound):
        backend.fetch(RefKind.GIT_SHA, "9999999")


# --- resolver ---------------------------------------------------------—--

def test_resolve_empty():
    class NeverCalled:
        def fetch(self, kind, value):  # pragma: no cover
            raise AssertionError

    assert Resolver(NeverCalled()).resolve([]) == ([], [])


def test_resolve_partitions_and_orders(tmp_path):
    backend = FixtureBackend(standard_fixtures(tmp_path))
    resolver = Resolver(backend, parallelism=3, clock=FIXED_CLOCK)
    refs = [
        ref(SHA_A),
        ref("9999999"),  # not found
        ref(CID, kind=RefKind.GERRIT_CHANGE_ID),
        ref(SHA_A.upper(), bug="B2"),  # duplicate after normalization
    ]
    changes, anomalies = resolver.resolve(refs)
    assert [c.ref.value for c in changes] == [SHA_A, CID]
    assert changes[0].changed_files == ("src/a.c", "src/b.c")
    assert [a.ref.value for a in anomalies] == ["9999999"]
    assert anomalies[0].reason is AnomalyReason.NOT_FOUND
    # partition: deduplicated refs = changes + anomalies
    assert len(changes) + len(anomalies) == 3


def test_resolve_uses_cache_within_job(tmp_path):
    calls = []

    class CountingBackend:
        def __init__(self, inner):
            self.inner = inner

        def fetch(self, kind, value):
            calls.append((kind, value.lower()))
            return self.inner.fetch(kind, value)

    backend = CountingBackend(FixtureBackend(standard_fixtures(tmp_path)))
    resolver = Resolver(backend, parallelism=1, clock=FIXED_CLOCK)
    first = resolver.resolve([ref(SHA_A), ref(SHA_A.upper())])
    second = resolver.resolve([ref(SHA_A)])
    assert len(calls) == 1
    assert first[0][0] == second[0][0]


def test_resolve_empty_file_set_is_not_found(tmp_path):
    fixture_dir = write_fixtures(
        tmp_path,
        [{"ref": {"kind": "GIT_SHA", "value": SHA_A}, "repository": "r", "changed_files": []}],
    )
    resolver = Resolver(FixtureBackend(fixture_dir), clock=FIXED_CLOCK)
    changes, anomalies = resolver.resolve([ref(SHA_A)])
    assert changes == []
    assert anomalies[0].reason is AnomalyReason.NOT_FOUND


def test_resolve_malformed_path_is_backend_error(tmp_path):
    fixture_dir = write_fixtures(
        tmp_path,
        [
            {
                "ref": {"kind": "GIT_SHA", "value": SHA_A},
                "repository": "r",
                "changed_files": ["../escape.c"],
            }
        ],
    )
    resolver = Resolver(FixtureBackend(fixture_dir), clock=FIXED_CLOCK)
    _, anomalies = resolver.resolve([ref(SHA_A)])
    assert anomalies[0].reason is AnomalyReason.BACKEND_ERROR


def test_resolve_deduplicates_changed_files(tmp_path):
    fixture_dir = write_fixtures(
        tmp_path,
        [
            {
                "ref": {"kind": "GIT_SHA", "value": SHA_A},
                "repository": "r",
                "changed_files": ["src/a.c", "src/a.c", "src/b.c"],
            }
        ],
    )
    resolver = Resolver(FixtureBackend(fixture_dir), clock=FIXED_CLOCK)
    changes, _ = resolver.resolve([ref(SHA_A)])
    assert changes[0].changed_files == ("src/a.c", "src/b.c")


def test_disk_cache_round_trip(tmp_path):
    fixture_dir = standard_fixtures(tmp_path)
    cache_path = tmp_path / "cache.jsonl"
    warm = Resolver(FixtureBackend(fixture_dir), disk_cache_path=cache_path, clock=FIXED_CLOCK)
    first = warm.resolve([ref(SHA_A), ref("9999999")])

    class Unreachable:
        def fetch(self, kind, value):  # pragma: no cover
            raise AssertionError("cache must answer")

    cold = Resolver(Unreachable(), disk_cache_path=cache_path, clock=FIXED_CLOCK)
    second = cold.resolve([ref(SHA_A), ref("9999999")])
    assert first == second


# --- wire adapter against the stub server ---------------------------------

def test_wire_adapter_equals_fixture_backend(tmp_path):
    fixture = FixtureBackend(standard_fixtures(tmp_path))
    refs = [
        ref(SHA_A),
        ref(SHA_B[:8]),
        ref(CID, kind=RefKind.GERRIT_CHANGE_ID),
        ref("9999999"),
        ref("a"),  # ambiguous prefix
    ]
    direct = Resolver(fixture, clock=FIXED_CLOCK).resolve(refs)
    with GerritStubServer(fixture) as stub:
        wire = GerritBackend(stub.url, token="secret")
        over_wire = Resolver(wire, clock=FIXED_CLOCK).resolve(refs)
    direct_changes, direct_anomalies = direct
    wire_changes, wire_anomalies = over_wire
    assert direct_changes == wire_changes
    assert [(a.ref, a.reason) for a in direct_anomalies] == [
        (a.ref, a.reason) for a in wire_anomalies
    ]


def test_wire_adapter_unreachable_is_backend_error():
    backend = GerritBackend("http://127.0.0.1:1", timeout=0.2)
    resolver = Resolver(backend, clock=FIXED_CLOCK)
    changes, anomalies = resolver.resolve([ref(SHA_A)])
    assert changes == []
    assert anomalies[0].reason is AnomalyReason.BACKEND_ERROR


def test_wire_adapter_sends_bearer_token(monkeypatch):
    captured = {}

    class RecordingSession:
        def get(self, url, headers=None, timeout=None):
            captured["url"] = url
            captured["headers"] = headers or {}

            class FakeResponse:
                status_code = 200
                content = b")]}'\n" + json.dumps(
                    {"project": "p", "files": {"a.c": {}}}
                ).encode()

            return FakeResponse()

    monkeypatch.setenv("MULTIDIMER_SCM_TOKEN", "sekrit")
    backend = GerritBackend("http://gerrit.example", session=RecordingSession())
    assert backend.fetch(RefKind.GIT_SHA, SHA_A) == ("p", ["a.c"])
    assert captured["headers"]["Authorization"] == "Bearer sekrit"
    assert "o=CURRENT_REVISION" in captured["url"] and "o=CURRENT_FILES" in captured["url"]


def test_wire_adapter_no_token_no_header(monkeypatch):
    captured = {}

    class RecordingSession:
        def get(self, url, headers=None, timeout=None):
            captured["headers"] = headers or {}

            class FakeResponse:
                status_code = 404
                content = b""
                text = ""

            return FakeResponse()

    monkeypatch.delenv("MULTIDIMER_SCM_TOKEN", raising=False)
    backend = GerritBackend("http://gerrit.example", session=RecordingSession())
    with pytest.raises(RefNotFound):
        backend.fetch(RefKind.GIT_SHA, SHA_A)
    assert "Authorization" not in captured["headers"]
