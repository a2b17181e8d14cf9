import json
from pathlib import Path

import pytest

from multidimer.cli import main


@pytest.fixture()
def demo(tmp_path):
    spec = {"seed": 7, "n_bugs": 60, "broken_ref_rate": 0.05}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec), encoding="utf-8")
    out = tmp_path / "demo"
    assert main(["gen", "--spec", str(spec_path), "--out", str(out)]) == 0
    return out


def lines(path):
    return [l for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]


def test_ingest_exit_zero_iff_clean(demo, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code = main(
        ["ingest", "--input", str(demo / "corpus.jsonl"), "--format", "jsonl", "--report", str(report_path)]
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report == {"accepted": 60, "rejected": 0, "rejection_reasons": []}

    corrupted = tmp_path / "bad.jsonl"
    corrupted.write_text((demo / "corpus.jsonl").read_text(encoding="utf-8") + "{broken\n", encoding="utf-8")
    assert main(["ingest", "--input", str(corrupted), "--format", "jsonl"]) == 1


def test_pipeline_commands_chain(demo, tmp_path):
    manifest = json.loads((demo / "manifest.json").read_text(encoding="utf-8"))
    refs_path = tmp_path / "refs.jsonl"
    assert main(["extract", "--input", str(demo / "corpus.jsonl"), "--out", str(refs_path)]) == 0
    assert len(lines(refs_path)) == manifest["totals"]["refs_total"]

    changes_path = tmp_path / "changes.jsonl"
    anomalies_path = tmp_path / "anomalies.jsonl"
    assert (
        main(
            [
                "resolve",
                "--refs", str(refs_path),
                "--backend", str(demo / "scm.json"),
                "--out", str(changes_path),
                "--anomalies", str(anomalies_path),
            ]
        )
        == 0
    )
    live = manifest["totals"]["refs_total"] - manifest["totals"]["broken_refs"]
    assert len(lines(changes_path)) == live
    assert len(lines(anomalies_path)) == manifest["totals"]["broken_refs"]

    attribution_path = tmp_path / "attributions.jsonl"
    assert (
        main(
            [
                "map",
                "--corpus", str(demo / "corpus.jsonl"),
                "--changes", str(changes_path),
                "--map", str(demo / "component-map.json"),
                "--out", str(attribution_path),
            ]
        )
        == 0
    )
    assert len(lines(attribution_path)) == manifest["totals"]["attributed_bugs"]


def test_analyze_then_export_with_env_data_dir(demo, tmp_path, monkeypatch):
    store_dir = tmp_path / "store"
    assert (
        main(
            [
                "analyze",
                "--corpus", str(demo / "corpus.jsonl"),
                "--products", "P1",
                "--from", "2025-01-01T00:00:00Z",
                "--to", "2026-01-01T00:00:00Z",
                "--config", str(demo),
                "--out", str(store_dir),
            ]
        )
        == 0
    )
    (snapshot_file,) = (store_dir / "snapshots").glob("*.json")
    snapshot_id = snapshot_file.stem

    out_csv = tmp_path / "export.csv"
    monkeypatch.setenv("MULTIDIMER_DATA_DIR", str(store_dir))
    assert main(["export", "--snapshot", snapshot_id, "--out", str(out_csv)]) == 0
    body = out_csv.read_bytes()
    assert body.startswith(b"bug_id,product_id,release,component,")
    assert body.count(b"\r\n") >= 61  # header + one row per bug at least

    from multidimer.store import SnapshotStore

    assert body == SnapshotStore(store_dir).export_csv(snapshot_id)


def test_unknown_command_exits_with_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2


def test_module_entrypoint_exists():
    # `python -m multidimer.cli --help` path: argparse exits 0 on help
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0
