"""REST service over the snapshot store: job control, per-dimension data,
heatmap, tree slices, drill-down bug lists, FST report and CSV download.

Read endpoints are pure functions of the addressed snapshot; nothing here
mutates published snapshots.  Every response names the snapshot it was
computed from (JSON body field, X-Snapshot-Id header for the CSV).
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from multidimer.ingest import query_from_json
from multidimer.model import Dimension, ModelError
from multidimer.service import AnalysisService
from multidimer.store import SnapshotNotFound, StoreError, export_csv


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.code = code
        self.detail = detail


def _dimension(kind: str) -> str:
    try:
        return Dimension(kind).value
    except ValueError:
        raise ApiError(404, "unknown_dimension", f"no dimension named {kind!r}") from None


def _truncate_tree(node: dict, depth: Optional[int]) -> dict:
    out = {
        "name": node["name"],
        "attributions": node["attributions"],
        "distinct_bugs": node["distinct_bugs"],
    }
    children = node.get("children", [])
    if depth is not None and depth <= 0:
        out["truncated"] = bool(children)
        out["children"] = []
        return out
    out["truncated"] = False
    out["children"] = [
        _truncate_tree(child, None if depth is None else depth - 1) for child in children
    ]
    return out


def _table_bug_ids(payload: dict, dimension: str, value: str) -> list[str]:
    table = payload["tables"].get(dimension)
    if table is None:
        raise ApiError(404, "unknown_dimension", f"no dimension named {dimension!r}")
    for row in table["rows"]:
        if row["value"] == value:
            return list(row["bug_ids"])
    raise ApiError(404, "unknown_value", f"{dimension} has no value {value!r}")


def create_app(service: AnalysisService, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="multidimer", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status_code, content={"error": exc.code, "detail": exc.detail})

    def get_snapshot(snapshot_id: str) -> dict:
        try:
            if snapshot_id == "latest":
                return service.store.latest()
            return service.store.get(snapshot_id)
        except SnapshotNotFound as exc:
            raise ApiError(404, "snapshot_not_found", str(exc)) from None

    @app.post("/api/v1/jobs", status_code=202)
    async def submit_job(body: dict) -> dict:
        try:
            query = query_from_json(body)
        except (ModelError, KeyError, TypeError) as exc:
            raise ApiError(422, "invalid_query", str(exc)) from None
        record = service.submit(query)
        return record.to_json()

    @app.get("/api/v1/jobs/{job_id}")
    async def get_job(job_id: str) -> dict:
        try:
            return service.runner.get(job_id).to_json()
        except StoreError as exc:
            raise ApiError(404, "job_not_found", str(exc)) from None

    @app.get("/api/v1/snapshots")
    async def list_snapshots() -> dict:
        return {"snapshots": service.store.list_snapshots()}

    @app.get("/api/v1/snapshots/latest")
    async def latest_snapshot() -> dict:
        payload = get_snapshot("latest")
        return {
            "snapshot_id": payload["snapshot_id"],
            "created_at": payload["created_at"],
            "query": payload["query"],
            "corpus_fingerprint": payload["corpus_fingerprint"],
            "anomaly_count": len(payload.get("anomalies", [])),
        }

    @app.get("/api/v1/snapshots/{snapshot_id}/dimensions/{kind}")
    async def dimension_table(snapshot_id: str, kind: str) -> dict:
        payload = get_snapshot(snapshot_id)
        dimension = _dimension(kind)
        table = payload["tables"][dimension]
        return {
            "snapshot_id": payload["snapshot_id"],
            "dimension": dimension,
            "rows": [{"value": row["value"], "count": row["count"]} for row in table["rows"]],
        }

    @app.get("/api/v1/snapshots/{snapshot_id}/heatmap")
    async def heatmap(snapshot_id: str) -> dict:
        payload = get_snapshot(snapshot_id)
        matrix = payload["heatmap"]
        return {
            "snapshot_id": payload["snapshot_id"],
            "releases": matrix["releases"],
            "components": matrix["components"],
            "cells": matrix["cells"],
        }

    @app.get("/api/v1/snapshots/{snapshot_id}/tree")
    async def tree(snapshot_id: str, depth: Optional[int] = None) -> dict:
        payload = get_snapshot(snapshot_id)
        return {
            "snapshot_id": payload["snapshot_id"],
            "tree": _truncate_tree(payload["source_tree"], depth),
        }

    @app.get("/api/v1/snapshots/{snapshot_id}/crosstab")
    async def crosstab(snapshot_id: str, a: str, b: str) -> dict:
        payload = get_snapshot(snapshot_id)
        dim_a, dim_b = _dimension(a), _dimension(b)
        if dim_a == dim_b:
            raise ApiError(422, "invalid_crosstab", "the two dimensions must differ")
        precomputed = payload.get("cross_tabs", {}).get(f"{dim_a}_x_{dim_b}")
        if precomputed is not None:
            return {
                "snapshot_id": payload["snapshot_id"],
                "a": dim_a,
                "b": dim_b,
                "row_values": precomputed["row_values"],
                "col_values": precomputed["col_values"],
                "cells": precomputed["cells"],
            }
        # Any other pair derives from the per-row bug lists; row order
        # follows the snapshot's presentation order for each axis.
        rows_a = {row["value"]: set(row["bug_ids"]) for row in payload["tables"][dim_a]["rows"]}
        rows_b = {row["value"]: set(row["bug_ids"]) for row in payload["tables"][dim_b]["rows"]}
        order_a = payload["axis_orders"][dim_a]
        order_b = payload["axis_orders"][dim_b]
        cells = [
            [len(rows_a[va] & rows_b[vb]) for vb in order_b]
            for va in order_a
        ]
        return {
            "snapshot_id": payload["snapshot_id"],
            "a": dim_a,
            "b": dim_b,
            "row_values": list(order_a),
            "col_values": list(order_b),
            "cells": cells,
        }

    @app.get("/api/v1/snapshots/{snapshot_id}/bugs")
    async def drill_down(
        snapshot_id: str,
        dim: str,
        value: str,
        dim2: Optional[str] = None,
        value2: Optional[str] = None,
        limit: Optional[int] = None,
        offset: int = 0,
    ) -> dict:
        payload = get_snapshot(snapshot_id)
        dimension = _dimension(dim)
        bug_ids = _table_bug_ids(payload, dimension, value)
        if dim2 is not None:
            if value2 is None:
                raise ApiError(422, "invalid_drilldown", "value2 required with dim2")
            other = set(_table_bug_ids(payload, _dimension(dim2), value2))
            bug_ids = [bug_id for bug_id in bug_ids if bug_id in other]
        total = len(bug_ids)
        window = bug_ids[offset: offset + limit if limit is not None else None]
        summaries = []
        for bug_id in window:
            record = payload["bugs"][bug_id]
            summaries.append(
                {
                    "bug_id": bug_id,
                    "title": record["title"],
                    "severity": record["severity"],
                    "status": record["status"],
                    "tracker_url": record["tracker_url"],
                    "created_at": record["created_at"],
                }
            )
        return {
            "snapshot_id": payload["snapshot_id"],
            "dimension": dimension,
            "value": value,
            "dimension2": _dimension(dim2) if dim2 is not None else None,
            "value2": value2,
            "total": total,
            "bugs": summaries,
        }

    @app.get("/api/v1/snapshots/{snapshot_id}/fst")
    async def fst(snapshot_id: str) -> dict:
        payload = get_snapshot(snapshot_id)
        return {"snapshot_id": payload["snapshot_id"], **payload["fst"]}

    @app.get("/api/v1/snapshots/{snapshot_id}/export.csv")
    async def export(snapshot_id: str) -> Response:
        payload = get_snapshot(snapshot_id)
        body = export_csv(payload)
        return Response(
            content=body,
            media_type="text/csv; charset=utf-8",
            headers={
                "X-Snapshot-Id": payload["snapshot_id"],
                "Content-Disposition": f'attachment; filename="{payload["snapshot_id"]}.csv"',
            },
        )

    @app.put("/api/v1/config/component-map")
    async def update_component_map(body: dict) -> dict:
        try:
            service.update_component_map(body)
        except (ModelError, KeyError, TypeError) as exc:
            raise ApiError(422, "invalid_component_map", str(exc)) from None
        return {"status": "ok", "note": "applies to future jobs only"}

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    port: int,
    data_dir: Path | str,
    ui_dir: Optional[Path | str] = None,
    schedule_hours: Optional[float] = None,
    schedule_products: Optional[list[str]] = None,
) -> None:
    """Run the service; store must initialize or startup fails."""
    import threading
    import time
    from datetime import timedelta

    import uvicorn

    from multidimer.ingest import CorpusQuery
    from multidimer.model import parse_utc

    service = AnalysisService(data_dir)
    if schedule_hours:
        if not schedule_products:
            raise ModelError("scheduling needs --schedule-products")
        products = frozenset(schedule_products)

        def full_window_query(now) -> CorpusQuery:
            return CorpusQuery(
                product_ids=products,
                from_ts=parse_utc("1970-01-01T00:00:00Z"),
                to_ts=now,
            )

        schedule = service.enable_schedule(timedelta(hours=schedule_hours), full_window_query)

        def tick_loop() -> None:
            while True:
                schedule.run_pending()
                time.sleep(1.0)

        threading.Thread(target=tick_loop, daemon=True).start()

    resolved_ui = Path(ui_dir) if ui_dir else None
    if resolved_ui is None:
        for candidate in (Path(data_dir) / "ui", Path("frontend") / "dist"):
            if candidate.is_dir():
                resolved_ui = candidate
                break
    app = create_app(service, ui_dir=resolved_ui)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
