"""HTTP gateway: read endpoints feeding the dashboard and write endpoints that
enqueue operator commands for the watcher.

Reads never mutate orchestrator state. Writes are validated with the
descriptor parsers (the operator gets synchronous syntax feedback), then
enqueued; their effects are applied asynchronously by the watcher, so every
write returns 202 with its queue position. Time-series panels are served from
bounded in-memory rings keyed by report sequence number plus an ISO wall-clock
timestamp for display.
"""

from __future__ import annotations

import json
import os
import threading
from collections import deque
from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Request, Response

from . import descriptors
from .errors import MalformedDescriptor
from .model import InfrastructureSnapshot, parse_report
from .orchestrator import AppStatus, Core
from .watcher import Command, Watcher

HISTORY_POINTS = 1000


def _now_iso() -> str:
    return datetime.now(tz=timezone.utc).isoformat()


class HistoryHub:
    """Bounded time-series storage fed by published reports and reconciles."""

    def __init__(self, points: int = HISTORY_POINTS):
        self.points = points
        self.latest_bytes: bytes | None = None
        self.latest: InfrastructureSnapshot | None = None
        self.node_count: deque = deque(maxlen=points)
        self.service_count: deque = deque(maxlen=points)
        self.node_series: dict[str, deque] = {}
        self.link_series: dict[tuple[str, str], deque] = {}
        self._lock = threading.Lock()

    def ingest(self, report: bytes) -> InfrastructureSnapshot:
        snapshot = parse_report(report)
        iso = _now_iso()
        with self._lock:
            self.latest_bytes = report
            self.latest = snapshot
            alive = sum(1 for n in snapshot.nodes.values() if n.alive)
            self.node_count.append((snapshot.timestamp, iso, alive))
            for node in snapshot.nodes.values():
                series = self.node_series.setdefault(node.node_id, deque(maxlen=self.points))
                series.append((snapshot.timestamp, iso, node.free_hw))
            for link in snapshot.links.values():
                series = self.link_series.setdefault(
                    (link.src, link.dst), deque(maxlen=self.points)
                )
                series.append((snapshot.timestamp, iso, link.latency_ms, link.bandwidth_mbps))
        return snapshot

    def note_service_count(self, count: int) -> None:
        with self._lock:
            seq = self.latest.timestamp if self.latest else 0
            self.service_count.append((seq, _now_iso(), count))

    def report_bytes(self) -> bytes | None:
        return self.latest_bytes


def _status_json(status: AppStatus) -> dict:
    return {
        "app_id": status.app_id,
        "desired": status.desired,
        "current": status.current,
        "match": status.match,
        "last_update": list(status.last_update) if status.last_update else None,
        "uptime_s": round(status.uptime_s, 3),
        "degraded": status.degraded,
    }


def _read_text(path: str) -> str | None:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError:
        return None


def make_api(core: Core, watcher: Watcher, hub: HistoryHub, config) -> FastAPI:
    app = FastAPI(title="edge-arm gateway", docs_url=None, redoc_url=None)

    def _require_app(app_id: str):
        if app_id not in core.apps:
            raise HTTPException(status_code=404, detail=f"unknown app {app_id!r}")
        return core.apps[app_id]

    @app.get("/apps")
    def list_apps():
        return {"apps": [_status_json(s) for s in core.statuses()]}

    @app.get("/apps/{app_id}")
    def app_detail(app_id: str):
        record = _require_app(app_id)
        status = core.status(app_id)
        compose = requirements = None
        if record.path is not None:
            compose = _read_text(os.path.join(record.path, descriptors.COMPOSE_FILE))
            requirements = _read_text(os.path.join(record.path, descriptors.REQUIREMENTS_FILE))
        elif record.inline_spec is not None:
            compose = descriptors.serialize_compose(record.inline_spec.images)
            requirements = descriptors.serialize_requirements(record.inline_spec.services)
        services = sorted(set(status.desired) | set(status.current))
        return {
            **_status_json(status),
            "files": {"compose": compose, "requirements": requirements},
            "services": [
                {
                    "service_id": sid,
                    "desired": status.desired.get(sid),
                    "current": status.current.get(sid),
                }
                for sid in services
            ],
        }

    @app.put("/apps/{app_id}/files", status_code=202)
    async def update_files(app_id: str, request: Request):
        _require_app(app_id)
        body = await request.json()
        compose = body.get("compose")
        requirements = body.get("requirements")
        if compose is None and requirements is None:
            raise HTTPException(status_code=400, detail="no file content provided")
        try:
            from .watcher import validate_files_payload

            validate_files_payload(compose, requirements)
        except MalformedDescriptor as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        position = watcher.queue.enqueue(
            Command("update_files", app_id, compose=compose, requirements=requirements)
        )
        return {"queued_position": position}

    @app.post("/apps/{app_id}/exec", status_code=202)
    def exec_app(app_id: str):
        _require_app(app_id)
        position = watcher.queue.enqueue(Command("exec_app", app_id))
        return {"queued_position": position}

    @app.delete("/apps/{app_id}", status_code=202)
    def remove_app(app_id: str):
        _require_app(app_id)
        position = watcher.queue.enqueue(Command("remove_app", app_id))
        return {"queued_position": position}

    @app.get("/infra")
    def infra():
        snapshot = hub.latest
        return {
            "report": None if snapshot is None else json.loads(hub.latest_bytes),
            "node_count_history": [list(p) for p in hub.node_count],
            "hardware_unit": config.hardware_unit,
        }

    @app.get("/infra/report")
    def raw_report():
        data = hub.report_bytes()
        if data is None:
            raise HTTPException(status_code=404, detail="no report published yet")
        return Response(content=data, media_type="application/json")

    @app.get("/infra/nodes/{node_id}")
    def node_detail(node_id: str):
        snapshot = hub.latest
        if snapshot is None or node_id not in snapshot.nodes:
            raise HTTPException(status_code=404, detail=f"unknown node {node_id!r}")
        node = snapshot.nodes[node_id]
        deployed = []
        for status in core.statuses():
            deployed += [
                {"app_id": status.app_id, "service_id": sid}
                for sid, nid in sorted(status.current.items())
                if nid == node_id
            ]
        return {
            "state": {
                "id": node.node_id,
                "free_hw": node.free_hw,
                "software": sorted(node.software),
                "iot": sorted(node.iot_devices),
                "alive": node.alive,
            },
            "history": [list(p) for p in hub.node_series.get(node_id, [])],
            "services": deployed,
        }

    @app.get("/infra/links/{src}/{dst}")
    def link_detail(src: str, dst: str):
        series = hub.link_series.get((src, dst))
        snapshot = hub.latest
        link = snapshot.link(src, dst) if snapshot is not None else None
        if link is None and not series:
            raise HTTPException(status_code=404, detail=f"unknown link {src}->{dst}")
        return {
            "src": src,
            "dst": dst,
            "latency_ms": link.latency_ms if link else None,
            "bandwidth_mbps": link.bandwidth_mbps if link else None,
            "alive": link.alive if link else False,
            "history": [list(p) for p in (series or [])],
        }

    @app.get("/history/services")
    def service_history():
        return {"history": [list(p) for p in hub.service_count]}

    return app
