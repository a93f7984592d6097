"""CLI surface and HTTP gateway endpoints."""

from __future__ import annotations

import json
import os

import pytest
from fastapi.testclient import TestClient

from edgearm.cli import main
from edgearm.config import OrchestratorConfig
from edgearm.gateway import HistoryHub, make_api
from edgearm.model import serialize_report
from edgearm.orchestrator import Core
from edgearm.reconciler import SimulatedBackend
from edgearm.watcher import Watcher

from test_watcher import COMPOSE, REQUIREMENTS, make_snapshot

FIG_COMPOSE = """\
version: "3.3"

services:
  web:
    image: localhost:5000/stackdemo
    build: .
    ports:
      - "8000:8000"
  redis:
    image: redis:alpine
"""

FIG_REQUIREMENTS = """\
services:
  redis:
    hardware: 6
    links:
      web:
        bandwidth: 20
        latency: 150
  web:
    hardware: 3
    links:
      redis:
        bandwidth: 50
        latency: 500
"""


def write_config(tmp_path, backend="simulated", simulation="false") -> str:
    state = tmp_path / "state"
    state.mkdir(exist_ok=True)
    config = tmp_path / "config.yml"
    config.write_text(
        f"state_dir: {state}\nbackend: {backend}\nsimulation:\n  enabled: {simulation}\n"
    )
    return str(config)


def seed_report(tmp_path):
    (tmp_path / "state").mkdir(exist_ok=True)
    (tmp_path / "state" / "report.json").write_bytes(serialize_report(make_snapshot()))


def make_app_dir(tmp_path, name="stackdemo"):
    app_dir = tmp_path / name
    app_dir.mkdir()
    (app_dir / "docker-compose.yml").write_text(FIG_COMPOSE)
    (app_dir / "requirements.yml").write_text(FIG_REQUIREMENTS)
    return app_dir


class TestCli:
    def test_add_places_both_services(self, tmp_path, capsys):
        config = write_config(tmp_path)
        seed_report(tmp_path)
        app_dir = make_app_dir(tmp_path)
        assert main(["--config", config, "add", str(app_dir)]) == 0
        out = capsys.readouterr().out
        assert "added stackdemo" in out
        assert "web ->" in out and "redis ->" in out

    def test_exec_all_quiescent_reports_no_actions(self, tmp_path, capsys):
        config = write_config(tmp_path)
        seed_report(tmp_path)
        app_dir = make_app_dir(tmp_path)
        main(["--config", config, "add", str(app_dir)])
        capsys.readouterr()
        assert main(["--config", config, "exec", "--all"]) == 0
        assert "no actions" in capsys.readouterr().out

    def test_rm_logs_stack_removal(self, tmp_path, capsys):
        config = write_config(tmp_path, backend="command-script")
        seed_report(tmp_path)
        app_dir = make_app_dir(tmp_path)
        main(["--config", config, "add", str(app_dir)])
        assert main(["--config", config, "rm", "stackdemo"]) == 0
        script = (tmp_path / "state" / "commands.sh").read_text().splitlines()
        assert "docker stack rm stackdemo" in script

    def test_add_without_compose_fails(self, tmp_path, capsys):
        config = write_config(tmp_path)
        empty = tmp_path / "nothing"
        empty.mkdir()
        assert main(["--config", config, "add", str(empty)]) == 1
        assert "docker-compose.yml" in capsys.readouterr().err

    def test_exec_unknown_app_fails(self, tmp_path, capsys):
        config = write_config(tmp_path)
        seed_report(tmp_path)
        assert main(["--config", config, "exec", "ghost"]) == 1
        assert "unknown app" in capsys.readouterr().err

    def test_status_shows_match(self, tmp_path, capsys):
        config = write_config(tmp_path)
        seed_report(tmp_path)
        app_dir = make_app_dir(tmp_path)
        main(["--config", config, "add", str(app_dir)])
        capsys.readouterr()
        assert main(["--config", config, "status"]) == 0
        out = capsys.readouterr().out
        assert "stackdemo: match" in out

    def test_status_persists_across_invocations(self, tmp_path, capsys):
        config = write_config(tmp_path)
        seed_report(tmp_path)
        app_dir = make_app_dir(tmp_path)
        main(["--config", config, "add", str(app_dir)])
        registry = json.loads((tmp_path / "state" / "registry.json").read_text())
        assert "stackdemo" in registry["apps"]
        assert registry["apps"]["stackdemo"]["desired"]

    def test_watcher_status_when_not_running(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(["--config", config, "watcher", "status"]) == 0
        assert "not running" in capsys.readouterr().out

    def test_watcher_stop_when_not_running_fails(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(["--config", config, "watcher", "stop"]) == 1
        assert "not running" in capsys.readouterr().err

    def test_scenario_writes_jsonl_and_csv(self, tmp_path, capsys):
        out = tmp_path / "log.jsonl"
        csv_path = tmp_path / "summary.csv"
        rc = main(
            [
                "scenario", "--nodes", "4", "--apps", "2", "--ticks", "3",
                "--seed", "5", "--strategy", "cr",
                "--out", str(out), "--csv", str(csv_path),
            ]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines and all(json.loads(l)["tick"] >= 0 for l in lines)
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("strategy,seed,nodes,apps,ticks")


@pytest.fixture
def api(tmp_path):
    core = Core(backend=SimulatedBackend(), clock=lambda: 1000.0)
    app_dir = tmp_path / "alpha"
    app_dir.mkdir()
    (app_dir / "docker-compose.yml").write_text(COMPOSE)
    (app_dir / "requirements.yml").write_text(REQUIREMENTS)
    core.register("alpha", path=str(app_dir))
    report = serialize_report(make_snapshot())
    hub = HistoryHub()
    hub.ingest(report)
    config = OrchestratorConfig()
    watcher = Watcher(core, config, hub.report_bytes)
    snapshot = watcher.latest_snapshot()
    core.reconcile_app("alpha", snapshot)
    client = TestClient(make_api(core, watcher, hub, config))
    return client, core, watcher, hub


class TestHttpApi:
    def test_list_apps_has_match_flag(self, api):
        client, core, watcher, hub = api
        body = client.get("/apps").json()
        assert body["apps"][0]["app_id"] == "alpha"
        assert body["apps"][0]["match"] is True

    def test_app_detail_mismatch_after_backend_drift(self, api):
        client, core, watcher, hub = api
        current = core.backend.state["alpha"]
        current["web"] = "n2" if current["web"] == "n1" else "n1"
        detail = client.get("/apps/alpha").json()
        assert detail["match"] is False
        per_service = {s["service_id"]: s for s in detail["services"]}
        assert per_service["web"]["desired"] != per_service["web"]["current"]
        assert detail["files"]["compose"] == COMPOSE

    def test_unknown_app_404(self, api):
        client, *_ = api
        assert client.get("/apps/ghost").status_code == 404
        assert client.delete("/apps/ghost").status_code == 404
        assert client.post("/apps/ghost/exec").status_code == 404

    def test_put_invalid_yaml_is_rejected_and_not_enqueued(self, api):
        client, core, watcher, hub = api
        response = client.put("/apps/alpha/files", json={"requirements": "services:\n  a:\n    hardware: -5\n"})
        assert response.status_code == 400
        assert len(watcher.queue) == 0

    def test_put_valid_files_enqueues_fifo(self, api):
        client, core, watcher, hub = api
        r1 = client.put("/apps/alpha/files", json={"requirements": REQUIREMENTS})
        r2 = client.post("/apps/alpha/exec")
        assert r1.status_code == 202 and r2.status_code == 202
        assert r1.json()["queued_position"] == 1
        assert r2.json()["queued_position"] == 2
        drained = watcher.queue.drain()
        assert [c.kind for c in drained] == ["update_files", "exec_app"]

    def test_delete_enqueues_removal(self, api):
        client, core, watcher, hub = api
        assert client.delete("/apps/alpha").status_code == 202
        watcher.tick_commands()
        assert "alpha" not in core.apps

    def test_raw_report_is_bit_exact(self, api):
        client, core, watcher, hub = api
        response = client.get("/infra/report")
        assert response.content == hub.latest_bytes

    def test_node_history_and_404(self, api):
        client, *_ = api
        body = client.get("/infra/nodes/n1").json()
        assert body["state"]["id"] == "n1"
        assert body["history"][0][2] == 100
        assert client.get("/infra/nodes/zz").status_code == 404

    def test_link_detail_and_404(self, api):
        client, *_ = api
        body = client.get("/infra/links/n1/n2").json()
        assert body["latency_ms"] == 10.0
        assert body["history"]
        assert client.get("/infra/links/n1/zz").status_code == 404

    def test_service_history_tracks_deploys(self, api):
        client, core, watcher, hub = api
        hub.note_service_count(2)
        body = client.get("/history/services").json()
        assert body["history"][-1][2] == 2

    def test_reads_do_not_mutate_state(self, api):
        client, core, watcher, hub = api
        before = (
            core.to_dict(),
            core.ledger.as_dict(),
            len(watcher.queue),
            core.reasoning_steps,
        )
        for path in (
            "/apps", "/apps/alpha", "/infra", "/infra/report",
            "/infra/nodes/n1", "/infra/links/n1/n2", "/history/services",
        ):
            assert client.get(path).status_code == 200
        after = (
            core.to_dict(),
            core.ledger.as_dict(),
            len(watcher.queue),
            core.reasoning_steps,
        )
        assert before == after
