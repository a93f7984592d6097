"""Daemon assembly: wires the simulated world, the monitoring overlay, the
orchestration core, the watcher, and the HTTP gateway into one process, and
persists registry/backend state across CLI invocations.

State lives in the configured state directory: ``registry.json`` (managed
apps, desired placements, backend state), ``report.json`` (the latest
published infrastructure report), ``commands.sh`` (the command-script
backend's output), and ``watcher.pid`` while the daemon runs.
"""

from __future__ import annotations

import fcntl
import json
import os
import threading

from .config import OrchestratorConfig
from .dynamics import PerturbationModel, build_testbed, perturb, sqrt_groups
from .orchestrator import Core
from .overlay import Monitor
from .reconciler import CommandScriptBackend, SimulatedBackend
from .watcher import Watcher


class StateLock:
    """Exclusive advisory lock serializing CLI and daemon state mutations."""

    def __init__(self, state_dir: str):
        os.makedirs(state_dir, exist_ok=True)
        self.path = os.path.join(state_dir, ".lock")
        self._fh = None

    def __enter__(self):
        self._fh = open(self.path, "a+")
        fcntl.flock(self._fh, fcntl.LOCK_EX)
        return self

    def __exit__(self, *exc):
        fcntl.flock(self._fh, fcntl.LOCK_UN)
        self._fh.close()
        self._fh = None


def make_backend(config: OrchestratorConfig):
    if config.backend == "command-script":
        return CommandScriptBackend(config.script_path)
    return SimulatedBackend()


class Runtime:
    """Everything one orchestrator instance needs, daemon or one-shot CLI."""

    def __init__(self, config: OrchestratorConfig):
        self.config = config
        os.makedirs(config.state_dir, exist_ok=True)
        self.backend = make_backend(config)
        self.core = Core(backend=self.backend)
        self.load_state()

        self.gt = None
        self.monitor = None
        self.perturbation = None
        sim = config.simulation
        if sim.enabled:
            self.gt = build_testbed(sim.nodes, sim.regions)
            self.monitor = Monitor(
                self.gt,
                sensitivity=config.sensitivity,
                restructure_every=sim.restructure_every,
                k_fn=sqrt_groups,
            )
            self.monitor.bootstrap()
            if sim.perturb:
                self.perturbation = PerturbationModel.seeded(sim.seed)

        self._report_bytes: bytes | None = None
        if os.path.exists(config.report_path):
            with open(config.report_path, "rb") as fh:
                self._report_bytes = fh.read()

        from .gateway import HistoryHub

        self.hub = HistoryHub()
        if self._report_bytes is not None:
            self.hub.ingest(self._report_bytes)
        self.watcher = Watcher(self.core, config, self.report_bytes)
        self.core.on_reconciled.append(self._after_reconcile)

    # -- report stream ---------------------------------------------------------

    def report_bytes(self) -> bytes | None:
        return self._report_bytes

    def publish(self, report: bytes) -> None:
        tmp = self.config.report_path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(report)
        os.replace(tmp, self.config.report_path)
        self._report_bytes = report
        self.hub.ingest(report)

    def pump_monitor(self) -> bytes | None:
        """One monitoring period of the simulated world."""
        if self.monitor is None:
            return None
        self.monitor.sensitivity = self.config.sensitivity  # follows hot reloads
        if self.perturbation is not None:
            perturb(self.gt, self.perturbation)
        report = self.monitor.tick()
        if report is not None:
            self.publish(report)
        return report

    def ensure_report(self) -> bytes | None:
        """Publish an initial report if none exists yet (fresh state dir)."""
        if self._report_bytes is None and self.monitor is not None:
            self.pump_monitor()
        return self._report_bytes

    def _after_reconcile(self, app_id, outcome) -> None:
        total = sum(len(s.current) for s in self.core.statuses())
        self.hub.note_service_count(total)

    # -- persistence -------------------------------------------------------------

    def load_state(self) -> None:
        path = self.config.registry_path
        if not os.path.exists(path):
            return
        with open(path, "r", encoding="utf-8") as fh:
            self.core.restore(json.load(fh))

    def save_state(self) -> None:
        path = self.config.registry_path
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.core.to_dict(), fh, indent=1, sort_keys=True)
        os.replace(tmp, path)

    # -- daemon ---------------------------------------------------------------

    def serve_forever(self, stop_event: threading.Event | None = None) -> None:
        """Run the watcher loops, the monitor pump, and the HTTP API until
        stopped (SIGTERM/SIGINT or the given event)."""
        import signal

        import uvicorn

        from .gateway import make_api

        stop = stop_event or threading.Event()

        def handle(signum, frame):
            stop.set()

        try:
            signal.signal(signal.SIGTERM, handle)
            signal.signal(signal.SIGINT, handle)
        except ValueError:
            pass  # not the main thread (in-process test harness)

        self.ensure_report()

        threads = [threading.Thread(target=self.watcher.run, args=(stop,), daemon=True)]
        if self.monitor is not None:
            def pump_loop():
                while not stop.is_set():
                    try:
                        self.pump_monitor()
                    except Exception:
                        import logging

                        logging.getLogger(__name__).exception("monitor pump failed")
                    stop.wait(self.config.simulation.monitor_period)

            threads.append(threading.Thread(target=pump_loop, daemon=True))

        api = make_api(self.core, self.watcher, self.hub, self.config)
        server = uvicorn.Server(
            uvicorn.Config(
                api,
                host=self.config.api_host,
                port=self.config.api_port,
                log_level="warning",
            )
        )
        threads.append(threading.Thread(target=server.run, daemon=True))

        for thread in threads:
            thread.start()
        try:
            while not stop.is_set():
                stop.wait(0.2)
        finally:
            server.should_exit = True
            with StateLock(self.config.state_dir):
                self.save_state()
