"""The autonomic trigger: four independently scheduled polling sources that
detect change by hashing and funnel every affected application through one
serialized reasoning executor.

Sources: the per-application descriptor files (CI/CD), the published
infrastructure report, desired-versus-actual placement drift, and operator
commands queued by the gateway. Digests are SHA-256 of the exact file bytes
and are only advanced after the corresponding trigger has been recorded, so a
crash between ticks never loses a change. Simultaneous triggers for one
application coalesce into a single reasoning step.
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
import time
from dataclasses import dataclass

from . import descriptors
from .model import InfrastructureSnapshot, Placement, parse_report
from .orchestrator import Core

log = logging.getLogger(__name__)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class Command:
    kind: str  # update_files | exec_app | remove_app
    app_id: str
    compose: str | None = None
    requirements: str | None = None

    def __post_init__(self):
        if self.kind not in ("update_files", "exec_app", "remove_app"):
            raise ValueError(f"unknown command kind {self.kind!r}")
        if self.kind == "update_files" and self.compose is None and self.requirements is None:
            raise ValueError("update_files must carry at least one file")


class CommandQueue:
    """FIFO with atomic enqueue; the watcher is the only drainer."""

    def __init__(self):
        self._items: list[Command] = []
        self._lock = threading.Lock()

    def enqueue(self, command: Command) -> int:
        with self._lock:
            self._items.append(command)
            return len(self._items)

    def drain(self) -> list[Command]:
        with self._lock:
            items, self._items = self._items, []
            return items

    def __len__(self):
        with self._lock:
            return len(self._items)


class Watcher:
    """Polls the four change sources and runs reasoning for triggered apps.

    ``report_provider`` returns the latest published report bytes (or None if
    nothing has been published yet); reasoning always runs against the parsed
    latest report.
    """

    def __init__(self, core: Core, config, report_provider):
        self.core = core
        self.config = config
        self.report_provider = report_provider
        self.queue = CommandQueue()
        self.digests: dict[str, dict[str, str | None]] = {}
        self.infra_digest: str | None = None
        self._pending: set[str] = set()
        self._resync: set[str] = set()
        self._reason_lock = threading.Lock()
        self._snapshot_cache: tuple[str, InfrastructureSnapshot] | None = None

    # -- trigger bookkeeping ---------------------------------------------------

    def _note_trigger(self, app_id: str) -> None:
        self._pending.add(app_id)

    def pending(self) -> set[str]:
        return set(self._pending)

    def _file_digest(self, path: str) -> str | None:
        if not os.path.exists(path):
            return None
        with open(path, "rb") as fh:
            return sha256_hex(fh.read())

    # -- the four sources --------------------------------------------------------

    def tick_pipeline(self) -> set[str]:
        """Hash both descriptor files of every managed app; a mismatch against
        the stored digest triggers that app. Unreadable files flag the app and
        skip it this tick."""
        triggered: set[str] = set()
        for app_id in self.core.managed_apps():
            record = self.core.apps[app_id]
            if record.path is None:
                continue
            try:
                compose = self._file_digest(os.path.join(record.path, descriptors.COMPOSE_FILE))
                requirements = self._file_digest(
                    os.path.join(record.path, descriptors.REQUIREMENTS_FILE)
                )
            except OSError as exc:
                log.warning("files unreadable for %s: %s", app_id, exc)
                continue
            stored = self.digests.get(app_id)
            current = {"compose": compose, "requirements": requirements}
            if stored != current:
                self._note_trigger(app_id)
                triggered.add(app_id)
                self.digests[app_id] = current  # advanced only after the trigger
        return triggered

    def tick_infra(self) -> bool:
        """Hash the latest published report; any change (or the first report
        ever seen) requires a reasoning step for all managed apps."""
        report = self.report_provider()
        if report is None:
            return False
        digest = sha256_hex(report)
        if digest == self.infra_digest:
            return False
        for app_id in self.core.managed_apps():
            self._note_trigger(app_id)
        self.infra_digest = digest
        return True

    def tick_placement(self) -> set[str]:
        """Compare desired and actual placement per app; on drift the stored
        desired placement is discarded and a fresh reasoning step runs from
        the backend's current state."""
        mismatched: set[str] = set()
        for app_id in self.core.managed_apps():
            record = self.core.apps[app_id]
            if record.desired is None:
                continue  # nothing committed yet
            current = self.core.backend.current_placement(app_id)
            if current != record.desired.assignment:
                mismatched.add(app_id)
                self._resync.add(app_id)
                self._note_trigger(app_id)
        return mismatched

    def tick_commands(self) -> int:
        """Drain the operator queue. File updates are written to the app's
        local repository and picked up by an immediate chained hash check, so
        an update plus an exec in the same drain coalesce into one step."""
        processed = 0
        for command in self.queue.drain():
            if command.app_id not in self.core.apps:
                log.warning("command for unknown app %s discarded", command.app_id)
                continue
            record = self.core.apps[command.app_id]
            if command.kind == "update_files":
                if record.path is not None:
                    if command.compose is not None:
                        _write(os.path.join(record.path, descriptors.COMPOSE_FILE), command.compose)
                    if command.requirements is not None:
                        _write(
                            os.path.join(record.path, descriptors.REQUIREMENTS_FILE),
                            command.requirements,
                        )
                    self._chained_file_check(command.app_id)
                else:
                    self._note_trigger(command.app_id)
            elif command.kind == "exec_app":
                self._note_trigger(command.app_id)
            elif command.kind == "remove_app":
                self.core.remove_app(command.app_id)
                self.digests.pop(command.app_id, None)
                self._pending.discard(command.app_id)
                self._resync.discard(command.app_id)
            processed += 1
        return processed

    def _chained_file_check(self, app_id: str) -> None:
        record = self.core.apps[app_id]
        compose = self._file_digest(os.path.join(record.path, descriptors.COMPOSE_FILE))
        requirements = self._file_digest(os.path.join(record.path, descriptors.REQUIREMENTS_FILE))
        current = {"compose": compose, "requirements": requirements}
        if self.digests.get(app_id) != current:
            self._note_trigger(app_id)
            self.digests[app_id] = current

    # -- reasoning executor -------------------------------------------------------

    def latest_snapshot(self) -> InfrastructureSnapshot | None:
        report = self.report_provider()
        if report is None:
            return None
        digest = sha256_hex(report)
        if self._snapshot_cache is not None and self._snapshot_cache[0] == digest:
            return self._snapshot_cache[1]
        snapshot = parse_report(report)
        self._snapshot_cache = (digest, snapshot)
        return snapshot

    def drain_triggers(self) -> int:
        """Run one reasoning step per pending app, ascending app id. Returns
        the number of reasoning steps executed."""
        with self._reason_lock:
            pending = sorted(self._pending)
            self._pending.clear()
            if not pending:
                return 0
            snapshot = self.latest_snapshot()
            if snapshot is None:
                log.warning("no infrastructure report yet; %d triggers deferred", len(pending))
                self._pending.update(pending)
                return 0
            steps = 0
            for app_id in pending:
                if app_id not in self.core.apps:
                    continue
                override = None
                if app_id in self._resync:
                    self._resync.discard(app_id)
                    override = self._discard_desired(app_id)
                self.core.reconcile_app(app_id, snapshot, previous_override=override)
                steps += 1
            return steps

    def _discard_desired(self, app_id: str):
        record = self.core.apps[app_id]
        if record.committed_spec is not None and record.desired is not None:
            self.core.ledger.release_app(record.committed_spec, record.desired)
        record.desired = None
        record.committed_spec = None
        return Placement(app_id, self.core.backend.current_placement(app_id))

    def poll_once(self) -> int:
        """Run all four sources once and drain; for tests, demos, and manual use."""
        self.tick_commands()
        self.tick_pipeline()
        self.tick_infra()
        self.tick_placement()
        return self.drain_triggers()

    # -- daemon loop ------------------------------------------------------------

    def run(self, stop_event: threading.Event, quantum: float = 0.2) -> None:
        """Poll each source on its own period until stopped; the config file is
        re-read every pass so periods and sensitivity update on the fly."""
        due = {name: 0.0 for name in ("files", "infra", "placement", "commands")}
        ticks = {
            "files": self.tick_pipeline,
            "infra": self.tick_infra,
            "placement": self.tick_placement,
            "commands": self.tick_commands,
        }
        while not stop_event.is_set():
            self.config.reload_if_changed()
            now = time.monotonic()
            ran = False
            for name, tick in ticks.items():
                period = getattr(self.config.periods, name)
                if period is None:
                    continue  # source disabled; the others keep running
                if now >= due[name]:
                    try:
                        tick()
                    except Exception:
                        log.exception("watcher source %s failed", name)
                    due[name] = now + period
                    ran = True
            if ran:
                try:
                    self.drain_triggers()
                except Exception:
                    log.exception("reasoning drain failed")
            stop_event.wait(quantum)


def _write(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)


def validate_files_payload(compose: str | None, requirements: str | None):
    """Parse-check operator-provided file contents before they are enqueued;
    raises MalformedDescriptor (or a subclass) with the parser's message."""
    if compose is not None:
        descriptors.parse_compose(compose)
    if requirements is not None:
        descriptors.parse_requirements(requirements)
