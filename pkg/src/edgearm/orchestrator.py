"""The orchestration core: managed-application registry, the shared allocation
ledger, and the per-tick reasoning + diff + apply pipeline.

Applications are processed one at a time in ascending id order, so the ledger
evolves sequentially and later applications see earlier allocations. An
application whose reasoning ends unplaceable keeps its previous placement and
is flagged degraded; the tick never aborts. The core is the sole owner of the
ledger and of committed placements, and every reasoning invocation is counted
so quiescence can be asserted from the outside.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import descriptors
from .errors import MalformedDescriptor, MissingDescriptor, FileUnreadable, Unplaceable
from .model import AllocationLedger, ApplicationSpec, InfrastructureSnapshot, Placement
from .reasoner import ReasoningOutcome, continuous_step, search
from .reconciler import (
    ActionPlan,
    ApplyReport,
    CommandScriptBackend,
    apply_plan,
    diff,
)

CONTINUOUS = "continuous"
EXHAUSTIVE_RESTART = "exhaustive-restart"


@dataclass
class AppRecord:
    app_id: str
    path: str | None = None
    inline_spec: ApplicationSpec | None = None
    committed_spec: ApplicationSpec | None = None
    desired: Placement | None = None
    degraded: bool = False
    registered_at: float = 0.0
    last_update: tuple[int, str] | None = None  # (report sequence, ISO wall time)


@dataclass
class AppOutcome:
    app_id: str
    action: str  # reconciled | removed | unplaceable | error
    outcome: ReasoningOutcome | None = None
    plan: ActionPlan | None = None
    apply_report: ApplyReport | None = None
    error: str | None = None
    decision_ms: float = 0.0
    explored: int = 0


@dataclass
class AppStatus:
    app_id: str
    desired: dict[str, str]
    current: dict[str, str]
    match: bool
    last_update: tuple[int, str] | None
    uptime_s: float
    degraded: bool


class Core:
    def __init__(self, backend, clock=time.time):
        self.backend = backend
        self.clock = clock
        self.apps: dict[str, AppRecord] = {}
        self.ledger = AllocationLedger()
        self.reasoning_steps = 0
        self.on_reconciled = []  # callbacks (app_id, AppOutcome)

    # -- registry -----------------------------------------------------------

    def register(
        self, app_id: str, path: str | None = None, spec: ApplicationSpec | None = None
    ) -> AppRecord:
        record = self.apps.get(app_id)
        if record is None:
            record = AppRecord(app_id=app_id, registered_at=self.clock())
            self.apps[app_id] = record
        record.path = path
        if spec is not None:
            record.inline_spec = spec
        return record

    def set_spec(self, app_id: str, spec: ApplicationSpec) -> None:
        self.apps[app_id].inline_spec = spec

    def managed_apps(self) -> list[str]:
        return sorted(self.apps)

    def load_spec(self, record: AppRecord) -> ApplicationSpec | None:
        """Current application spec; None means the compose file was deleted
        (the app is to be removed). Unreadable content raises FileUnreadable."""
        if record.path is None:
            return record.inline_spec
        compose_path = os.path.join(record.path, descriptors.COMPOSE_FILE)
        requirements_path = os.path.join(record.path, descriptors.REQUIREMENTS_FILE)
        if not os.path.exists(compose_path):
            return None
        try:
            with open(compose_path, "rb") as fh:
                compose_text = fh.read()
            requirements_text = None
            if os.path.exists(requirements_path):
                with open(requirements_path, "rb") as fh:
                    requirements_text = fh.read()
            return descriptors.spec_from_texts(record.app_id, compose_text, requirements_text)
        except MalformedDescriptor as exc:
            raise FileUnreadable(f"{record.app_id}: {exc}") from exc
        except OSError as exc:
            raise FileUnreadable(f"{record.app_id}: {exc}") from exc

    # -- ledger -------------------------------------------------------------

    def external_ledger(self, app_id: str) -> AllocationLedger:
        """The ledger as every other application sees it: total minus this
        application's committed contribution."""
        external = self.ledger.copy()
        record = self.apps.get(app_id)
        if record is not None and record.desired is not None and record.committed_spec is not None:
            external.release_app(record.committed_spec, record.desired)
        return external

    def recompute_ledger(self) -> AllocationLedger:
        return AllocationLedger.from_apps(
            (r.committed_spec, r.desired)
            for r in self.apps.values()
            if r.committed_spec is not None and r.desired is not None
        )

    # -- reasoning + reconciliation ------------------------------------------

    def _reason(
        self,
        spec: ApplicationSpec,
        previous: Placement | None,
        snapshot: InfrastructureSnapshot,
        external: AllocationLedger,
        strategy: str,
    ) -> ReasoningOutcome:
        self.reasoning_steps += 1
        if strategy == CONTINUOUS:
            return continuous_step(spec, previous, snapshot, external)
        if strategy == EXHAUSTIVE_RESTART:
            counter = [0]
            placement = search(spec, snapshot, {}, set(spec.services), external, counter)
            if placement is None:
                exc = Unplaceable(f"{spec.app_id}: no valid placement exists")
                exc.explored = counter[0]
                raise exc
            removed = (
                set(previous.assignment) - set(spec.services) if previous else set()
            )
            return ReasoningOutcome(
                placement=placement,
                fallback_used=False,
                replaced_services=set(spec.services),
                removed_services=removed,
                stats={"candidate_assignments_explored": counter[0]},
            )
        raise ValueError(f"unknown strategy {strategy!r}")

    def reconcile_app(
        self,
        app_id: str,
        snapshot: InfrastructureSnapshot,
        *,
        strategy: str = CONTINUOUS,
        tick: int | None = None,
        previous_override: Placement | None = None,
        measure_time: bool = False,
    ) -> AppOutcome:
        record = self.apps[app_id]
        try:
            spec = self.load_spec(record)
        except FileUnreadable as exc:
            return AppOutcome(app_id=app_id, action="error", error=str(exc))
        if spec is None:
            self.remove_app(app_id, tick=tick)
            return AppOutcome(
                app_id=app_id, action="removed", plan=ActionPlan(app_id=app_id)
            )

        previous = previous_override if previous_override is not None else record.desired
        external = self.external_ledger(app_id)
        started = time.perf_counter() if measure_time else 0.0
        try:
            outcome = self._reason(spec, previous, snapshot, external, strategy)
        except Unplaceable as exc:
            record.degraded = True
            result = AppOutcome(
                app_id=app_id,
                action="unplaceable",
                error=str(exc),
                explored=getattr(exc, "explored", 0),
            )
            if measure_time:
                result.decision_ms = (time.perf_counter() - started) * 1000.0
            return result
        plan = diff(previous, outcome.placement)
        decision_ms = (time.perf_counter() - started) * 1000.0 if measure_time else 0.0

        if isinstance(self.backend, CommandScriptBackend):
            self.backend.set_context(tick if tick is not None else snapshot.timestamp, app_id)
        old = (
            (record.committed_spec, record.desired)
            if record.committed_spec is not None and record.desired is not None
            else None
        )
        report = apply_plan(plan, self.backend, self.ledger, old, (spec, outcome.placement))
        if report.ok:
            record.desired = outcome.placement
            record.committed_spec = spec
            record.degraded = False
            record.last_update = (snapshot.timestamp, self._now_iso())
        else:
            record.degraded = True
        result = AppOutcome(
            app_id=app_id,
            action="reconciled",
            outcome=outcome,
            plan=plan,
            apply_report=report,
            decision_ms=decision_ms,
            explored=outcome.stats.get("candidate_assignments_explored", 0),
        )
        for callback in self.on_reconciled:
            callback(app_id, result)
        return result

    def reconcile_tick(
        self,
        snapshot: InfrastructureSnapshot,
        app_ids=None,
        *,
        strategy: str = CONTINUOUS,
        tick: int | None = None,
        measure_time: bool = False,
    ) -> dict[str, AppOutcome]:
        """One reconciliation pass over the given apps (default: all managed),
        ascending app id; per-app failures never abort the tick."""
        targets = sorted(app_ids) if app_ids is not None else self.managed_apps()
        outcomes: dict[str, AppOutcome] = {}
        for app_id in targets:
            if app_id not in self.apps:
                continue
            outcomes[app_id] = self.reconcile_app(
                app_id,
                snapshot,
                strategy=strategy,
                tick=tick,
                measure_time=measure_time,
            )
        return outcomes

    def remove_app(self, app_id: str, tick: int | None = None) -> None:
        record = self.apps.pop(app_id, None)
        if record is None:
            return
        if isinstance(self.backend, CommandScriptBackend):
            self.backend.set_context(tick, app_id)
        self.backend.remove_app(app_id)
        if record.committed_spec is not None and record.desired is not None:
            self.ledger.release_app(record.committed_spec, record.desired)

    # -- status ---------------------------------------------------------------

    def status(self, app_id: str) -> AppStatus:
        record = self.apps[app_id]
        desired = dict(record.desired.assignment) if record.desired else {}
        current = self.backend.current_placement(app_id)
        return AppStatus(
            app_id=app_id,
            desired=desired,
            current=current,
            match=desired == current,
            last_update=record.last_update,
            uptime_s=max(self.clock() - record.registered_at, 0.0),
            degraded=record.degraded,
        )

    def statuses(self) -> list[AppStatus]:
        return [self.status(app_id) for app_id in self.managed_apps()]

    def _now_iso(self) -> str:
        return datetime.fromtimestamp(self.clock(), tz=timezone.utc).isoformat()

    # -- persistence -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "apps": {
                app_id: {
                    "path": r.path,
                    "desired": dict(r.desired.assignment) if r.desired else None,
                    "committed_spec": r.committed_spec.to_dict() if r.committed_spec else None,
                    "degraded": r.degraded,
                    "registered_at": r.registered_at,
                    "last_update": list(r.last_update) if r.last_update else None,
                }
                for app_id, r in sorted(self.apps.items())
            },
            "backend": self.backend.to_dict(),
            "reasoning_steps": self.reasoning_steps,
        }

    def restore(self, data: dict) -> None:
        from .reconciler import SimulatedBackend

        for app_id, body in data.get("apps", {}).items():
            record = AppRecord(
                app_id=app_id,
                path=body.get("path"),
                degraded=bool(body.get("degraded", False)),
                registered_at=float(body.get("registered_at", 0.0)),
            )
            if body.get("desired") is not None:
                record.desired = Placement(app_id, dict(body["desired"]))
            if body.get("committed_spec") is not None:
                record.committed_spec = ApplicationSpec.from_dict(body["committed_spec"])
            if body.get("last_update") is not None:
                seq, iso = body["last_update"]
                record.last_update = (int(seq), str(iso))
            self.apps[app_id] = record
        backend_state = data.get("backend", {})
        if isinstance(self.backend, SimulatedBackend):
            self.backend.state = {a: dict(s) for a, s in backend_state.items()}
        self.reasoning_steps = int(data.get("reasoning_steps", 0))
        self.ledger = self.recompute_ledger()
