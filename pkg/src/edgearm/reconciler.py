"""Turning reasoning outcomes into the three action lists and applying them.

A plan is applied remove-first, then migrations, then deploys, so capacity is
freed before it is consumed. The allocation ledger is updated transactionally:
if the backend rejects any action, the ledger rolls back to its pre-apply
state and the report carries the prefix of actions that did complete (the
backend itself stays partially actuated, exactly like a half-run command
script; the placement drift watcher picks that up).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from .errors import BackendFailure
from .model import AllocationLedger, ApplicationSpec, Placement


@dataclass
class ActionPlan:
    app_id: str
    deploy: list[tuple[str, str]] = field(default_factory=list)
    migrate: list[tuple[str, str, str]] = field(default_factory=list)
    remove: list[str] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.deploy or self.migrate or self.remove)

    def touched_services(self) -> set[str]:
        return (
            {s for s, _ in self.deploy}
            | {s for s, _, _ in self.migrate}
            | set(self.remove)
        )


def diff(old: Placement | None, new: Placement) -> ActionPlan:
    """The three lists reconciling ``old`` into ``new``. Without a previous
    placement every service is a deploy."""
    if old is not None and old.app_id != new.app_id:
        raise ValueError("placements belong to different applications")
    old_map = old.assignment if old is not None else {}
    plan = ActionPlan(app_id=new.app_id)
    for sid in sorted(new.assignment):
        node = new.assignment[sid]
        if sid not in old_map:
            plan.deploy.append((sid, node))
        elif old_map[sid] != node:
            plan.migrate.append((sid, old_map[sid], node))
    plan.remove = sorted(set(old_map) - set(new.assignment))
    return plan


def render_deploy(app_id: str, service_id: str, node_id: str) -> list[str]:
    return [
        f"docker service update --constraint-add node.hostname=={node_id} {app_id}_{service_id}"
    ]


def render_migrate(app_id: str, service_id: str, src: str, dst: str) -> list[str]:
    return [
        f"docker service update --constraint-rm node.hostname=={src} {app_id}_{service_id}",
        f"docker service update --constraint-add node.hostname=={dst} {app_id}_{service_id}",
    ]


def render_remove(app_id: str, service_id: str) -> list[str]:
    return [f"docker service rm {app_id}_{service_id}"]


def render_stack_rm(app_id: str) -> list[str]:
    return [f"docker stack rm {app_id}"]


def render_commands(plan: ActionPlan) -> list[str]:
    """Command lines for a plan, in application order (removes, migrations,
    deploys). The constraint is removed before the new one is added when a
    service migrates."""
    lines: list[str] = []
    for sid in plan.remove:
        lines += render_remove(plan.app_id, sid)
    for sid, src, dst in plan.migrate:
        lines += render_migrate(plan.app_id, sid, src, dst)
    for sid, node in plan.deploy:
        lines += render_deploy(plan.app_id, sid, node)
    return lines


class Backend(Protocol):
    """Actuation surface; after a successful full-plan apply, current_placement
    must equal the plan's target."""

    def apply_deploy(self, app_id: str, service_id: str, node_id: str) -> None: ...

    def apply_migrate(self, app_id: str, service_id: str, src: str, dst: str) -> None: ...

    def apply_remove(self, app_id: str, service_id: str) -> None: ...

    def remove_app(self, app_id: str) -> None: ...

    def current_placement(self, app_id: str) -> dict[str, str]: ...


class SimulatedBackend:
    """Instantaneous, reliable backend with injectable failures for tests.

    ``fail_on`` is an optional predicate over (action, app_id, service_id)
    raising decisions; when it returns True the action fails before mutating
    state.
    """

    def __init__(self):
        self.state: dict[str, dict[str, str]] = {}
        self.fail_on = None
        self.calls: list[tuple] = []

    def _check(self, action: str, app_id: str, service_id: str | None) -> None:
        self.calls.append((action, app_id, service_id))
        if self.fail_on is not None and self.fail_on(action, app_id, service_id):
            raise BackendFailure(action, f"injected failure for {app_id}/{service_id}")

    def apply_deploy(self, app_id: str, service_id: str, node_id: str) -> None:
        self._check("deploy", app_id, service_id)
        self.state.setdefault(app_id, {})[service_id] = node_id

    def apply_migrate(self, app_id: str, service_id: str, src: str, dst: str) -> None:
        self._check("migrate", app_id, service_id)
        self.state.setdefault(app_id, {})[service_id] = dst

    def apply_remove(self, app_id: str, service_id: str) -> None:
        self._check("remove", app_id, service_id)
        self.state.get(app_id, {}).pop(service_id, None)

    def remove_app(self, app_id: str) -> None:
        self._check("remove_app", app_id, None)
        self.state.pop(app_id, None)

    def current_placement(self, app_id: str) -> dict[str, str]:
        return dict(self.state.get(app_id, {}))

    def to_dict(self) -> dict:
        return {app: dict(services) for app, services in sorted(self.state.items())}

    @staticmethod
    def from_dict(data: dict) -> "SimulatedBackend":
        backend = SimulatedBackend()
        backend.state = {app: dict(services) for app, services in data.items()}
        return backend


class CommandScriptBackend(SimulatedBackend):
    """Simulated backend that also appends the exact command lines to a script
    file, one block per tick and application, and never executes them."""

    def __init__(self, script_path):
        super().__init__()
        self.script_path = script_path
        self._context: tuple[int | None, str] | None = None
        self._written: tuple[int | None, str] | None = None

    def set_context(self, tick: int | None, app_id: str) -> None:
        """Tick is None for out-of-band (operator-initiated) actions."""
        self._context = (tick, app_id)

    def _emit(self, lines: list[str]) -> None:
        with open(self.script_path, "a", encoding="utf-8") as fh:
            if self._context is not None and self._context != self._written:
                tick, app_id = self._context
                header = f"# tick {tick} app {app_id}" if tick is not None else f"# app {app_id}"
                fh.write(header + "\n")
                self._written = self._context
            for line in lines:
                fh.write(line + "\n")

    def apply_deploy(self, app_id, service_id, node_id):
        super().apply_deploy(app_id, service_id, node_id)
        self._emit(render_deploy(app_id, service_id, node_id))

    def apply_migrate(self, app_id, service_id, src, dst):
        super().apply_migrate(app_id, service_id, src, dst)
        self._emit(render_migrate(app_id, service_id, src, dst))

    def apply_remove(self, app_id, service_id):
        super().apply_remove(app_id, service_id)
        self._emit(render_remove(app_id, service_id))

    def remove_app(self, app_id):
        super().remove_app(app_id)
        self._emit(render_stack_rm(app_id))


@dataclass
class ApplyReport:
    plan: ActionPlan
    completed: list[tuple] = field(default_factory=list)
    failed: tuple | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed is None


def apply_plan(
    plan: ActionPlan,
    backend: Backend,
    ledger: AllocationLedger,
    old: tuple[ApplicationSpec, Placement] | None,
    new: tuple[ApplicationSpec, Placement],
) -> ApplyReport:
    """Execute a plan (removes, then migrations, then deploys) and move the
    app's ledger charge from the old committed (spec, placement) to the new
    one. On backend failure the ledger is restored to its pre-apply state and
    the completed prefix reported; the backend keeps whatever already ran."""
    snapshot_hw = dict(ledger.hw_used)
    snapshot_bw = dict(ledger.bw_used)
    report = ApplyReport(plan=plan)
    try:
        for sid in plan.remove:
            backend.apply_remove(plan.app_id, sid)
            report.completed.append(("remove", sid))
        for sid, src, dst in plan.migrate:
            backend.apply_migrate(plan.app_id, sid, src, dst)
            report.completed.append(("migrate", sid, src, dst))
        for sid, node in plan.deploy:
            backend.apply_deploy(plan.app_id, sid, node)
            report.completed.append(("deploy", sid, node))
    except BackendFailure as exc:
        ledger.hw_used = snapshot_hw
        ledger.bw_used = snapshot_bw
        report.failed = (exc.action,)
        report.error = str(exc)
        return report
    if old is not None:
        ledger.release_app(old[0], old[1])
    ledger.charge_app(new[0], new[1])
    return report
