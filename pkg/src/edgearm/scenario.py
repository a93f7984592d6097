"""End-to-end seeded scenario runs comparing placement strategies.

One tick is one monitoring period: the world is perturbed, the overlay
publishes (or suppresses) a report, commits may land, and every triggered
application goes through reasoning, diff, and apply. World and workload
randomness come from independent substreams keyed by (seed, label), so runs
with different strategies but equal seeds see identical perturbation and
commit streams. With wall-time measurement disabled (the default), two runs of
the same configuration produce byte-identical logs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .dynamics import (
    CommitModel,
    PerturbationModel,
    build_testbed,
    demo_app_template,
    generate_commit,
    perturb,
    sqrt_groups,
    substream,
)
from .errors import ConfigInvalid
from .model import parse_report
from .orchestrator import CONTINUOUS, EXHAUSTIVE_RESTART, Core
from .overlay import Monitor
from .reconciler import SimulatedBackend

STRATEGIES = {
    "cr": CONTINUOUS,
    "continuous": CONTINUOUS,
    "ex": EXHAUSTIVE_RESTART,
    "exhaustive-restart": EXHAUSTIVE_RESTART,
}


@dataclass
class ScenarioConfig:
    nodes: int
    apps: int
    ticks: int
    seed: int
    strategy: str = CONTINUOUS
    regions: int = 3
    services_per_app: int = 8
    commit_p: float = 0.15
    sensitivity: float = 0.1
    restructure_every: int = 10
    measure_time: bool = False
    perturb: bool = True  # False freezes the world at the testbed baseline

    def normalized_strategy(self) -> str:
        strategy = STRATEGIES.get(self.strategy)
        if strategy is None:
            raise ConfigInvalid(f"unknown strategy {self.strategy!r}")
        return strategy

    def validate(self) -> None:
        if self.nodes < 1 or self.apps < 0 or self.ticks < 0:
            raise ConfigInvalid("nodes must be >= 1, apps and ticks >= 0")
        if self.regions < 1 or self.nodes < self.regions:
            raise ConfigInvalid("need at least one node per region")
        if self.services_per_app != 8:
            raise ConfigInvalid("the demo application topology has exactly 8 services")
        if not 0 <= self.commit_p <= 1:
            raise ConfigInvalid("commit_p must be a probability")
        self.normalized_strategy()


@dataclass
class ScenarioLog:
    config: ScenarioConfig
    records: list[dict] = field(default_factory=list)
    # in-memory witnesses of the strategy-independent streams (not serialized)
    commits: list[tuple[int, str]] = field(default_factory=list)
    world_digests: list[str] = field(default_factory=list)

    def to_jsonl(self) -> bytes:
        out = io.StringIO()
        for record in self.records:
            out.write(json.dumps(record, separators=(",", ":")) + "\n")
        return out.getvalue().encode()

    def totals(self) -> dict:
        keys = ("deploys", "migrations", "removals", "explored", "decision_ms")
        totals = {k: 0 for k in keys}
        totals["fallbacks"] = 0
        totals["unplaceable"] = 0
        for record in self.records:
            for k in keys:
                totals[k] += record[k]
            totals["fallbacks"] += 1 if record["fallback"] else 0
            totals["unplaceable"] += 1 if record["unplaceable"] else 0
        return totals

    def migrations_per_tick(self) -> float:
        """Mean migrations per perturbation tick (the initial deployment at
        tick 0 is excluded)."""
        if self.config.ticks == 0:
            return 0.0
        migrations = sum(r["migrations"] for r in self.records if r["tick"] > 0)
        return migrations / self.config.ticks

    def summary_row(self) -> dict:
        totals = self.totals()
        return {
            "strategy": self.config.normalized_strategy(),
            "seed": self.config.seed,
            "nodes": self.config.nodes,
            "apps": self.config.apps,
            "ticks": self.config.ticks,
            "deploys": totals["deploys"],
            "migrations": totals["migrations"],
            "removals": totals["removals"],
            "explored": totals["explored"],
            "fallbacks": totals["fallbacks"],
            "unplaceable": totals["unplaceable"],
            "migrations_per_tick": round(self.migrations_per_tick(), 6),
            "decision_ms": round(totals["decision_ms"], 3),
        }

    def to_csv(self) -> str:
        row = self.summary_row()
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=list(row))
        writer.writeheader()
        writer.writerow(row)
        return out.getvalue()


def _world_digest(gt) -> str:
    import hashlib

    parts = []
    for nid in gt.node_ids():
        node = gt.nodes[nid]
        parts.append(f"{nid}:{node.free_hw}:{node.alive}")
    for key in sorted(gt.links):
        link = gt.links[key]
        parts.append(f"{key}:{link.latency_ms:.6f}:{link.bandwidth_mbps:.6f}:{link.alive}")
    return hashlib.sha256("|".join(parts).encode()).hexdigest()


def _record(tick: int, app_id: str, outcome) -> dict:
    plan = outcome.plan
    return {
        "tick": tick,
        "app_id": app_id,
        "deploys": len(plan.deploy) if plan else 0,
        "migrations": len(plan.migrate) if plan else 0,
        "removals": len(plan.remove) if plan else 0,
        "explored": outcome.explored,
        "decision_ms": round(outcome.decision_ms, 3),
        "fallback": bool(outcome.outcome.fallback_used) if outcome.outcome else False,
        "unplaceable": outcome.action == "unplaceable",
    }


def run_scenario(config: ScenarioConfig) -> ScenarioLog:
    """Deploy ``apps`` replicas of the 8-service demo application and drive
    ``ticks`` perturbation periods under the configured strategy."""
    config.validate()
    strategy = config.normalized_strategy()
    seed = config.seed

    gt = build_testbed(config.nodes, config.regions)
    perturbation = PerturbationModel(rng=substream(seed, "world"))
    schedule_rng = substream(seed, "commit-schedule")

    monitor = Monitor(
        gt,
        sensitivity=config.sensitivity,
        restructure_every=config.restructure_every,
        k_fn=sqrt_groups,
    )
    monitor.bootstrap()

    core = Core(backend=SimulatedBackend(), clock=lambda: 0.0)
    app_ids = [f"app{i:02d}" for i in range(config.apps)]
    templates = {}
    commit_models = {}
    for app_id in app_ids:
        template_model = CommitModel(rng=substream(seed, f"template/{app_id}"))
        templates[app_id] = demo_app_template(app_id, template_model)
        # inclusion odds are the first draws of the app's commit stream,
        # one per service, fixed for the whole run
        model = CommitModel(rng=substream(seed, f"commits/{app_id}"))
        for sid in sorted(templates[app_id].services):
            model.inclusion_for(sid)
        commit_models[app_id] = model
        core.register(app_id, spec=templates[app_id])

    log = ScenarioLog(config=config)

    report = monitor.tick()
    snapshot = parse_report(report)
    for app_id, outcome in core.reconcile_tick(
        snapshot, strategy=strategy, tick=0, measure_time=config.measure_time
    ).items():
        log.records.append(_record(0, app_id, outcome))

    for tick in range(1, config.ticks + 1):
        if config.perturb:
            perturb(gt, perturbation)
        log.world_digests.append(_world_digest(gt))
        report = monitor.tick()
        if report is not None:
            snapshot = parse_report(report)

        committed: set[str] = set()
        for app_id in app_ids:
            if schedule_rng.random() < config.commit_p:
                committed.add(app_id)
                log.commits.append((tick, app_id))
                core.set_spec(
                    app_id, generate_commit(templates[app_id], commit_models[app_id])
                )

        triggered = set(app_ids) if report is not None else committed
        for app_id, outcome in core.reconcile_tick(
            snapshot,
            sorted(triggered),
            strategy=strategy,
            tick=tick,
            measure_time=config.measure_time,
        ).items():
            log.records.append(_record(tick, app_id, outcome))

    return log
