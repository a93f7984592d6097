"""Seeded workload and infrastructure dynamics for reproducible experiments.

The perturbation model re-derives every monitored value from the testbed
baseline on each tick (free RAM cut by a Gaussian draw, latency increased,
bandwidth reduced by a Gaussian fraction) and fails each node and link
independently with a fixed probability; failed elements come back the next
tick unless they fail again. The commit model rebuilds an application's
descriptor content: every service of the template has its own inclusion
probability, and included services get fresh requirement values from the
configured ranges.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import InvalidShape
from .model import ApplicationSpec, LinkRequirement, ServiceRequirement
from .world import GroundLink, GroundNode, GroundTruth

DEFAULT_NODE_RAM_MB = 6144
DEFAULT_INTRA_REGION_LATENCY_MS = 5.0
DEFAULT_INTER_REGION_LATENCY_MS = 40.0
DEFAULT_BANDWIDTH_MBPS = 100.0


@dataclass
class PerturbationModel:
    """Per-tick infrastructure noise, driven by a private seeded generator."""

    rng: random.Random
    ram_cut_mean: float = 750.0
    ram_cut_sd: float = 375.0
    latency_add_mean: float = 50.0
    latency_add_sd: float = 25.0
    bw_cut_mean: float = 0.125
    bw_cut_sd: float = 0.0625
    failure_p: float = 0.05

    @staticmethod
    def seeded(seed, **overrides) -> "PerturbationModel":
        return PerturbationModel(rng=random.Random(seed), **overrides)


@dataclass
class CommitModel:
    """Per-application commit stream: inclusion odds drawn once per service,
    requirement values redrawn per commit from the configured ranges."""

    rng: random.Random
    inclusion_p: dict[str, float] = field(default_factory=dict)
    hardware_range: tuple[int, int] = (250, 750)
    latency_range: tuple[float, float] = (200.0, 750.0)
    bandwidth_range: tuple[float, float] = (10.0, 30.0)

    @staticmethod
    def seeded(seed, services=(), **overrides) -> "CommitModel":
        model = CommitModel(rng=random.Random(seed), **overrides)
        for sid in sorted(services):
            model.inclusion_for(sid)
        return model

    def inclusion_for(self, service_id: str) -> float:
        if service_id not in self.inclusion_p:
            self.inclusion_p[service_id] = self.rng.uniform(0.75, 1.0)
        return self.inclusion_p[service_id]

    def draw_hardware(self) -> int:
        return self.rng.randint(*self.hardware_range)

    def draw_link(self) -> LinkRequirement:
        return LinkRequirement(
            max_latency_ms=self.rng.uniform(*self.latency_range),
            min_bandwidth_mbps=self.rng.uniform(*self.bandwidth_range),
        )


def build_testbed(
    n_nodes: int,
    n_regions: int,
    *,
    node_ram_mb: int = DEFAULT_NODE_RAM_MB,
    intra_latency_ms: float = DEFAULT_INTRA_REGION_LATENCY_MS,
    inter_latency_ms: float = DEFAULT_INTER_REGION_LATENCY_MS,
    bandwidth_mbps: float = DEFAULT_BANDWIDTH_MBPS,
    software: tuple[str, ...] = ("docker",),
) -> GroundTruth:
    """Even split of nodes into regions (remainder to the lowest-index regions),
    low intra-region and high inter-region latency, uniform bandwidth and RAM."""
    if n_regions < 1 or n_nodes < n_regions:
        raise InvalidShape(f"cannot spread {n_nodes} nodes over {n_regions} regions")
    base, remainder = divmod(n_nodes, n_regions)
    gt = GroundTruth()
    index = 0
    for region in range(n_regions):
        count = base + (1 if region < remainder else 0)
        for _ in range(count):
            node_id = f"node{index:03d}"
            gt.nodes[node_id] = GroundNode(
                node_id=node_id,
                baseline_free_hw=node_ram_mb,
                free_hw=node_ram_mb,
                software=frozenset(software),
                region=region,
            )
            index += 1
    ids = gt.node_ids()
    for a in ids:
        for b in ids:
            if a == b:
                continue
            same = gt.nodes[a].region == gt.nodes[b].region
            latency = intra_latency_ms if same else inter_latency_ms
            gt.links[(a, b)] = GroundLink(
                src=a,
                dst=b,
                baseline_latency_ms=latency,
                latency_ms=latency,
                baseline_bandwidth_mbps=bandwidth_mbps,
                bandwidth_mbps=bandwidth_mbps,
            )
    return gt


def perturb(ground_truth: GroundTruth, model: PerturbationModel) -> GroundTruth:
    """Mutate the world for one tick.

    Draw order is fixed: nodes in ascending id (RAM cut, then failure roll),
    then links in ascending (src, dst) (latency add, bandwidth cut fraction,
    then failure roll). Values are re-derived from the baselines, so a node's
    monitored free RAM fluctuates around its unloaded capacity instead of
    decaying across ticks. Liveness is re-rolled every tick.
    """
    rng = model.rng
    for node_id in ground_truth.node_ids():
        node = ground_truth.nodes[node_id]
        cut = max(rng.gauss(model.ram_cut_mean, model.ram_cut_sd), 0.0)
        node.free_hw = max(int(round(node.baseline_free_hw - cut)), 0)
        node.alive = rng.random() >= model.failure_p
    for key in sorted(ground_truth.links):
        link = ground_truth.links[key]
        add = max(rng.gauss(model.latency_add_mean, model.latency_add_sd), 0.0)
        link.latency_ms = link.baseline_latency_ms + add
        frac = min(max(rng.gauss(model.bw_cut_mean, model.bw_cut_sd), 0.0), 1.0)
        link.bandwidth_mbps = max(link.baseline_bandwidth_mbps * (1.0 - frac), 0.0)
        link.alive = rng.random() >= model.failure_p
    return ground_truth


def generate_commit(template: ApplicationSpec, model: CommitModel) -> ApplicationSpec:
    """One synthetic commit: each template service is included with its own
    inclusion probability (at least one always survives), included services get
    fresh hardware values, and links between included services get fresh QoS
    demands. Links to excluded services disappear with them.
    """
    service_ids = sorted(template.services)
    for sid in service_ids:
        model.inclusion_for(sid)
    while True:
        included = [sid for sid in service_ids if model.rng.random() < model.inclusion_p[sid]]
        if included:
            break
    services: dict[str, ServiceRequirement] = {}
    for sid in included:
        req = template.services[sid]
        links = {
            target: model.draw_link()
            for target in sorted(req.links)
            if target in included
        }
        services[sid] = ServiceRequirement(
            service_id=sid,
            hardware=model.draw_hardware(),
            software=req.software,
            iot=req.iot,
            links=links,
        )
    images = {sid: template.images.get(sid, "") for sid in included}
    return ApplicationSpec(app_id=template.app_id, services=services, images=images)


DEMO_TOPOLOGY = {
    # hub-and-spoke over three tiers plus a shared store: 8 services
    "web": ["mid-a", "mid-b", "mid-c"],
    "mid-a": ["back-a"],
    "mid-b": ["back-b"],
    "mid-c": ["back-c"],
    "back-a": ["store"],
    "back-b": ["store"],
    "back-c": ["store"],
    "store": [],
}


def demo_app_template(app_id: str, model: CommitModel) -> ApplicationSpec:
    """The canonical 8-service demo application with generated requirements."""
    services = {}
    for sid in sorted(DEMO_TOPOLOGY):
        links = {target: model.draw_link() for target in sorted(DEMO_TOPOLOGY[sid])}
        services[sid] = ServiceRequirement(
            service_id=sid, hardware=model.draw_hardware(), links=links
        )
    images = {sid: f"registry.local/{app_id}-{sid}:1" for sid in DEMO_TOPOLOGY}
    return ApplicationSpec(app_id=app_id, services=services, images=images)


def substream(seed, label: str) -> random.Random:
    """Independent deterministic generator derived from (seed, label)."""
    return random.Random(f"{seed}/{label}")


def sqrt_groups(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n)))
