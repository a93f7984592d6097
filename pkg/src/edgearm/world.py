"""Hidden ground-truth world state that monitoring agents can only sample.

Nodes and links carry both a baseline (the unloaded capacity of the testbed)
and a current value. The dynamics engine re-derives current values from the
baselines on every tick, so monitored metrics fluctuate around the testbed's
configured capacity instead of decaying to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class GroundNode:
    node_id: str
    baseline_free_hw: int
    free_hw: int
    software: frozenset[str] = frozenset()
    iot_devices: frozenset[str] = frozenset()
    alive: bool = True
    region: int = 0


@dataclass
class GroundLink:
    src: str
    dst: str
    baseline_latency_ms: float
    latency_ms: float
    baseline_bandwidth_mbps: float
    bandwidth_mbps: float
    alive: bool = True


@dataclass
class GroundTruth:
    """Full latency/bandwidth matrix over the testbed, both directions stored."""

    nodes: dict[str, GroundNode] = field(default_factory=dict)
    links: dict[tuple[str, str], GroundLink] = field(default_factory=dict)

    def node_ids(self) -> list[str]:
        return sorted(self.nodes)

    def alive_nodes(self) -> list[str]:
        return sorted(n for n, state in self.nodes.items() if state.alive)

    def latency(self, src: str, dst: str) -> float:
        if src == dst:
            return 0.0
        return self.links[(src, dst)].latency_ms

    def link_alive(self, src: str, dst: str) -> bool:
        if src == dst:
            return True
        link = self.links.get((src, dst))
        return link is not None and link.alive and self.nodes[src].alive and self.nodes[dst].alive
