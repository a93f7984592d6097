"""Core domain types: nodes, links, snapshots, application specs, placements,
and the allocation ledger, plus the normalized infrastructure report format.

All values here are plain immutable-by-convention dataclasses; nothing mutates
a snapshot after construction. Hardware values are integers interpreted as MB
of RAM throughout (descriptors, reports, ledgers use the same unit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class NodeState:
    """One monitored node: free RAM (MB), installed software, attached IoT devices."""

    node_id: str
    free_hw: int
    software: frozenset[str] = frozenset()
    iot_devices: frozenset[str] = frozenset()
    alive: bool = True

    def __post_init__(self):
        if self.free_hw < 0:
            raise ValueError(f"node {self.node_id}: free_hw must be >= 0")


@dataclass(frozen=True)
class LinkState:
    """One directed monitored link. The self-link (n, n) is implicit everywhere
    with zero latency and unbounded bandwidth, and is never stored."""

    src: str
    dst: str
    latency_ms: float
    bandwidth_mbps: float
    alive: bool = True

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("self-links are implicit and never stored")
        if self.latency_ms < 0 or self.bandwidth_mbps < 0:
            raise ValueError(f"link {self.src}->{self.dst}: negative QoS value")


@dataclass(frozen=True)
class InfrastructureSnapshot:
    """The world as published in one report: nodes, directed links, and a
    monotonically increasing report sequence number."""

    nodes: dict[str, NodeState]
    links: dict[tuple[str, str], LinkState]
    timestamp: int = 0

    def __post_init__(self):
        for (src, dst), link in self.links.items():
            if src not in self.nodes or dst not in self.nodes:
                raise ValueError(f"link {src}->{dst} references an unknown node")
            if link.alive and not (self.nodes[src].alive and self.nodes[dst].alive):
                raise ValueError(f"link {src}->{dst} alive but an endpoint is down")

    def link(self, src: str, dst: str) -> LinkState | None:
        return self.links.get((src, dst))


@dataclass(frozen=True)
class LinkRequirement:
    """QoS demanded on one directed service-to-service communication."""

    max_latency_ms: float
    min_bandwidth_mbps: float


@dataclass(frozen=True)
class ServiceRequirement:
    """Per-service demands: RAM, software, IoT devices, and directed links to peers."""

    service_id: str
    hardware: int = 0
    software: frozenset[str] = frozenset()
    iot: frozenset[str] = frozenset()
    links: dict[str, LinkRequirement] = field(default_factory=dict)

    def __post_init__(self):
        if self.hardware < 0:
            raise ValueError(f"service {self.service_id}: hardware must be >= 0")
        if self.service_id in self.links:
            raise ValueError(f"service {self.service_id}: self-link requirement")


@dataclass(frozen=True)
class ApplicationSpec:
    """Merged view of the two descriptor files for one application."""

    app_id: str
    services: dict[str, ServiceRequirement]
    images: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for svc in self.services.values():
            for target in svc.links:
                if target not in self.services:
                    raise ValueError(
                        f"{svc.service_id}: link target {target!r} not in app"
                    )

    def service_ids(self) -> list[str]:
        return sorted(self.services)

    def to_dict(self) -> dict:
        return {
            "app_id": self.app_id,
            "services": {
                sid: {
                    "hardware": req.hardware,
                    "software": sorted(req.software),
                    "iot": sorted(req.iot),
                    "links": {
                        target: {
                            "latency": l.max_latency_ms,
                            "bandwidth": l.min_bandwidth_mbps,
                        }
                        for target, l in sorted(req.links.items())
                    },
                }
                for sid, req in sorted(self.services.items())
            },
            "images": dict(sorted(self.images.items())),
        }

    @staticmethod
    def from_dict(data: dict) -> "ApplicationSpec":
        services = {
            sid: ServiceRequirement(
                service_id=sid,
                hardware=int(body.get("hardware", 0)),
                software=frozenset(body.get("software", [])),
                iot=frozenset(body.get("iot", [])),
                links={
                    target: LinkRequirement(
                        max_latency_ms=float(q["latency"]),
                        min_bandwidth_mbps=float(q["bandwidth"]),
                    )
                    for target, q in body.get("links", {}).items()
                },
            )
            for sid, body in data.get("services", {}).items()
        }
        return ApplicationSpec(
            app_id=data["app_id"], services=services, images=dict(data.get("images", {}))
        )


@dataclass
class Placement:
    """Assignment of an application's services to node identifiers."""

    app_id: str
    assignment: dict[str, str] = field(default_factory=dict)

    def copy(self) -> "Placement":
        return Placement(self.app_id, dict(self.assignment))

    def __eq__(self, other):
        return (
            isinstance(other, Placement)
            and self.app_id == other.app_id
            and self.assignment == other.assignment
        )


class AllocationLedger:
    """Hardware and bandwidth consumed by all committed placements.

    hw_used maps node -> MB of RAM charged; bw_used maps a directed node pair
    -> Mbps charged. Colocated service pairs contribute zero bandwidth.
    """

    def __init__(self):
        self.hw_used: dict[str, int] = {}
        self.bw_used: dict[tuple[str, str], float] = {}

    def copy(self) -> "AllocationLedger":
        out = AllocationLedger()
        out.hw_used = dict(self.hw_used)
        out.bw_used = dict(self.bw_used)
        return out

    def charge_app(self, spec: ApplicationSpec, placement: Placement) -> None:
        self._apply(spec, placement, +1)

    def release_app(self, spec: ApplicationSpec, placement: Placement) -> None:
        self._apply(spec, placement, -1)

    def _apply(self, spec: ApplicationSpec, placement: Placement, sign: int) -> None:
        for service_id, node_id in placement.assignment.items():
            req = spec.services.get(service_id)
            if req is None:
                continue
            self.hw_used[node_id] = self.hw_used.get(node_id, 0) + sign * req.hardware
            for target, lreq in req.links.items():
                tnode = placement.assignment.get(target)
                if tnode is None or tnode == node_id:
                    continue
                key = (node_id, tnode)
                self.bw_used[key] = (
                    self.bw_used.get(key, 0.0) + sign * lreq.min_bandwidth_mbps
                )
        self._prune()

    def _prune(self) -> None:
        self.hw_used = {k: v for k, v in self.hw_used.items() if v != 0}
        self.bw_used = {k: v for k, v in self.bw_used.items() if abs(v) > 1e-9}

    def hw(self, node_id: str) -> int:
        return self.hw_used.get(node_id, 0)

    def bw(self, src: str, dst: str) -> float:
        return self.bw_used.get((src, dst), 0.0)

    def as_dict(self) -> dict:
        return {
            "hw": dict(sorted(self.hw_used.items())),
            "bw": {f"{a}|{b}": v for (a, b), v in sorted(self.bw_used.items())},
        }

    @staticmethod
    def from_apps(apps) -> "AllocationLedger":
        """Recompute a ledger from scratch from (spec, placement) pairs."""
        ledger = AllocationLedger()
        for spec, placement in apps:
            ledger.charge_app(spec, placement)
        return ledger

    def __eq__(self, other):
        if not isinstance(other, AllocationLedger):
            return NotImplemented
        if self.hw_used != other.hw_used:
            return False
        if set(self.bw_used) != set(other.bw_used):
            return False
        return all(abs(v - other.bw_used[k]) < 1e-6 for k, v in self.bw_used.items())


def canonical_json(obj) -> bytes:
    """Canonical compact JSON encoding used for hashing and report files."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def report_document(snapshot: InfrastructureSnapshot) -> dict:
    """Normalized JSON form of a snapshot (nodes sorted by id, links by pair)."""
    return {
        "timestamp": snapshot.timestamp,
        "nodes": [
            {
                "id": n.node_id,
                "free_hw": n.free_hw,
                "software": sorted(n.software),
                "iot": sorted(n.iot_devices),
                "alive": n.alive,
            }
            for n in sorted(snapshot.nodes.values(), key=lambda n: n.node_id)
        ],
        "links": [
            {
                "src": l.src,
                "dst": l.dst,
                "latency_ms": l.latency_ms,
                "bandwidth_mbps": l.bandwidth_mbps,
                "alive": l.alive,
            }
            for l in sorted(snapshot.links.values(), key=lambda l: (l.src, l.dst))
        ],
    }


def serialize_report(snapshot: InfrastructureSnapshot) -> bytes:
    return canonical_json(report_document(snapshot))


def parse_report(data: bytes | str) -> InfrastructureSnapshot:
    """Parse a normalized report document back into a snapshot."""
    doc = json.loads(data)
    nodes = {
        n["id"]: NodeState(
            node_id=n["id"],
            free_hw=int(n["free_hw"]),
            software=frozenset(n.get("software", [])),
            iot_devices=frozenset(n.get("iot", [])),
            alive=bool(n.get("alive", True)),
        )
        for n in doc["nodes"]
    }
    links = {}
    for l in doc["links"]:
        link = LinkState(
            src=l["src"],
            dst=l["dst"],
            latency_ms=float(l["latency_ms"]),
            bandwidth_mbps=float(l["bandwidth_mbps"]),
            alive=bool(l.get("alive", True)),
        )
        links[(link.src, link.dst)] = link
    return InfrastructureSnapshot(nodes=nodes, links=links, timestamp=int(doc["timestamp"]))
