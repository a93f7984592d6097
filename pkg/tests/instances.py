"""Seeded random placement instances for property tests.

Instances are generated mostly satisfiable (capacity headroom, latency bounds
near the infrastructure scale) with occasional tight or broken elements so
both outcomes occur; sizes stay inside the stated bounds of the accepting
tests. The same generator drives perturbation sequences for incremental
reasoning checks.
"""

from __future__ import annotations

import random

from edgearm.model import (
    AllocationLedger,
    ApplicationSpec,
    InfrastructureSnapshot,
    LinkRequirement,
    LinkState,
    NodeState,
    Placement,
    ServiceRequirement,
)

SOFTWARE_POOL = ["docker", "python", "gcc", "mysql", "redis"]
IOT_POOL = ["cam", "thermo", "gps"]


def random_snapshot(rng: random.Random, n_nodes: int, timestamp: int = 1) -> InfrastructureSnapshot:
    nodes = {}
    for i in range(n_nodes):
        nid = f"n{i:02d}"
        nodes[nid] = NodeState(
            node_id=nid,
            free_hw=rng.randint(800, 4000),
            software=frozenset(rng.sample(SOFTWARE_POOL, rng.randint(2, len(SOFTWARE_POOL)))),
            iot_devices=frozenset(
                rng.sample(IOT_POOL, rng.randint(0, len(IOT_POOL)))
            ),
            alive=rng.random() > 0.05,
        )
    links = {}
    ids = sorted(nodes)
    for a in ids:
        for b in ids:
            if a == b:
                continue
            alive = nodes[a].alive and nodes[b].alive and rng.random() > 0.04
            links[(a, b)] = LinkState(
                src=a,
                dst=b,
                latency_ms=rng.uniform(2, 120),
                bandwidth_mbps=rng.uniform(30, 150),
                alive=alive,
            )
    return InfrastructureSnapshot(nodes=nodes, links=links, timestamp=timestamp)


def random_spec(rng: random.Random, n_services: int, app_id: str = "app") -> ApplicationSpec:
    ids = [f"s{i:02d}" for i in range(n_services)]
    services = {}
    for sid in ids:
        links = {}
        for target in ids:
            if target != sid and rng.random() < 0.25:
                links[target] = LinkRequirement(
                    max_latency_ms=rng.uniform(60, 300),
                    min_bandwidth_mbps=rng.uniform(5, 25),
                )
        services[sid] = ServiceRequirement(
            service_id=sid,
            hardware=rng.randint(50, 700),
            software=frozenset(
                rng.sample(SOFTWARE_POOL, rng.randint(0, 2))
            ),
            iot=frozenset(rng.sample(IOT_POOL, 1)) if rng.random() < 0.15 else frozenset(),
            links=links,
        )
    return ApplicationSpec(app_id=app_id, services=services, images={s: "" for s in ids})


def random_external(rng: random.Random, snapshot: InfrastructureSnapshot) -> AllocationLedger:
    ledger = AllocationLedger()
    if rng.random() < 0.5:
        return ledger
    for nid, node in snapshot.nodes.items():
        if rng.random() < 0.3:
            ledger.hw_used[nid] = rng.randint(0, node.free_hw // 3)
    for key, link in snapshot.links.items():
        if rng.random() < 0.1:
            ledger.bw_used[key] = rng.uniform(0, link.bandwidth_mbps / 3)
    return ledger


def random_instance(seed: int, max_nodes: int = 20, max_services: int = 16):
    rng = random.Random(seed)
    n_nodes = rng.randint(2, max_nodes)
    n_services = rng.randint(1, max_services)
    snapshot = random_snapshot(rng, n_nodes)
    spec = random_spec(rng, n_services)
    external = random_external(rng, snapshot)
    return spec, snapshot, external


def small_instance(seed: int, leaf_budget: int = 1 << 20):
    """Instance small enough for full enumeration: at most 8 services and 10
    nodes, and nodes^services within the leaf budget."""
    rng = random.Random(seed)
    while True:
        n_services = rng.randint(1, 8)
        n_nodes = rng.randint(2, 10)
        if n_nodes**n_services <= leaf_budget:
            break
    snapshot = random_snapshot(rng, n_nodes)
    spec = random_spec(rng, n_services)
    external = random_external(rng, snapshot)
    return spec, snapshot, external


def perturb_snapshot(rng: random.Random, snapshot: InfrastructureSnapshot) -> InfrastructureSnapshot:
    """Mild world change: some nodes lose capacity or die, some links degrade."""
    nodes = {}
    for nid, node in snapshot.nodes.items():
        alive = node.alive if rng.random() > 0.06 else not node.alive
        free = max(node.free_hw + rng.randint(-400, 200), 0)
        nodes[nid] = NodeState(nid, free, node.software, node.iot_devices, alive)
    links = {}
    for key, link in snapshot.links.items():
        endpoint_ok = nodes[key[0]].alive and nodes[key[1]].alive
        alive = endpoint_ok and (link.alive if rng.random() > 0.05 else not link.alive)
        links[key] = LinkState(
            src=link.src,
            dst=link.dst,
            latency_ms=max(link.latency_ms + rng.uniform(-20, 40), 0.0),
            bandwidth_mbps=max(link.bandwidth_mbps + rng.uniform(-30, 10), 0.0),
            alive=alive,
        )
    return InfrastructureSnapshot(nodes=nodes, links=links, timestamp=snapshot.timestamp + 1)


def evolve_spec(rng: random.Random, spec: ApplicationSpec) -> ApplicationSpec:
    """Mild commit: maybe drop a service, maybe add one, maybe retune values."""
    services = dict(spec.services)
    ids = sorted(services)
    if len(ids) > 1 and rng.random() < 0.3:
        victim = rng.choice(ids)
        services.pop(victim)
        services = {
            sid: ServiceRequirement(
                service_id=sid,
                hardware=req.hardware,
                software=req.software,
                iot=req.iot,
                links={t: l for t, l in req.links.items() if t != victim},
            )
            for sid, req in services.items()
        }
    if rng.random() < 0.3:
        while True:
            new_id = f"s{rng.randint(100, 9999):04d}"
            if new_id not in services:
                break
        peers = sorted(services)
        links = {}
        if peers and rng.random() < 0.7:
            links[rng.choice(peers)] = LinkRequirement(
                max_latency_ms=rng.uniform(60, 300), min_bandwidth_mbps=rng.uniform(5, 25)
            )
        services[new_id] = ServiceRequirement(
            service_id=new_id, hardware=rng.randint(50, 700), links=links
        )
    retuned = {}
    for sid, req in services.items():
        if rng.random() < 0.25:
            retuned[sid] = ServiceRequirement(
                service_id=sid,
                hardware=max(req.hardware + rng.randint(-150, 150), 0),
                software=req.software,
                iot=req.iot,
                links=req.links,
            )
        else:
            retuned[sid] = req
    return ApplicationSpec(app_id=spec.app_id, services=retuned, images=dict(spec.images))
