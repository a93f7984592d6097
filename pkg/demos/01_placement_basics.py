"""Walkthrough: descriptor files, validation, and incremental re-placement.

Run with: python demos/01_placement_basics.py
"""

from edgearm import (
    AllocationLedger,
    InfrastructureSnapshot,
    LinkState,
    NodeState,
    Placement,
    continuous_step,
    spec_from_texts,
    validate,
)

COMPOSE = """
services:
  web:
    image: localhost:5000/stackdemo
  redis:
    image: redis:alpine
"""

REQUIREMENTS = """
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


def snapshot(n1_alive=True):
    nodes = {
        "vm1": NodeState("vm1", free_hw=8, alive=n1_alive),
        "vm2": NodeState("vm2", free_hw=8),
        "vm3": NodeState("vm3", free_hw=8),
    }
    links = {}
    for a in nodes:
        for b in nodes:
            if a != b:
                alive = nodes[a].alive and nodes[b].alive
                links[(a, b)] = LinkState(a, b, latency_ms=100.0, bandwidth_mbps=60.0, alive=alive)
    return InfrastructureSnapshot(nodes=nodes, links=links, timestamp=1)


def main():
    spec = spec_from_texts("stackdemo", COMPOSE, REQUIREMENTS)
    print("services:", spec.service_ids())

    print("\n-- first placement (no previous deployment) --")
    outcome = continuous_step(spec, None, snapshot(), AllocationLedger())
    for sid, node in sorted(outcome.placement.assignment.items()):
        print(f"  {sid} -> {node}")
    print("candidates explored:", outcome.stats["candidate_assignments_explored"])

    print("\n-- validation of a hand-made placement --")
    bad = Placement("stackdemo", {"web": "vm1", "redis": "vm2"})
    world = snapshot()
    for violation in validate(spec, bad, world, AllocationLedger()):
        print("  violation:", violation.kind.value, violation.service_id, violation.partner)
    print("  (an empty list means the placement satisfies every requirement)")

    print("\n-- a node dies: only its service moves --")
    previous = outcome.placement
    degraded = snapshot(n1_alive=False)
    step = continuous_step(spec, previous, degraded, AllocationLedger())
    print("  moved services:", sorted(step.replaced_services))
    for sid, node in sorted(step.placement.assignment.items()):
        marker = " (kept)" if previous.assignment.get(sid) == node else " (moved)"
        print(f"  {sid} -> {node}{marker}")
    print("  fallback used:", step.fallback_used)


if __name__ == "__main__":
    main()
