"""Walkthrough: the two-tier monitoring overlay and differential reports.

Shows leader election by latency, k-medoids restructuring, cross-group QoS
estimation, and how the sensitivity gate suppresses insignificant reports.

Run with: python demos/02_monitoring_overlay.py
"""

import json

from edgearm.dynamics import build_testbed, sqrt_groups
from edgearm.overlay import Monitor, measured_pairs


def main():
    gt = build_testbed(12, 3)
    monitor = Monitor(gt, sensitivity=0.1, restructure_every=5, k_fn=sqrt_groups)
    monitor.bootstrap()
    print("after bootstrap (everyone joined the first leader):")
    print("  leaders:", sorted(monitor.overlay.leaders))
    print("  measured pairs:", len(measured_pairs(monitor.overlay)), "of", 12 * 11)

    report = monitor.tick()
    doc = json.loads(report)
    print("\nfirst report: timestamp", doc["timestamp"], "with", len(doc["links"]), "links")

    print("\nnothing changed -> the publish is suppressed:", monitor.tick())

    gt.nodes["node003"].free_hw = int(gt.nodes["node003"].free_hw * 0.5)
    report = monitor.tick()
    print("a 50% RAM drop republishes: timestamp", json.loads(report)["timestamp"])

    for _ in range(5):
        monitor.tick()
    print("\nafter periodic k-medoids restructuring (3 regions emerge):")
    print("  leaders:", sorted(monitor.overlay.leaders))
    print("  measured pairs:", len(measured_pairs(monitor.overlay)), "of", 12 * 11)
    groups = {}
    for follower, leader in sorted(monitor.overlay.follower_of.items()):
        groups.setdefault(leader, []).append(follower)
    for leader, members in sorted(groups.items()):
        print(f"  group {leader}: {members}")

    gt.nodes[sorted(monitor.overlay.leaders)[0]].alive = False
    monitor.tick()
    print("\na leader died; orphans re-joined by minimum latency:")
    print("  leaders:", sorted(monitor.overlay.leaders))


if __name__ == "__main__":
    main()
