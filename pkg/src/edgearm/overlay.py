"""Simulated two-tier monitoring overlay.

Follower nodes group under a leader chosen by minimum latency; leaders measure
each other. Only intra-group pairs, follower-leader pairs, and leader-leader
pairs are measured directly; any other pair is estimated by composing the
published segment values (latencies sum, bandwidth takes the minimum of the
segments). Group structure is periodically rebuilt with a PAM-style k-medoids
pass over the latency distance matrix.

Reports are differential: a metric's published value only moves when its mean
or variance drifts beyond the sensitivity threshold relative to the last
published value, but liveness flips always publish. A report whose content
would be byte-identical to the previous one is suppressed entirely, so
consumers can detect significant change by hashing the document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NodeUnknown, SegmentMissing, TooFewNodes
from .model import (
    InfrastructureSnapshot,
    LinkState,
    NodeState,
    canonical_json,
    serialize_report,
)
from .world import GroundTruth

REL_EPS = 1e-9  # guards relative comparison against zero means


@dataclass(frozen=True)
class OverlayState:
    leaders: frozenset[str]
    follower_of: dict[str, str] = field(default_factory=dict)
    epoch: int = 0

    def leader_of(self, node_id: str) -> str:
        if node_id in self.leaders:
            return node_id
        return self.follower_of[node_id]

    def group_of(self, leader: str) -> set[str]:
        members = {f for f, l in self.follower_of.items() if l == leader}
        members.add(leader)
        return members

    def members(self) -> set[str]:
        return set(self.leaders) | set(self.follower_of)


def measured_pairs(overlay: OverlayState) -> set[tuple[str, str]]:
    """Directed pairs the overlay measures directly: intra-group pairs (followers
    with each other and with their leader, both directions) plus leader pairs."""
    pairs: set[tuple[str, str]] = set()
    for leader in overlay.leaders:
        group = sorted(overlay.group_of(leader))
        for a in group:
            for b in group:
                if a != b:
                    pairs.add((a, b))
    for a in overlay.leaders:
        for b in overlay.leaders:
            if a != b:
                pairs.add((a, b))
    return pairs


def join(node_id: str, overlay: OverlayState, ground_truth: GroundTruth) -> OverlayState:
    """Attach a node as follower of the alive leader with minimum latency from it
    (ties to the smallest leader id). The first node to join becomes the leader."""
    node = ground_truth.nodes.get(node_id)
    if node is None:
        raise NodeUnknown(node_id)
    alive_leaders = sorted(
        l for l in overlay.leaders if ground_truth.nodes[l].alive and l != node_id
    )
    if not alive_leaders:
        return OverlayState(
            leaders=overlay.leaders | {node_id},
            follower_of=dict(overlay.follower_of),
            epoch=overlay.epoch,
        )
    best = min(alive_leaders, key=lambda l: (ground_truth.latency(node_id, l), l))
    follower_of = dict(overlay.follower_of)
    follower_of[node_id] = best
    return OverlayState(
        leaders=overlay.leaders - {node_id}, follower_of=follower_of, epoch=overlay.epoch
    )


def _clustering_distance(ground_truth: GroundTruth, ids: list[str]) -> np.ndarray:
    """Symmetrized latency matrix (mean of the two directions) used as the
    k-medoids distance; keeps the clustering objective well defined when the
    two directions of a link drift apart."""
    n = len(ids)
    d = np.zeros((n, n))
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if i != j:
                d[i, j] = 0.5 * (ground_truth.latency(a, b) + ground_truth.latency(b, a))
    return d


def kmedoids_groups(
    distance: np.ndarray, ids: list[str], initial_medoids: list[str], max_iter: int | None = None
) -> tuple[list[str], dict[str, str], list[float]]:
    """PAM-style alternation: assign each node to its nearest medoid, then move
    each group's medoid to the member minimizing the within-group distance sum,
    until a fixed point. Returns (medoids, node -> medoid, objective history)."""
    index = {nid: i for i, nid in enumerate(ids)}
    medoids = sorted(initial_medoids)
    if max_iter is None:
        max_iter = max(len(ids) ** 2, 1)
    history: list[float] = []
    assign: dict[str, str] = {}
    for _ in range(max_iter):
        med_idx = np.array([index[m] for m in medoids])
        cols = distance[:, med_idx]  # node x medoid
        nearest = np.argmin(cols, axis=1)
        assign = {nid: medoids[nearest[i]] for i, nid in enumerate(ids)}
        history.append(float(cols[np.arange(len(ids)), nearest].sum()))

        new_medoids = []
        for m in medoids:
            members = sorted(nid for nid, med in assign.items() if med == m)
            rows = np.array([index[x] for x in members])
            sub = distance[np.ix_(rows, rows)]
            costs = sub.sum(axis=0)  # distance from every member to the candidate
            best = members[int(np.argmin(costs))]  # argmin ties break to smallest id
            new_medoids.append(best)
        new_medoids = sorted(set(new_medoids))
        if len(new_medoids) < len(medoids):
            # two groups collapsed onto one medoid; keep group count by padding
            # with the smallest unused ids (degenerate inputs only)
            unused = [nid for nid in ids if nid not in new_medoids]
            new_medoids += unused[: len(medoids) - len(new_medoids)]
            new_medoids = sorted(new_medoids)
        if new_medoids == medoids:
            break
        medoids = new_medoids
    return medoids, assign, history


def restructure(
    overlay: OverlayState,
    ground_truth: GroundTruth,
    k: int,
    _history_sink: list[float] | None = None,
) -> OverlayState:
    """Rebuild the group structure with k-medoids over alive nodes; the medoids
    become leaders. Initial medoids are the current leaders when their count is
    exactly k, otherwise the k smallest node ids."""
    alive = ground_truth.alive_nodes()
    if len(alive) < k or k < 1:
        raise TooFewNodes(f"need at least {k} alive nodes, have {len(alive)}")
    current = sorted(l for l in overlay.leaders if l in alive)
    initial = current if len(current) == k else alive[:k]
    distance = _clustering_distance(ground_truth, alive)
    medoids, assign, history = kmedoids_groups(distance, alive, initial)
    if _history_sink is not None:
        _history_sink.extend(history)
    follower_of = {nid: med for nid, med in assign.items() if nid not in medoids}
    return OverlayState(
        leaders=frozenset(medoids), follower_of=follower_of, epoch=overlay.epoch + 1
    )


def estimate_qos(
    f1: str,
    f2: str,
    overlay: OverlayState,
    measurements: dict[tuple[str, str], tuple[float, float]],
) -> tuple[float, float]:
    """Series composition of the follower->leader, leader->leader, and
    leader->follower segments: latencies add, bandwidth is the minimum. A
    segment is dropped when its endpoint is itself a leader; if both nodes
    share a leader the direct measurement is returned."""
    l1 = overlay.leader_of(f1)
    l2 = overlay.leader_of(f2)
    if l1 == l2:
        direct = measurements.get((f1, f2))
        if direct is None:
            raise SegmentMissing(f"no measurement for intra-group pair ({f1}, {f2})")
        return direct
    segments = []
    if f1 != l1:
        segments.append((f1, l1))
    segments.append((l1, l2))
    if f2 != l2:
        segments.append((l2, f2))
    latency = 0.0
    bandwidth = math.inf
    for seg in segments:
        value = measurements.get(seg)
        if value is None:
            raise SegmentMissing(f"no measurement for segment {seg}")
        latency += value[0]
        bandwidth = min(bandwidth, value[1])
    return latency, bandwidth


class _Series:
    """Running mean/variance of one metric since its last published value."""

    __slots__ = ("count", "mean", "m2", "published_mean", "published_var")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.published_mean: float | None = None
        self.published_var: float | None = None

    def add(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else 0.0

    def drifted(self, sensitivity: float) -> bool:
        if self.published_mean is None:
            return True
        rel_mean = abs(self.mean - self.published_mean) / max(abs(self.published_mean), REL_EPS)
        if rel_mean > sensitivity:
            return True
        rel_var = abs(self.variance - self.published_var) / max(abs(self.published_var), REL_EPS)
        return rel_var > sensitivity

    def publish(self) -> None:
        self.published_mean = self.mean
        self.published_var = self.variance
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0


class Monitor:
    """Owner of the overlay, the metric series, and the published report stream.

    ``tick()`` advances one monitoring period: membership maintenance (dead
    nodes leave, orphaned followers and revived nodes re-join), periodic
    k-medoids restructuring, then sampling and the sensitivity-gated publish.
    """

    def __init__(
        self,
        ground_truth: GroundTruth,
        sensitivity: float = 0.1,
        restructure_every: int = 10,
        k_fn=None,
    ):
        if not 0 < sensitivity < 1:
            raise ValueError("sensitivity must be in (0, 1)")
        self.gt = ground_truth
        self.sensitivity = sensitivity
        self.restructure_every = restructure_every
        self.k_fn = k_fn or (lambda n: math.ceil(math.sqrt(n)))
        self.overlay = OverlayState(leaders=frozenset())
        self.series: dict[tuple, _Series] = {}
        self.alive_published: dict[tuple, bool] = {}
        self.timestamp = 0
        self.tick_count = 0
        self.last_body: bytes | None = None
        self.last_report: bytes | None = None
        self.clustering_history: list[float] = []

    # -- overlay membership ------------------------------------------------

    def bootstrap(self) -> None:
        for node_id in self.gt.alive_nodes():
            self.overlay = join(node_id, self.overlay, self.gt)

    def _maintain_membership(self) -> None:
        alive = set(self.gt.alive_nodes())
        overlay = self.overlay
        dead_leaders = sorted(set(overlay.leaders) - alive)
        dead_followers = sorted(set(overlay.follower_of) - alive)
        orphans = sorted(
            f for f, l in overlay.follower_of.items() if l in dead_leaders and f in alive
        )
        if dead_leaders or dead_followers:
            overlay = OverlayState(
                leaders=frozenset(l for l in overlay.leaders if l in alive),
                follower_of={
                    f: l
                    for f, l in overlay.follower_of.items()
                    if f in alive and l in alive and l not in dead_leaders
                },
                epoch=overlay.epoch,
            )
        for node_id in orphans:
            overlay = join(node_id, overlay, self.gt)
        for node_id in sorted(alive - overlay.members()):
            overlay = join(node_id, overlay, self.gt)
        self.overlay = overlay

    # -- sampling and publishing --------------------------------------------

    def _sample(self) -> None:
        for node_id in self.gt.alive_nodes():
            key = ("node", node_id)
            self.series.setdefault(key, _Series()).add(self.gt.nodes[node_id].free_hw)
        for src, dst in sorted(measured_pairs(self.overlay)):
            link = self.gt.links.get((src, dst))
            if link is None or not self.gt.link_alive(src, dst):
                continue
            self.series.setdefault(("lat", src, dst), _Series()).add(link.latency_ms)
            self.series.setdefault(("bw", src, dst), _Series()).add(link.bandwidth_mbps)

    def _published_segments(self) -> dict[tuple[str, str], tuple[float, float]]:
        out = {}
        for key, series in self.series.items():
            if key[0] == "lat" and series.published_mean is not None:
                bw = self.series.get(("bw",) + key[1:])
                if bw is not None and bw.published_mean is not None:
                    out[(key[1], key[2])] = (series.published_mean, bw.published_mean)
        return out

    def sample_and_publish(self) -> bytes | None:
        """Sample every measured metric, update the differential gate, and emit
        the full normalized report unless the resulting document would be
        byte-identical to the previous one."""
        self._sample()
        for series in self.series.values():
            if series.count and series.drifted(self.sensitivity):
                series.publish()

        nodes: dict[str, NodeState] = {}
        for node_id in self.gt.node_ids():
            gnode = self.gt.nodes[node_id]
            series = self.series.get(("node", node_id))
            published = series.published_mean if series else None
            free = int(round(published)) if published is not None else gnode.free_hw
            nodes[node_id] = NodeState(
                node_id=node_id,
                free_hw=max(free, 0),
                software=gnode.software,
                iot_devices=gnode.iot_devices,
                alive=gnode.alive,
            )

        measured = measured_pairs(self.overlay)
        segments = self._published_segments()
        links: dict[tuple[str, str], LinkState] = {}
        for (src, dst), glink in sorted(self.gt.links.items()):
            alive = self.gt.link_alive(src, dst)
            lat_series = self.series.get(("lat", src, dst))
            bw_series = self.series.get(("bw", src, dst))
            lat = lat_series.published_mean if lat_series else None
            bw = bw_series.published_mean if bw_series else None
            if alive and (src, dst) not in measured and src in self.overlay.members() and dst in self.overlay.members():
                try:
                    lat, bw = estimate_qos(src, dst, self.overlay, segments)
                except SegmentMissing:
                    pass  # keep the stale direct values until segments publish
            if lat is None or bw is None:
                # never measured nor estimable: freeze at the testbed baseline so
                # a suppressed publish cannot leak live ground-truth drift
                lat = glink.baseline_latency_ms if lat is None else lat
                bw = glink.baseline_bandwidth_mbps if bw is None else bw
            links[(src, dst)] = LinkState(
                src=src, dst=dst, latency_ms=lat, bandwidth_mbps=bw, alive=alive
            )

        body = canonical_json(
            {
                "nodes": [
                    {
                        "id": n.node_id,
                        "free_hw": n.free_hw,
                        "software": sorted(n.software),
                        "iot": sorted(n.iot_devices),
                        "alive": n.alive,
                    }
                    for n in sorted(nodes.values(), key=lambda n: n.node_id)
                ],
                "links": [
                    {
                        "src": l.src,
                        "dst": l.dst,
                        "latency_ms": l.latency_ms,
                        "bandwidth_mbps": l.bandwidth_mbps,
                        "alive": l.alive,
                    }
                    for l in sorted(links.values(), key=lambda l: (l.src, l.dst))
                ],
            }
        )
        if body == self.last_body:
            return None
        self.last_body = body
        self.timestamp += 1
        snapshot = InfrastructureSnapshot(nodes=nodes, links=links, timestamp=self.timestamp)
        self.last_report = serialize_report(snapshot)
        return self.last_report

    def tick(self) -> bytes | None:
        """One monitoring period: maintain membership, maybe restructure, publish."""
        self.tick_count += 1
        self._maintain_membership()
        alive = self.gt.alive_nodes()
        if (
            self.restructure_every
            and alive
            and self.tick_count % self.restructure_every == 0
        ):
            k = max(1, min(self.k_fn(len(alive)), len(alive)))
            self.overlay = restructure(
                self.overlay, self.gt, k, _history_sink=self.clustering_history
            )
        return self.sample_and_publish()
