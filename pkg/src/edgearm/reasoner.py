"""The decision engine: placement validation, exhaustive backtracking search,
and the incremental re-placement step that preserves unaffected services.

The incremental step works in three phases. First it validates the previous
assignment of the services both placements share and releases services that
left the application. Services that joined, plus every endpoint of a violated
constraint, become the partial problem handed to the backtracking search while
everything else stays pinned to its current node. If the partial problem is
infeasible, a full re-placement of all services is attempted before declaring
the application unplaceable; that fallback is flagged in the outcome.

All orderings are fixed (services by descending hardware then id, candidate
nodes by ascending id) so identical inputs produce identical outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import Unplaceable
from .model import (
    AllocationLedger,
    ApplicationSpec,
    InfrastructureSnapshot,
    Placement,
)


class ViolationKind(str, Enum):
    NODE_DOWN = "node_down"
    HW_INSUFFICIENT = "hw_insufficient"
    SOFTWARE_MISSING = "software_missing"
    IOT_MISSING = "iot_missing"
    LINK_DOWN = "link_down"
    LATENCY_EXCEEDED = "latency_exceeded"
    BANDWIDTH_INSUFFICIENT = "bandwidth_insufficient"
    UNASSIGNED = "unassigned"


_PAIR_KINDS = {
    ViolationKind.LINK_DOWN,
    ViolationKind.LATENCY_EXCEEDED,
    ViolationKind.BANDWIDTH_INSUFFICIENT,
}


@dataclass(frozen=True)
class Violation:
    """One broken constraint; partner is set iff the kind concerns a service pair."""

    kind: ViolationKind
    service_id: str
    partner: str | None = None
    node_id: str | None = None
    link: tuple[str, str] | None = None

    def __post_init__(self):
        if (self.partner is not None) != (self.kind in _PAIR_KINDS):
            raise ValueError(f"partner presence inconsistent with kind {self.kind}")

    def endpoints(self) -> set[str]:
        out = {self.service_id}
        if self.partner is not None:
            out.add(self.partner)
        return out


@dataclass
class ReasoningOutcome:
    placement: Placement
    fallback_used: bool = False
    replaced_services: set[str] = field(default_factory=set)
    removed_services: set[str] = field(default_factory=set)
    stats: dict = field(default_factory=lambda: {"candidate_assignments_explored": 0})


def validate(
    spec: ApplicationSpec,
    placement: Placement,
    snapshot: InfrastructureSnapshot,
    external: AllocationLedger,
) -> list[Violation]:
    """Check a (possibly partial) assignment charged on top of ``external``.

    Returns the empty list iff every assigned node is alive with the required
    software and IoT devices, per-node hardware sums fit the free capacity
    left by other applications, and every required service link whose
    endpoints sit on distinct nodes rides an alive directed infrastructure
    link within its latency bound and remaining bandwidth. Colocated pairs
    always satisfy their link requirement. Spec services missing from the
    assignment are reported as unassigned and skipped in pair checks.
    """
    violations: list[Violation] = []
    assignment = placement.assignment

    # Per-node demand of this placement, for the shared-capacity check.
    node_load: dict[str, int] = {}
    for sid in sorted(spec.services):
        node = assignment.get(sid)
        if node is not None:
            node_load[node] = node_load.get(node, 0) + spec.services[sid].hardware

    # Per-infrastructure-link demand of this placement, for cumulative bandwidth.
    link_load: dict[tuple[str, str], float] = {}
    for sid in sorted(spec.services):
        req = spec.services[sid]
        src = assignment.get(sid)
        if src is None:
            continue
        for target in sorted(req.links):
            dst = assignment.get(target)
            if dst is None or dst == src:
                continue
            key = (src, dst)
            link_load[key] = link_load.get(key, 0.0) + req.links[target].min_bandwidth_mbps

    for sid in sorted(spec.services):
        req = spec.services[sid]
        node_id = assignment.get(sid)
        if node_id is None:
            violations.append(Violation(ViolationKind.UNASSIGNED, sid))
            continue
        node = snapshot.nodes.get(node_id)
        if node is None or not node.alive:
            violations.append(Violation(ViolationKind.NODE_DOWN, sid, node_id=node_id))
            continue
        if node_load[node_id] > node.free_hw - external.hw(node_id):
            violations.append(Violation(ViolationKind.HW_INSUFFICIENT, sid, node_id=node_id))
        if not req.software <= node.software:
            violations.append(Violation(ViolationKind.SOFTWARE_MISSING, sid, node_id=node_id))
        if not req.iot <= node.iot_devices:
            violations.append(Violation(ViolationKind.IOT_MISSING, sid, node_id=node_id))

    for sid in sorted(spec.services):
        req = spec.services[sid]
        src = assignment.get(sid)
        if src is None or src not in snapshot.nodes or not snapshot.nodes[src].alive:
            continue
        for target in sorted(req.links):
            dst = assignment.get(target)
            if dst is None or dst not in snapshot.nodes or not snapshot.nodes[dst].alive:
                continue
            if dst == src:
                continue  # colocated pairs are always satisfied
            lreq = req.links[target]
            link = snapshot.link(src, dst)
            if link is None or not link.alive:
                violations.append(
                    Violation(ViolationKind.LINK_DOWN, sid, partner=target, link=(src, dst))
                )
                continue
            if link.latency_ms > lreq.max_latency_ms:
                violations.append(
                    Violation(ViolationKind.LATENCY_EXCEEDED, sid, partner=target, link=(src, dst))
                )
            if link_load[(src, dst)] + external.bw(src, dst) > link.bandwidth_mbps + 1e-9:
                violations.append(
                    Violation(
                        ViolationKind.BANDWIDTH_INSUFFICIENT, sid, partner=target, link=(src, dst)
                    )
                )
    return violations


class _SearchState:
    """Mutable capacity/bandwidth bookkeeping shared by the backtracking search."""

    __slots__ = ("snapshot", "spec", "rem_hw", "bw_left", "assignment", "explored")

    def __init__(
        self,
        spec: ApplicationSpec,
        snapshot: InfrastructureSnapshot,
        external: AllocationLedger,
    ):
        self.spec = spec
        self.snapshot = snapshot
        self.rem_hw = {
            nid: n.free_hw - external.hw(nid)
            for nid, n in snapshot.nodes.items()
            if n.alive
        }
        self.bw_left = {
            key: link.bandwidth_mbps - external.bw(*key)
            for key, link in snapshot.links.items()
            if link.alive
        }
        self.assignment: dict[str, str] = {}
        self.explored = 0

    def _pair_demands(self, sid: str, node_id: str):
        """Directed (infra link, demand, max latency) triples between sid@node_id
        and every already-assigned peer it shares a requirement with."""
        req = self.spec.services[sid]
        for target, lreq in req.links.items():
            tnode = self.assignment.get(target)
            if tnode is not None and tnode != node_id:
                yield (node_id, tnode), lreq
        for other, onode in self.assignment.items():
            if other == sid or onode == node_id:
                continue
            back = self.spec.services[other].links.get(sid)
            if back is not None:
                yield (onode, node_id), back

    def feasible(self, sid: str, node_id: str) -> bool:
        req = self.spec.services[sid]
        node = self.snapshot.nodes[node_id]
        if req.hardware > self.rem_hw[node_id]:
            return False
        if not req.software <= node.software or not req.iot <= node.iot_devices:
            return False
        demand: dict[tuple[str, str], float] = {}
        for key, lreq in self._pair_demands(sid, node_id):
            left = self.bw_left.get(key)
            if left is None:  # link absent or dead
                return False
            link = self.snapshot.links[key]
            if link.latency_ms > lreq.max_latency_ms:
                return False
            # several of this service's pairs may ride the same directed link
            demand[key] = demand.get(key, 0.0) + lreq.min_bandwidth_mbps
        for key, total in demand.items():
            if total > self.bw_left[key] + 1e-9:
                return False
        return True

    def assign(self, sid: str, node_id: str) -> None:
        self.rem_hw[node_id] -= self.spec.services[sid].hardware
        for key, lreq in self._pair_demands(sid, node_id):
            self.bw_left[key] -= lreq.min_bandwidth_mbps
        self.assignment[sid] = node_id

    def unassign(self, sid: str) -> None:
        node_id = self.assignment.pop(sid)
        self.rem_hw[node_id] += self.spec.services[sid].hardware
        for key, lreq in self._pair_demands(sid, node_id):
            self.bw_left[key] += lreq.min_bandwidth_mbps


def search(
    spec: ApplicationSpec,
    snapshot: InfrastructureSnapshot,
    fixed: dict[str, str],
    to_place: set[str],
    external: AllocationLedger,
    _counter: list[int] | None = None,
) -> Placement | None:
    """Exhaustive backtracking completion of a partial placement.

    Services in ``to_place`` are ordered by descending hardware requirement
    (ties by ascending id); candidate nodes are tried in ascending id order. A
    node is rejected as soon as any hardware, software, IoT, or link constraint
    against an already-assigned service fails. Returns a total placement with
    ``fixed`` untouched, or None if none exists. ``_counter``, when given,
    accumulates the number of candidate (service, node) assignments tried.
    """
    state = _SearchState(spec, snapshot, external)
    for sid in sorted(fixed):
        node_id = fixed[sid]
        if node_id not in state.rem_hw:
            return None  # a pinned node is dead: the partial problem is infeasible
        if any(key not in state.bw_left for key, _ in state._pair_demands(sid, node_id)):
            return None  # a link between pinned services is absent or dead
        state.assign(sid, node_id)

    order = sorted(to_place, key=lambda s: (-spec.services[s].hardware, s))
    candidates = sorted(state.rem_hw)

    def future_feasible(depth: int) -> bool:
        # forward check: a partial assignment that leaves any future service
        # without a single feasible node cannot extend to a solution (capacity
        # and satisfied pairs only shrink along the branch)
        for future in order[depth:]:
            if not any(state.feasible(future, node_id) for node_id in candidates):
                return False
        return True

    def backtrack(depth: int) -> bool:
        if depth == len(order):
            return True
        sid = order[depth]
        for node_id in candidates:
            state.explored += 1
            if not state.feasible(sid, node_id):
                continue
            state.assign(sid, node_id)
            if future_feasible(depth + 1) and backtrack(depth + 1):
                return True
            state.unassign(sid)
        return False

    found = backtrack(0)
    if _counter is not None:
        _counter[0] += state.explored
    if not found:
        return None
    return Placement(spec.app_id, dict(state.assignment))


def continuous_step(
    spec: ApplicationSpec,
    previous: Placement | None,
    snapshot: InfrastructureSnapshot,
    external: AllocationLedger,
) -> ReasoningOutcome:
    """One incremental reasoning step for an application.

    Raises Unplaceable if neither the partial re-placement nor the full
    fallback search finds a valid total placement.
    """
    counter = [0]
    if previous is None:
        placement = search(spec, snapshot, {}, set(spec.services), external, counter)
        if placement is None:
            raise _unplaceable(spec.app_id, counter[0])
        return ReasoningOutcome(
            placement=placement,
            fallback_used=False,
            replaced_services=set(spec.services),
            removed_services=set(),
            stats={"candidate_assignments_explored": counter[0]},
        )

    removed = set(previous.assignment) - set(spec.services)
    added = set(spec.services) - set(previous.assignment)
    retained = {
        sid: node for sid, node in previous.assignment.items() if sid in spec.services
    }

    partial = Placement(spec.app_id, dict(retained))
    affected: set[str] = set()
    for violation in validate(spec, partial, snapshot, external):
        if violation.kind is ViolationKind.UNASSIGNED:
            continue  # those are the added services, already in the search set
        affected |= violation.endpoints() & set(retained)

    to_place = added | affected
    fixed = {sid: node for sid, node in retained.items() if sid not in affected}

    placement = search(spec, snapshot, fixed, to_place, external, counter)
    if placement is not None:
        return ReasoningOutcome(
            placement=placement,
            fallback_used=False,
            replaced_services=set(to_place),
            removed_services=removed,
            stats={"candidate_assignments_explored": counter[0]},
        )

    placement = search(spec, snapshot, {}, set(spec.services), external, counter)
    if placement is None:
        raise _unplaceable(spec.app_id, counter[0])
    return ReasoningOutcome(
        placement=placement,
        fallback_used=True,
        replaced_services=set(spec.services),
        removed_services=removed,
        stats={"candidate_assignments_explored": counter[0]},
    )


def _unplaceable(app_id: str, explored: int) -> Unplaceable:
    exc = Unplaceable(f"{app_id}: no valid placement exists")
    exc.explored = explored
    return exc
