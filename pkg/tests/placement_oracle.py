"""Independent brute-force placement oracle.

Enumerates every |nodes|^|services| assignment (chunked, vectorized) and
checks the constraint semantics re-derived from first principles: node alive
with required software/IoT, per-node RAM sums within the capacity left by
other applications, and every inter-node service link riding an alive
directed link within its latency bound and cumulative bandwidth. This is
deliberately NOT the backtracking search: no pruning order, no incremental
state, just leaf checks over the full assignment space.
"""

from __future__ import annotations

import numpy as np

CHUNK = 1 << 16


def _prepare(spec, snapshot, external):
    services = sorted(spec.services)
    nodes = sorted(n for n, state in snapshot.nodes.items() if state.alive)
    if not nodes:
        return None
    n = len(nodes)
    node_index = {nid: i for i, nid in enumerate(nodes)}

    hw = np.array([spec.services[s].hardware for s in services], dtype=np.int64)
    cap = np.array(
        [snapshot.nodes[nid].free_hw - external.hw(nid) for nid in nodes], dtype=np.int64
    )

    static_ok = np.zeros((len(services), n), dtype=bool)
    for si, sid in enumerate(services):
        req = spec.services[sid]
        for ni, nid in enumerate(nodes):
            node = snapshot.nodes[nid]
            static_ok[si, ni] = req.software <= node.software and req.iot <= node.iot_devices

    # absent or dead links are unusable via infinite latency; their bandwidth
    # stays +inf so the capacity check only bites where demand can exist
    lat = np.full((n, n), np.inf)
    bw_left = np.full((n, n), np.inf)
    np.fill_diagonal(lat, 0.0)
    for (a, b), link in snapshot.links.items():
        if a in node_index and b in node_index and link.alive:
            i, j = node_index[a], node_index[b]
            lat[i, j] = link.latency_ms
            bw_left[i, j] = link.bandwidth_mbps - external.bw(a, b)

    pairs = []
    for si, sid in enumerate(services):
        for target, lreq in spec.services[sid].links.items():
            pairs.append((si, services.index(target), lreq.max_latency_ms, lreq.min_bandwidth_mbps))
    return services, nodes, hw, cap, static_ok, lat, bw_left, pairs


def find_valid_assignment(spec, snapshot, external):
    """First valid assignment in enumeration order (services sorted by id,
    node indices as mixed-radix digits), or None if no assignment is valid."""
    prepared = _prepare(spec, snapshot, external)
    if prepared is None:
        return None if spec.services else {}
    services, nodes, hw, cap, static_ok, lat, bw_left, pairs = prepared
    s_count, n_count = len(services), len(nodes)
    if s_count == 0:
        return {}
    total = n_count**s_count

    for lo in range(0, total, CHUNK):
        hi = min(lo + CHUNK, total)
        idx = np.arange(lo, hi, dtype=np.int64)
        assign = np.empty((hi - lo, s_count), dtype=np.int64)
        rest = idx
        for si in range(s_count - 1, -1, -1):
            assign[:, si] = rest % n_count
            rest = rest // n_count

        ok = np.ones(hi - lo, dtype=bool)
        for si in range(s_count):
            ok &= static_ok[si, assign[:, si]]

        loads = np.zeros((hi - lo, n_count), dtype=np.int64)
        rows = np.arange(hi - lo)
        for si in range(s_count):
            loads[rows, assign[:, si]] += hw[si]
        ok &= (loads <= cap[None, :]).all(axis=1)

        link_demand = np.zeros((hi - lo, n_count * n_count))
        for si, ti, max_lat, min_bw in pairs:
            src = assign[:, si]
            dst = assign[:, ti]
            distinct = src != dst
            ok &= ~distinct | (lat[src, dst] <= max_lat)
            flat = src * n_count + dst
            contrib = np.where(distinct, min_bw, 0.0)
            np.add.at(link_demand, (rows, flat), contrib)
        ok &= (link_demand <= bw_left.reshape(-1)[None, :] + 1e-9).all(axis=1)

        if ok.any():
            winner = int(np.argmax(ok))
            return {services[si]: nodes[assign[winner, si]] for si in range(s_count)}
    return None


def exists_valid_placement(spec, snapshot, external) -> bool:
    return find_valid_assignment(spec, snapshot, external) is not None
