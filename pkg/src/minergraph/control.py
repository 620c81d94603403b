"""Hierarchy and influence analyses.

Three views of control over the miner network:
- against-the-hierarchy edges (value sent to miners with more hash power),
- driver nodes for structural controllability (unmatched nodes of a maximum
  matching on the bipartite split graph),
- minimum-hash-power dominating sets, full coverage and a hash-threshold
  variant, via seeded multi-start greedy plus an exact oracle for small
  instances.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .netbuild import MinerNetwork, MinerStats

GREEDY_EPSILON = 1e-12
EXACT_MAX_NODES = 20


@dataclass
class HierarchyReport:
    against_edges: list[tuple[str, str]]
    with_edges: list[tuple[str, str]]
    tied_edges: list[tuple[str, str]]
    against_value_usd: float
    against_fraction_of_value: float
    mean_rank_climb_pct: float | None


@dataclass
class DriverSet:
    drivers: set[str]
    n_d: int
    matching: list[tuple[str, str]]
    reachable_fraction: float


@dataclass
class DominatingSet:
    members: list[str]  # sorted
    total_hash_share: float
    covered_hash_share: float
    coverage_complete: bool


def against_hierarchy(net: MinerNetwork, stats: MinerStats) -> HierarchyReport:
    """Label every edge against / with / tied relative to the hash-power
    hierarchy.

    An edge i->j is against the hierarchy when j mined strictly more blocks
    than i. The rank climb of an against-edge is the percentile gain
    (percentile = 1 - (rank-1)/(N-1), rank 1 = most blocks), in percent.
    """
    n = len(stats.rank)
    against: list[tuple[str, str]] = []
    with_: list[tuple[str, str]] = []
    tied: list[tuple[str, str]] = []
    climbs: list[float] = []
    against_value = 0.0
    for (u, v), attr in sorted(net.edges.items()):
        bu = stats.blocks_mined.get(u, 0)
        bv = stats.blocks_mined.get(v, 0)
        if bv > bu:
            against.append((u, v))
            against_value += attr.value_usd
            if n > 1:
                pu = 1.0 - (stats.rank[u] - 1) / (n - 1)
                pv = 1.0 - (stats.rank[v] - 1) / (n - 1)
                climbs.append((pv - pu) * 100.0)
        elif bv < bu:
            with_.append((u, v))
        else:
            tied.append((u, v))
    total = net.total_value()
    return HierarchyReport(
        against_edges=against,
        with_edges=with_,
        tied_edges=tied,
        against_value_usd=against_value,
        against_fraction_of_value=(against_value / total) if total > 0 else 0.0,
        mean_rank_climb_pct=(math.fsum(climbs) / len(climbs)) if climbs else None,
    )


def maximum_matching(net: MinerNetwork) -> list[tuple[str, str]]:
    """Maximum-cardinality matching of the bipartite split graph.

    Every node splits into an out-copy and an in-copy; a directed edge i->j
    becomes i(out)-j(in). Hopcroft-Karp, deterministic over sorted nodes.
    Returns the matched directed edges (no two share a tail, no two share a
    head).
    """
    adj: dict[str, list[str]] = {n: [] for n in net.nodes}
    for (u, v) in sorted(net.edges):
        adj[u].append(v)
    left = net.nodes  # out-copies
    pair_left: dict[str, str] = {}
    pair_right: dict[str, str] = {}
    INF = float("inf")
    dist: dict[str, float] = {}

    def bfs() -> bool:
        queue: deque[str] = deque()
        for u in left:
            if u not in pair_left:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = pair_right.get(v)
                if w is None:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: str) -> bool:
        # iterative augmenting-path search; frames are [node, next edge
        # index, chosen head]
        frames: list[list] = [[root, 0, None]]
        while frames:
            frame = frames[-1]
            u, pos = frame[0], frame[1]
            pushed = False
            augmented = False
            while pos < len(adj[u]):
                v = adj[u][pos]
                pos += 1
                frame[1] = pos
                w = pair_right.get(v)
                if w is None:
                    frame[2] = v
                    augmented = True
                    break
                if dist[w] == dist[u] + 1:
                    frame[2] = v
                    frames.append([w, 0, None])
                    pushed = True
                    break
            if augmented:
                for fu, _, fv in frames:
                    pair_left[fu] = fv
                    pair_right[fv] = fu
                return True
            if not pushed:
                dist[u] = INF
                frames.pop()
        return False

    while bfs():
        for u in left:
            if u not in pair_left:
                dfs(u)
    return sorted(pair_left.items())


def driver_nodes(net: MinerNetwork) -> DriverSet:
    """Driver set for structural controllability.

    Drivers are the nodes whose in-copy is unmatched. A perfect matching
    yields a single arbitrary driver (lexicographically smallest node) with
    n_d = 1. reachable_fraction is the share of non-driver nodes reachable
    from the drivers along directed edges.
    """
    matching = maximum_matching(net)
    matched_heads = {v for _, v in matching}
    drivers = {n for n in net.nodes if n not in matched_heads}
    if not drivers and net.nodes:
        drivers = {min(net.nodes)}
    n_d = max(len(net.nodes) - len(matching), 1) if net.nodes else 0
    adj = net.out_adj()
    seen = set(drivers)
    queue = deque(drivers)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    non_drivers = len(net.nodes) - len(drivers)
    reachable = len(seen) - len(drivers)
    fraction = (reachable / non_drivers) if non_drivers > 0 else 1.0
    return DriverSet(
        drivers=drivers, n_d=n_d, matching=matching, reachable_fraction=fraction
    )


def verify_matching(net: MinerNetwork, matching: Sequence[tuple[str, str]]) -> bool:
    """Independent validity check: matching edges exist in the network and
    share no tails and no heads."""
    tails = [u for u, _ in matching]
    heads = [v for _, v in matching]
    if len(set(tails)) != len(tails) or len(set(heads)) != len(heads):
        return False
    return all((u, v) in net.edges for u, v in matching)


def _covers(net: MinerNetwork, members: set[str]) -> set[str]:
    covered = set(members)
    adj = net.out_adj()
    for m in members:
        covered.update(adj[m])
    return covered


def verify_domination(net: MinerNetwork, members: Sequence[str]) -> bool:
    """Every node is a member or has an in-edge from a member."""
    return _covers(net, set(members)) == set(net.nodes)


def _as_dominating_set(
    net: MinerNetwork, stats: MinerStats, members: set[str]
) -> DominatingSet:
    covered = _covers(net, members)
    return DominatingSet(
        members=sorted(members),
        total_hash_share=math.fsum(stats.hash_share.get(m, 0.0) for m in members),
        covered_hash_share=math.fsum(stats.hash_share.get(n, 0.0) for n in covered),
        coverage_complete=covered == set(net.nodes),
    )


def greedy_min_weight_dominating_set(
    net: MinerNetwork,
    stats: MinerStats,
    restarts: int = 64,
    seed: int = 0,
) -> DominatingSet:
    """Low-hash-power full dominating set under out-edge domination.

    A node dominates itself and its out-neighbors. Nodes nobody sends to are
    forced members. Each restart runs the greedy ratio rule (newly covered
    nodes per unit of own hash power) with seeded random tie-breaks; the
    lightest valid result wins. The result is re-checked by the independent
    coverage verifier.
    """
    nodes = set(net.nodes)
    if not nodes:
        return DominatingSet([], 0.0, 0.0, True)
    adj = net.out_adj()
    in_deg = {n: 0 for n in net.nodes}
    for (_, v) in net.edges:
        in_deg[v] += 1
    forced = {n for n in net.nodes if in_deg[n] == 0}
    best: DominatingSet | None = None
    for r in range(max(restarts, 1)):
        rng = random.Random(f"{seed}:dominate:{r}")
        members = set(forced)
        covered = _covers(net, members)
        while covered != nodes:
            best_ratio = -1.0
            candidates: list[str] = []
            for n in net.nodes:
                if n in members:
                    continue
                gain = sum(1 for x in adj[n] if x not in covered)
                if n not in covered:
                    gain += 1
                if gain == 0:
                    continue
                ratio = gain / (stats.hash_share.get(n, 0.0) + GREEDY_EPSILON)
                if ratio > best_ratio:
                    best_ratio = ratio
                    candidates = [n]
                elif ratio == best_ratio:
                    candidates.append(n)
            pick = rng.choice(candidates)
            members.add(pick)
            covered.add(pick)
            covered.update(adj[pick])
        result = _as_dominating_set(net, stats, members)
        if best is None or (result.total_hash_share, result.members) < (
            best.total_hash_share,
            best.members,
        ):
            best = result
    assert best is not None and verify_domination(net, best.members)
    return best


def exact_min_weight_dominating_set(
    net: MinerNetwork, stats: MinerStats
) -> DominatingSet:
    """Exhaustive minimum-hash-power dominating set, for test oracles only.

    Refuses instances above EXACT_MAX_NODES nodes. Ties break by
    lexicographic member list.
    """
    nodes = sorted(net.nodes)
    if len(nodes) > EXACT_MAX_NODES:
        raise ValueError(f"exact search limited to {EXACT_MAX_NODES} nodes")
    if not nodes:
        return DominatingSet([], 0.0, 0.0, True)
    adj = net.out_adj()
    in_deg = {n: 0 for n in nodes}
    for (_, v) in net.edges:
        in_deg[v] += 1
    forced = [n for n in nodes if in_deg[n] == 0]
    free = [n for n in nodes if in_deg[n] > 0]
    all_nodes = set(nodes)
    best_members: list[str] | None = None
    best_weight = math.inf
    base = set(forced)
    for mask in range(1 << len(free)):
        members = set(base)
        members.update(free[i] for i in range(len(free)) if mask >> i & 1)
        weight = math.fsum(stats.hash_share.get(m, 0.0) for m in members)
        if weight > best_weight:
            continue
        if _covers(net, members) != all_nodes:
            continue
        key = sorted(members)
        if weight < best_weight or (weight == best_weight and key < best_members):
            best_weight = weight
            best_members = key
    assert best_members is not None  # D = V always dominates
    return _as_dominating_set(net, stats, set(best_members))


def threshold_domination(
    net: MinerNetwork,
    stats: MinerStats,
    theta: float = 0.51,
    restarts: int = 64,
    seed: int = 0,
) -> DominatingSet:
    """Smallest-hash-power set whose closed out-neighborhood reaches a hash
    share of at least theta.

    Greedy adds the node with the best newly-covered-hash / own-hash ratio;
    multi-start with seeded tie-breaks keeps the lightest result.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must be in (0, 1]")
    nodes = set(net.nodes)
    if not nodes:
        return DominatingSet([], 0.0, 0.0, True)
    adj = net.out_adj()
    hash_of = lambda n: stats.hash_share.get(n, 0.0)
    best: DominatingSet | None = None
    for r in range(max(restarts, 1)):
        rng = random.Random(f"{seed}:threshold:{r}")
        members: set[str] = set()
        covered: set[str] = set()
        covered_hash = 0.0
        while covered_hash < theta and members != nodes:
            best_ratio = -1.0
            candidates: list[str] = []
            for n in net.nodes:
                if n in members:
                    continue
                gain = math.fsum(
                    hash_of(x) for x in adj[n] if x not in covered
                )
                if n not in covered:
                    gain += hash_of(n)
                ratio = gain / (hash_of(n) + GREEDY_EPSILON)
                if ratio > best_ratio:
                    best_ratio = ratio
                    candidates = [n]
                elif ratio == best_ratio:
                    candidates.append(n)
            pick = rng.choice(candidates)
            members.add(pick)
            covered.add(pick)
            covered.update(adj[pick])
            covered_hash = math.fsum(hash_of(x) for x in covered)
        result = DominatingSet(
            members=sorted(members),
            total_hash_share=math.fsum(hash_of(m) for m in members),
            covered_hash_share=covered_hash,
            coverage_complete=covered == nodes,
        )
        if covered_hash < theta and members != nodes:
            continue
        if best is None or (result.total_hash_share, result.members) < (
            best.total_hash_share,
            best.members,
        ):
            best = result
    assert best is not None
    recheck = math.fsum(hash_of(x) for x in _covers(net, set(best.members)))
    assert recheck >= theta or set(best.members) == nodes
    return best
