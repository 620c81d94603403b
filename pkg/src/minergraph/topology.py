"""Connected-component structure of miner networks.

Weakly connected components come from a BFS over the undirected view,
strongly connected components from an iterative Tarjan (no recursion, so
deep chains are safe). Reported SCCs are the components of size >= 2;
singleton counts are still carried for reconciliation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from collections import deque
from typing import Sequence

from scipy import stats as scipy_stats

from .concentration import classify_roles
from .netbuild import MinerNetwork, MinerStats


@dataclass
class ComponentMap:
    wcc_id: dict[str, int]
    scc_id: dict[str, int]
    roles: dict[str, str] = field(default_factory=dict)
    gwcc: int = -1

    def wcc_members(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for n, cid in self.wcc_id.items():
            out.setdefault(cid, []).append(n)
        return out

    def scc_members(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for n, cid in self.scc_id.items():
            out.setdefault(cid, []).append(n)
        return out


@dataclass
class SccStats:
    per_scc: list[dict]  # scc_id, size, hash_share, internal_value
    singleton_count: int
    pearson_r: float | None
    p_value: float | None
    correlation_note: str = ""


def weakly_connected_components(
    net: MinerNetwork, stats: MinerStats | None = None
) -> tuple[dict[str, int], int]:
    """Component id per node plus the id of the GWCC.

    Ids are dense from 0, assigned in order of first node encountered over
    the sorted node list. GWCC is the largest component by node count; ties
    break by total hash share, then by lowest id.
    """
    undirected: dict[str, list[str]] = {n: [] for n in net.nodes}
    for (u, v) in net.edges:
        undirected[u].append(v)
        undirected[v].append(u)
    comp: dict[str, int] = {}
    sizes: list[int] = []
    for start in net.nodes:
        if start in comp:
            continue
        cid = len(sizes)
        sizes.append(0)
        queue = deque([start])
        comp[start] = cid
        while queue:
            node = queue.popleft()
            sizes[cid] += 1
            for nb in undirected[node]:
                if nb not in comp:
                    comp[nb] = cid
                    queue.append(nb)
    if not sizes:
        return comp, -1
    hash_by_comp = [0.0] * len(sizes)
    if stats is not None:
        for n, cid in comp.items():
            hash_by_comp[cid] += stats.hash_share.get(n, 0.0)
    gwcc = min(range(len(sizes)), key=lambda c: (-sizes[c], -hash_by_comp[c], c))
    return comp, gwcc


def strongly_connected_components(net: MinerNetwork) -> dict[str, int]:
    """Tarjan's algorithm, iterative. Ids dense from 0 in discovery order."""
    adj = net.out_adj()
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comp: dict[str, int] = {}
    counter = 0
    n_comps = 0
    for root in net.nodes:
        if root in index:
            continue
        # explicit call stack: (node, iterator position into adj[node])
        work = [(root, 0)]
        while work:
            node, pos = work.pop()
            if pos == 0:
                index[node] = counter
                lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            recurse = False
            neighbors = adj[node]
            while pos < len(neighbors):
                nb = neighbors[pos]
                pos += 1
                if nb not in index:
                    work.append((node, pos))
                    work.append((nb, 0))
                    recurse = True
                    break
                if nb in on_stack:
                    lowlink[node] = min(lowlink[node], index[nb])
            if recurse:
                continue
            if lowlink[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = n_comps
                    if w == node:
                        break
                n_comps += 1
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    # renumber to dense ids in sorted-node discovery order for determinism
    remap: dict[int, int] = {}
    out: dict[str, int] = {}
    for n in net.nodes:
        cid = comp[n]
        if cid not in remap:
            remap[cid] = len(remap)
        out[n] = remap[cid]
    return out


def component_map(net: MinerNetwork, stats: MinerStats | None = None) -> ComponentMap:
    """WCC + SCC decomposition with roles recomputed on the GWCC subgraph."""
    wcc, gwcc = weakly_connected_components(net, stats)
    scc = strongly_connected_components(net)
    roles = classify_roles(net)
    if gwcc >= 0:
        gwcc_nodes = {n for n, cid in wcc.items() if cid == gwcc}
        roles.update(classify_roles(net.subgraph(gwcc_nodes)))
    return ComponentMap(wcc_id=wcc, scc_id=scc, roles=roles, gwcc=gwcc)


def component_flows(
    net: MinerNetwork, roles: dict[str, str], gwcc_nodes: set[str]
) -> dict[tuple[str, str], float]:
    """USD flow between role classes over GWCC edges."""
    flows: dict[tuple[str, str], float] = {}
    for (u, v), attr in net.edges.items():
        if u not in gwcc_nodes or v not in gwcc_nodes:
            continue
        key = (roles[u], roles[v])
        flows[key] = flows.get(key, 0.0) + attr.value_usd
    return flows


def pearson(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Pearson correlation with a two-sided p-value from the t-distribution
    (n-2 degrees of freedom)."""
    n = len(xs)
    if n != len(ys) or n < 3:
        raise ValueError("pearson: need >= 3 paired points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = math.fsum((x - mx) ** 2 for x in xs)
    vy = math.fsum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("pearson: zero variance")
    r = cov / math.sqrt(vx * vy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * scipy_stats.t.sf(abs(t), df=n - 2)
    return r, float(p)


def scc_stats(
    net: MinerNetwork, scc_id: dict[str, int], stats: MinerStats
) -> SccStats:
    """Aggregates over SCCs of size >= 2 and the hash/value correlation."""
    members = {}
    for n, cid in scc_id.items():
        members.setdefault(cid, []).append(n)
    per_scc: list[dict] = []
    singleton_count = 0
    for cid in sorted(members):
        group = members[cid]
        if len(group) < 2:
            singleton_count += 1
            continue
        node_set = set(group)
        internal = math.fsum(
            attr.value_usd
            for (u, v), attr in net.edges.items()
            if u in node_set and v in node_set
        )
        per_scc.append(
            {
                "scc_id": cid,
                "size": len(group),
                "hash_share": math.fsum(stats.hash_share.get(n, 0.0) for n in group),
                "internal_value": internal,
            }
        )
    r: float | None = None
    p: float | None = None
    note = ""
    if len(per_scc) >= 3:
        try:
            r, p = pearson(
                [s["hash_share"] for s in per_scc],
                [s["internal_value"] for s in per_scc],
            )
        except ValueError:
            note = "zero variance, correlation undefined"
    else:
        note = "fewer than 3 SCCs, correlation omitted"
    return SccStats(
        per_scc=per_scc,
        singleton_count=singleton_count,
        pearson_r=r,
        p_value=p,
        correlation_note=note,
    )
