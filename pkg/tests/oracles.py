"""Brute-force reference implementations used only by tests.

Everything here is deliberately naive (transitive closure, exhaustive
search) and shares no code with the package under test.
"""

from __future__ import annotations

import math
from itertools import combinations


def closure_reachability(nodes, edges):
    """reach[u][v] via iterated relaxation (O(n^3)-ish)."""
    reach = {u: {v: False for v in nodes} for u in nodes}
    for u in nodes:
        reach[u][u] = True
    for (u, v) in edges:
        reach[u][v] = True
    changed = True
    while changed:
        changed = False
        for a in nodes:
            for b in nodes:
                if not reach[a][b]:
                    continue
                for c in nodes:
                    if reach[b][c] and not reach[a][c]:
                        reach[a][c] = True
                        changed = True
    return reach


def scc_partition(nodes, edges):
    """Set of frozensets: mutual-reachability classes."""
    reach = closure_reachability(nodes, edges)
    comps = set()
    for u in nodes:
        comps.add(frozenset(v for v in nodes if reach[u][v] and reach[v][u]))
    return comps


def wcc_partition(nodes, edges):
    """Set of frozensets via undirected closure."""
    und = set()
    for (u, v) in edges:
        und.add((u, v))
        und.add((v, u))
    reach = closure_reachability(nodes, und)
    return {frozenset(v for v in nodes if reach[u][v]) for u in nodes}


def exhaustive_max_matching(edges):
    """Maximum matching size on the bipartite split graph: largest edge
    subset with pairwise distinct tails and distinct heads. Branch and
    bound over the edge list."""
    edge_list = sorted(edges)
    best = 0

    def go(i, tails, heads, size):
        nonlocal best
        if size + (len(edge_list) - i) <= best:
            return
        if i == len(edge_list):
            best = max(best, size)
            return
        u, v = edge_list[i]
        if u not in tails and v not in heads:
            go(i + 1, tails | {u}, heads | {v}, size + 1)
        go(i + 1, tails, heads, size)

    go(0, frozenset(), frozenset(), 0)
    return best


def exhaustive_min_weight_dominating(nodes, edges, weight):
    """Lightest subset D where every node is in D or has an in-edge from D."""
    nodes = sorted(nodes)
    out = {n: set() for n in nodes}
    for (u, v) in edges:
        out[u].add(v)
    best_w = math.inf
    best = None
    for r in range(len(nodes) + 1):
        for combo in combinations(nodes, r):
            covered = set(combo)
            for m in combo:
                covered |= out[m]
            if covered != set(nodes):
                continue
            w = sum(weight[m] for m in combo)
            if w < best_w:
                best_w = w
                best = set(combo)
        # cannot stop at first covering size: lighter sets may be larger
    return best_w, best


def naive_gini(values):
    values = sorted(values)
    n = len(values)
    total = sum(values)
    cum = 0.0
    for i, x in enumerate(values, 1):
        cum += (2 * i - n - 1) * x
    return cum / (n * total)


def naive_pearson(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = math.sqrt(sum((x - mx) ** 2 for x in xs) * sum((y - my) ** 2 for y in ys))
    return num / den
