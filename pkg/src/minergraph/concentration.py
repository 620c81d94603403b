"""Concentration and degree statistics over miner networks.

Gini and HHI follow the standard market-concentration definitions: Gini on
the raw non-negative distribution, HHI on percentage shares (0..10,000
scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .netbuild import MinerNetwork, MinerStats

ROLE_SENDER = "sender"
ROLE_RECEIVER = "receiver"
ROLE_MIXED = "mixed"
ROLE_ISOLATED = "isolated"


@dataclass
class DegreeProfile:
    w_in: dict[str, float]
    w_out: dict[str, float]
    d_in: dict[str, int]
    d_out: dict[str, int]

    def weighted_degree(self, node: str) -> float:
        # Half the incident value, so the mean equals total value / |V|
        # (average in-degree = average out-degree = average degree).
        return (self.w_in[node] + self.w_out[node]) / 2.0


def gini(values: Sequence[float]) -> float:
    """Gini coefficient of a non-negative distribution.

    G = sum_i (2i - n - 1) * x_(i) / (n * sum x) over ascending x, exact
    discrete form. Empty input or an all-zero distribution is an error.
    """
    if not values:
        raise ValueError("gini: empty input")
    if any(v < 0 for v in values):
        raise ValueError("gini: negative values")
    xs = sorted(values)
    n = len(xs)
    total = math.fsum(xs)
    if total <= 0:
        raise ValueError("gini: distribution sums to zero")
    acc = math.fsum((2 * i - n - 1) * x for i, x in enumerate(xs, start=1))
    return acc / (n * total)


def hhi(shares_percent: Sequence[float]) -> float:
    """Herfindahl-Hirschman index of percentage market shares.

    Shares must sum to 100 (tolerance 1e-6); the result lies in (0, 10000].
    """
    total = math.fsum(shares_percent)
    if abs(total - 100.0) > 1e-6:
        raise ValueError(f"hhi: shares sum to {total}, expected 100")
    return math.fsum(s * s for s in shares_percent)


def top_n_share(stats: MinerStats, n: int) -> float:
    """Combined hash share of the n top-ranked miners."""
    if n < 1:
        raise ValueError("top_n_share: n must be >= 1")
    return math.fsum(stats.hash_share[m] for m in stats.top_miners(n))


def density(net: MinerNetwork, connected_only: bool = False) -> float:
    """|E| / (|V| * (|V|-1)).

    With connected_only the node set is restricted to miners with at least
    one relationship.
    """
    if connected_only:
        touched = {n for edge in net.edges for n in edge}
        n_nodes = len(touched)
    else:
        n_nodes = len(net.nodes)
    if n_nodes < 2:
        raise ValueError("density: need at least 2 nodes")
    return len(net.edges) / (n_nodes * (n_nodes - 1))


def degree_profile(net: MinerNetwork) -> DegreeProfile:
    """Weighted and unweighted in/out degrees per node."""
    w_in = {n: 0.0 for n in net.nodes}
    w_out = {n: 0.0 for n in net.nodes}
    d_in = {n: 0 for n in net.nodes}
    d_out = {n: 0 for n in net.nodes}
    for (u, v), attr in net.edges.items():
        w_out[u] += attr.value_usd
        w_in[v] += attr.value_usd
        d_out[u] += 1
        d_in[v] += 1
    return DegreeProfile(w_in=w_in, w_out=w_out, d_in=d_in, d_out=d_out)


def classify_roles(net: MinerNetwork) -> dict[str, str]:
    """sender / receiver / mixed / isolated per node, from edge incidence."""
    profile = degree_profile(net)
    roles: dict[str, str] = {}
    for n in net.nodes:
        has_out = profile.d_out[n] > 0
        has_in = profile.d_in[n] > 0
        if has_out and has_in:
            roles[n] = ROLE_MIXED
        elif has_out:
            roles[n] = ROLE_SENDER
        elif has_in:
            roles[n] = ROLE_RECEIVER
        else:
            roles[n] = ROLE_ISOLATED
    return roles


def median_lower(values: Sequence[float]) -> float:
    """Median with lower interpolation: the lower middle element when the
    count is even."""
    if not values:
        raise ValueError("median of empty sequence")
    xs = sorted(values)
    return xs[(len(xs) - 1) // 2]


def weighted_degree_summary(net: MinerNetwork) -> tuple[float, float]:
    """(mean, median) of per-node weighted degree."""
    if not net.nodes:
        return 0.0, 0.0
    profile = degree_profile(net)
    degrees = [profile.weighted_degree(n) for n in net.nodes]
    return math.fsum(degrees) / len(degrees), median_lower(degrees)
