import random

import pytest

from minergraph.netbuild import EdgeAttr, MinerNetwork, MinerStats, SliceIndex


def make_net(nodes, edges, k=1, last_block=0):
    """Build a MinerNetwork from a node list and {(u,v): value} or
    {(u,v): (value, count)}."""
    attrs = {}
    for key, val in edges.items():
        if isinstance(val, tuple):
            attrs[key] = EdgeAttr(float(val[0]), int(val[1]))
        else:
            attrs[key] = EdgeAttr(float(val), 1)
    return MinerNetwork(
        nodes=sorted(nodes), edges=attrs, slice=SliceIndex(k, last_block, 0)
    )


def make_stats(blocks_mined):
    total = sum(blocks_mined.values())
    shares = {m: c / total for m, c in blocks_mined.items()} if total else {}
    ordered = sorted(blocks_mined, key=lambda m: (-blocks_mined[m], m))
    return MinerStats(
        blocks_mined=dict(blocks_mined),
        hash_share=shares,
        rank={m: i for i, m in enumerate(ordered, 1)},
        total_blocks=total,
    )


def random_digraph(rng, n_max=10, p=0.2):
    """Seeded random digraph as MinerNetwork + uniform-ish MinerStats."""
    n = rng.randint(1, n_max)
    nodes = [f"n{i:02d}" for i in range(n)]
    edges = {}
    for u in nodes:
        for v in nodes:
            if u != v and rng.random() < p:
                edges[(u, v)] = round(rng.uniform(1, 100), 2)
    blocks = {u: rng.randint(1, 50) for u in nodes}
    return make_net(nodes, edges), make_stats(blocks)


@pytest.fixture
def rng():
    return random.Random(12345)
