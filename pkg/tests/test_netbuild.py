import math
import random

import pytest

from minergraph.ingest import BlockRecord, MinerTx
from minergraph.netbuild import (
    MinerNetwork,
    SliceIndex,
    average_blocks_per_window,
    boundary_positions,
    build_network,
    build_networks,
    hash_stats,
    slice_boundaries,
    window_value_series,
)

DAY = 86400

A = "0x" + "aa" * 20
B = "0x" + "bb" * 20
C = "0x" + "cc" * 20


def uniform_blocks(n, span_days, miners):
    spacing = span_days * DAY / max(n - 1, 1)
    return [
        BlockRecord(i, int(i * spacing), miners[i % len(miners)]) for i in range(n)
    ]


def test_slice_boundaries_900_blocks_90_days():
    blocks = uniform_blocks(900, 90, [A])
    slices = slice_boundaries(blocks, window_days=30)
    assert [s.k for s in slices] == [1, 2, 3]
    assert slices[0].blocks_per_window == 300
    # boundaries at the 300th, 600th and 900th block
    assert [s.last_block for s in slices] == [
        blocks[299].block_number,
        blocks[599].block_number,
        blocks[899].block_number,
    ]


def test_slice_boundaries_short_span_single_slice():
    blocks = uniform_blocks(10, 1, [A])
    slices = slice_boundaries(blocks, window_days=30)
    assert len(slices) == 1
    assert slices[0].last_block == blocks[-1].block_number


def test_slice_boundaries_zero_span_single_slice():
    blocks = [BlockRecord(i, 1000, A) for i in range(5)]
    slices = slice_boundaries(blocks)
    assert len(slices) == 1


def test_slice_boundaries_empty_is_error():
    with pytest.raises(ValueError):
        slice_boundaries([])


def test_paper_scale_block_span_yields_51_slices():
    # ~8.86M blocks over the 1,557 days between the chain launch and the
    # study cutoff split into 51 ~30-day windows
    total = 8_863_264
    bhat = average_blocks_per_window(total, 0, 1557 * DAY, 30)
    assert len(boundary_positions(total, bhat)) == 51


def test_build_network_aggregates_by_hand():
    blocks = [BlockRecord(0, 0, A), BlockRecord(1, 1, B)]
    txs = [MinerTx(1, A, B, 5.0), MinerTx(1, A, B, 5.0), MinerTx(1, B, A, 1.0)]
    net = build_network(txs, blocks, SliceIndex(1, 1, 0))
    assert set(net.nodes) == {A, B}
    assert net.edges[(A, B)].value_usd == 10.0
    assert net.edges[(A, B)].count == 2
    assert net.edges[(B, A)].value_usd == 1.0
    assert net.edges[(B, A)].count == 1


def test_build_network_no_txs_keeps_nodes():
    blocks = [BlockRecord(0, 0, A), BlockRecord(1, 1, B)]
    net = build_network([], blocks, SliceIndex(1, 1, 0))
    assert set(net.nodes) == {A, B}
    assert net.edges == {}


def test_edge_needs_both_endpoints_mining_by_boundary():
    # B first mines at block 5: the A->B edge only appears once B is a miner
    blocks = [BlockRecord(0, 0, A), BlockRecord(5, 5, B)]
    txs = [MinerTx(1, A, B, 3.0)]
    early = build_network(txs, blocks, SliceIndex(1, 4, 0))
    late = build_network(txs, blocks, SliceIndex(2, 5, 0))
    assert early.edges == {}
    assert (A, B) in late.edges


def _random_chain(rng, n_blocks=200, n_miners=6, n_txs=120):
    miners = ["0x" + f"{i:02x}" * 20 for i in range(n_miners)]
    blocks = [
        BlockRecord(i, i * 60, rng.choice(miners)) for i in range(n_blocks)
    ]
    txs = [
        MinerTx(
            rng.randrange(n_blocks),
            rng.choice(miners),
            rng.choice(miners),
            round(rng.uniform(0, 50), 3),
        )
        for _ in range(n_txs)
    ]
    txs = [t for t in txs if t.from_address != t.to_address]
    return blocks, txs


def test_cumulative_monotonicity():
    rng = random.Random(7)
    blocks, txs = _random_chain(rng)
    slices = [SliceIndex(k, lb, 0) for k, lb in enumerate([49, 99, 149, 199], 1)]
    nets = build_networks(txs, blocks, slices)
    for prev, cur in zip(nets, nets[1:]):
        assert set(prev.edges) <= set(cur.edges)
        assert set(prev.nodes) <= set(cur.nodes)
        for key, attr in prev.edges.items():
            assert attr.value_usd <= cur.edges[key].value_usd + 1e-12
            assert attr.count <= cur.edges[key].count


def test_build_networks_matches_per_slice_build():
    rng = random.Random(8)
    blocks, txs = _random_chain(rng)
    slices = [SliceIndex(k, lb, 0) for k, lb in enumerate([66, 133, 199], 1)]
    combined = build_networks(txs, blocks, slices)
    for sl, net in zip(slices, combined):
        single = build_network(txs, blocks, sl)
        assert net.nodes == single.nodes
        assert set(net.edges) == set(single.edges)
        for key in net.edges:
            assert net.edges[key].count == single.edges[key].count
            assert math.isclose(
                net.edges[key].value_usd, single.edges[key].value_usd, rel_tol=1e-12
            )


def test_value_conservation_final_slice():
    rng = random.Random(9)
    blocks, txs = _random_chain(rng)
    net = build_network(txs, blocks, SliceIndex(1, 199, 0))
    assert math.isclose(
        net.total_value(),
        math.fsum(t.value_usd for t in txs),
        rel_tol=1e-9,
    )


def test_rebuild_from_shuffled_input_is_identical():
    rng = random.Random(10)
    blocks, txs = _random_chain(rng)
    sl = SliceIndex(1, 199, 0)
    net1 = build_network(txs, blocks, sl)
    shuffled = txs[:]
    rng.shuffle(shuffled)
    net2 = build_network(shuffled, blocks, sl)
    assert net1.nodes == net2.nodes
    assert set(net1.edges) == set(net2.edges)
    for key in net1.edges:
        assert net1.edges[key].count == net2.edges[key].count
        assert math.isclose(
            net1.edges[key].value_usd, net2.edges[key].value_usd, rel_tol=1e-9
        )


def test_hash_stats_by_hand():
    blocks = [
        BlockRecord(0, 0, A),
        BlockRecord(1, 1, A),
        BlockRecord(2, 2, B),
        BlockRecord(3, 3, C),
    ]
    stats = hash_stats(blocks, SliceIndex(1, 3, 0))
    assert stats.hash_share == {A: 0.5, B: 0.25, C: 0.25}
    # tie between B and C broken lexicographically
    assert stats.rank == {A: 1, B: 2, C: 3}


def test_hash_stats_single_miner():
    stats = hash_stats([BlockRecord(0, 0, A)], SliceIndex(1, 0, 0))
    assert stats.hash_share == {A: 1.0}
    assert stats.rank == {A: 1}


def test_hash_shares_sum_to_one():
    rng = random.Random(11)
    blocks, _ = _random_chain(rng)
    stats = hash_stats(blocks, SliceIndex(1, 199, 0))
    assert abs(math.fsum(stats.hash_share.values()) - 1.0) < 1e-12
    assert sorted(stats.rank.values()) == list(range(1, len(stats.rank) + 1))


def test_window_value_series_sums_to_total():
    rng = random.Random(12)
    blocks, txs = _random_chain(rng)
    slices = [SliceIndex(k, lb, 0) for k, lb in enumerate([99, 199], 1)]
    nets = build_networks(txs, blocks, slices)
    series = window_value_series(nets)
    assert math.isclose(sum(series), nets[-1].total_value(), rel_tol=1e-9)
