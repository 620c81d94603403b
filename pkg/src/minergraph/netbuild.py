"""Cumulative analysis slices and construction of the miner transaction network.

Slice k covers everything from genesis up to its last block (inclusive), so
the networks form a growing chain: edges and their value/count attributes are
monotone in k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ingest import BlockRecord, MinerTx

SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class SliceIndex:
    k: int
    last_block: int
    blocks_per_window: int


@dataclass
class EdgeAttr:
    value_usd: float
    count: int


@dataclass
class MinerNetwork:
    """Directed weighted aggregate of miner-to-miner transactions.

    nodes holds every miner of the slice horizon, including miners with no
    relationships. edges maps (from, to) to the aggregated attribute and
    never contains self-loops.
    """

    nodes: list[str]
    edges: dict[tuple[str, str], EdgeAttr]
    slice: SliceIndex

    def out_adj(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n: [] for n in self.nodes}
        for (u, v) in self.edges:
            adj[u].append(v)
        return adj

    def in_adj(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n: [] for n in self.nodes}
        for (u, v) in self.edges:
            adj[v].append(u)
        return adj

    def total_value(self) -> float:
        return math.fsum(a.value_usd for a in self.edges.values())

    def subgraph(self, keep: set[str]) -> "MinerNetwork":
        """Induced subgraph on ``keep`` (edge attributes shared, not copied)."""
        return MinerNetwork(
            nodes=[n for n in self.nodes if n in keep],
            edges={
                (u, v): a for (u, v), a in self.edges.items() if u in keep and v in keep
            },
            slice=self.slice,
        )


@dataclass
class MinerStats:
    """Per-miner block counts, hash-power shares and ranks for one slice.

    Hash power is proxied by the share of blocks mined. Rank 1 is the miner
    with the most blocks; ties break lexicographically by address.
    """

    blocks_mined: dict[str, int]
    hash_share: dict[str, float]
    rank: dict[str, int]
    total_blocks: int

    def top_miners(self, n: int) -> list[str]:
        ordered = sorted(self.rank, key=self.rank.__getitem__)
        return ordered[:n]


def average_blocks_per_window(
    total_blocks: int, first_ts: int, last_ts: int, window_days: int
) -> int:
    """Average number of blocks mined per window of ``window_days`` days.

    Zero signals a span shorter than one window (single-slice regime).
    """
    span = last_ts - first_ts
    if span <= 0 or span < window_days * SECONDS_PER_DAY:
        return 0
    return total_blocks * window_days * SECONDS_PER_DAY // span


def boundary_positions(total_blocks: int, blocks_per_window: int) -> list[int]:
    """1-based positions of slice boundaries; the final partial window is
    merged into the last slice."""
    if blocks_per_window <= 0 or blocks_per_window >= total_blocks:
        return [total_blocks]
    positions = list(range(blocks_per_window, total_blocks + 1, blocks_per_window))
    positions[-1] = total_blocks
    return positions


def slice_boundaries(
    blocks: Sequence[BlockRecord], window_days: int = 30
) -> list[SliceIndex]:
    """Cut sorted blocks into cumulative slices of ~window_days each."""
    if not blocks:
        raise ValueError("blocks must be non-empty")
    bhat = average_blocks_per_window(
        len(blocks), blocks[0].timestamp, blocks[-1].timestamp, window_days
    )
    positions = boundary_positions(len(blocks), bhat)
    return [
        SliceIndex(k=k, last_block=blocks[pos - 1].block_number, blocks_per_window=bhat)
        for k, pos in enumerate(positions, start=1)
    ]


def qualifying_block(tx: MinerTx, first_mined: dict[str, int]) -> int:
    """First slice boundary block at which a transaction counts: both
    endpoints must already be miners of the slice horizon."""
    return max(tx.block_number, first_mined[tx.from_address], first_mined[tx.to_address])


def first_mined_block(blocks: Iterable[BlockRecord]) -> dict[str, int]:
    first: dict[str, int] = {}
    for b in blocks:
        if b.miner not in first or b.block_number < first[b.miner]:
            first[b.miner] = b.block_number
    return first


def build_network(
    miner_txs: Iterable[MinerTx],
    blocks: Sequence[BlockRecord],
    slice_: SliceIndex,
) -> MinerNetwork:
    """Aggregate miner transactions from genesis to the slice boundary."""
    first = first_mined_block(blocks)
    nodes = sorted(m for m, fb in first.items() if fb <= slice_.last_block)
    edges: dict[tuple[str, str], EdgeAttr] = {}
    for tx in miner_txs:
        if qualifying_block(tx, first) > slice_.last_block:
            continue
        key = (tx.from_address, tx.to_address)
        attr = edges.get(key)
        if attr is None:
            edges[key] = EdgeAttr(tx.value_usd, 1)
        else:
            attr.value_usd += tx.value_usd
            attr.count += 1
    return MinerNetwork(nodes=nodes, edges=edges, slice=slice_)


def build_networks(
    miner_txs: Sequence[MinerTx],
    blocks: Sequence[BlockRecord],
    slices: Sequence[SliceIndex],
) -> list[MinerNetwork]:
    """Build all cumulative slice networks in one sweep.

    Equivalent to build_network per slice but only walks the transaction
    list once; input order does not affect the result.
    """
    first = first_mined_block(blocks)
    by_qualifier = sorted(
        miner_txs,
        key=lambda tx: (qualifying_block(tx, first), tx.from_address, tx.to_address),
    )
    miners_sorted = sorted(first, key=lambda m: (first[m], m))
    networks: list[MinerNetwork] = []
    edges: dict[tuple[str, str], EdgeAttr] = {}
    ti = 0
    mi = 0
    nodes: list[str] = []
    for sl in slices:
        while ti < len(by_qualifier) and qualifying_block(by_qualifier[ti], first) <= sl.last_block:
            tx = by_qualifier[ti]
            key = (tx.from_address, tx.to_address)
            attr = edges.get(key)
            if attr is None:
                edges[key] = EdgeAttr(tx.value_usd, 1)
            else:
                attr.value_usd += tx.value_usd
                attr.count += 1
            ti += 1
        while mi < len(miners_sorted) and first[miners_sorted[mi]] <= sl.last_block:
            nodes.append(miners_sorted[mi])
            mi += 1
        networks.append(
            MinerNetwork(
                nodes=sorted(nodes),
                edges={k: EdgeAttr(a.value_usd, a.count) for k, a in edges.items()},
                slice=sl,
            )
        )
    return networks


def hash_stats(blocks: Sequence[BlockRecord], slice_: SliceIndex) -> MinerStats:
    """Blocks mined, hash share and rank per miner up to the slice boundary."""
    counts: dict[str, int] = {}
    total = 0
    for b in blocks:
        if b.block_number <= slice_.last_block:
            counts[b.miner] = counts.get(b.miner, 0) + 1
            total += 1
    shares = {m: c / total for m, c in counts.items()} if total else {}
    ordered = sorted(counts, key=lambda m: (-counts[m], m))
    ranks = {m: i for i, m in enumerate(ordered, start=1)}
    return MinerStats(blocks_mined=counts, hash_share=shares, rank=ranks, total_blocks=total)


def window_value_series(networks: Sequence[MinerNetwork]) -> list[float]:
    """Per-window transacted value: differences of the cumulative totals."""
    totals = [net.total_value() for net in networks]
    return [t - (totals[i - 1] if i else 0.0) for i, t in enumerate(totals)]
