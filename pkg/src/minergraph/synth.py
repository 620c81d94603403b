"""Seeded synthetic chain generator with known ground truth.

Produces blocks.csv / transactions.csv / prices.csv in the exact formats the
ingest module consumes, plus a ground-truth record of every planted edge,
each miner's expected role and the planted coalition cycles. Identical seeds
produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

from .ingest import BlockRecord, PricePoint, TxRecord

BLOCK_REWARD_ETH = 3.0  # idealized payout pot per pool per payout round
WEI_PER_ETH = 10**18


class SynthConfigError(ValueError):
    pass


@dataclass
class SynthConfig:
    n_pools: int = 2
    members_per_pool: int = 5
    n_solo_miners: int = 4
    n_days: int = 120
    blocks_per_day: int = 20
    payout_period_days: int = 30
    pool_hash_weights: list[float] = field(default_factory=lambda: [40.0, 25.0])
    member_hash_weight: float = 1.0
    solo_hash_weight: float = 2.0
    # each coalition: a list of miner names (see miner_name) forming a
    # planted mutual-transfer cycle, plus transfers per payout period
    planted_coalitions: list[dict] = field(default_factory=list)
    price_walk: tuple[float, float, float] = (150.0, 0.0, 0.02)
    noise_txs_per_block: int = 0
    start_date: str = "2019-01-01"
    seed: int = 0

    def validate(self) -> None:
        if self.n_pools < 0 or self.members_per_pool < 0 or self.n_solo_miners < 0:
            raise SynthConfigError("counts must be non-negative")
        if self.n_pools + self.n_solo_miners == 0:
            raise SynthConfigError("no miners configured")
        if len(self.pool_hash_weights) != self.n_pools:
            raise SynthConfigError("pool_hash_weights length must equal n_pools")
        if any(w <= 0 for w in self.pool_hash_weights):
            raise SynthConfigError("hash weights must be positive")
        if self.n_days <= 0 or self.blocks_per_day <= 0:
            raise SynthConfigError("need at least one block")


def miner_name(kind: str, *idx: int) -> str:
    """Stable symbolic name: pool:0, member:0:2, solo:1."""
    return ":".join([kind] + [str(i) for i in idx])


def miner_address(name: str) -> str:
    """Deterministic 20-byte address derived from the symbolic name."""
    return "0x" + hashlib.sha1(name.encode()).hexdigest()[:40]


@dataclass
class GroundTruth:
    """Planted structure the pipeline must recover on noise-free configs."""

    miners: dict[str, str]  # symbolic name -> address
    payout_edges: list[tuple[str, str]]  # (pool addr, member addr)
    coalition_edges: list[tuple[str, str]]
    coalitions: list[list[str]]  # address groups, each an expected SCC
    roles: dict[str, str]  # address -> sender/receiver/mixed/isolated
    against_edges: list[tuple[str, str]]

    def to_json(self) -> dict:
        return {
            "miners": self.miners,
            "payout_edges": [list(e) for e in self.payout_edges],
            "coalition_edges": [list(e) for e in self.coalition_edges],
            "coalitions": [sorted(c) for c in self.coalitions],
            "roles": self.roles,
            "against_edges": [list(e) for e in self.against_edges],
        }


def generate_chain(
    config: SynthConfig,
) -> tuple[list[BlockRecord], list[TxRecord], list[PricePoint], GroundTruth]:
    config.validate()
    rng = random.Random(f"{config.seed}:synth")

    pools = [miner_name("pool", i) for i in range(config.n_pools)]
    members = {
        p: [miner_name("member", i, j) for j in range(config.members_per_pool)]
        for i, p in enumerate(pools)
    }
    solos = [miner_name("solo", i) for i in range(config.n_solo_miners)]
    all_names = pools + [m for p in pools for m in members[p]] + solos
    addr = {name: miner_address(name) for name in all_names}
    if len(set(addr.values())) != len(addr):
        raise SynthConfigError("address collision in generated miner set")

    weights = (
        list(config.pool_hash_weights)
        + [config.member_hash_weight] * (config.n_pools * config.members_per_pool)
        + [config.solo_hash_weight] * config.n_solo_miners
    )

    # blocks: the first |miners| blocks are dealt round-robin so every
    # configured miner actually mines (ground-truth roles rely on it), the
    # rest are drawn from hash weights
    start = date.fromisoformat(config.start_date)
    total_blocks = config.n_days * config.blocks_per_day
    if total_blocks < len(all_names):
        raise SynthConfigError("not enough blocks to seat every miner")
    day_seconds = 86400
    # align timestamps with calendar days relative to start_date via epoch
    epoch = date(1970, 1, 1)
    first_ts = (start - epoch).days * day_seconds
    spacing = day_seconds // config.blocks_per_day
    block_miners = list(all_names)
    block_miners += rng.choices(
        all_names, weights=weights, k=total_blocks - len(all_names)
    )
    blocks = [
        BlockRecord(
            block_number=i,
            timestamp=first_ts + (i // config.blocks_per_day) * day_seconds
            + (i % config.blocks_per_day) * spacing,
            miner=addr[block_miners[i]],
        )
        for i in range(total_blocks)
    ]

    # prices: geometric daily walk, clamped at 0.01 USD
    start_usd, drift, vol = config.price_walk
    prices: list[PricePoint] = []
    usd = start_usd
    for d in range(config.n_days):
        prices.append(PricePoint(start + timedelta(days=d), round(max(usd, 0.01), 6)))
        usd *= 1.0 + drift + rng.gauss(0.0, vol)

    # transactions: pool payouts, coalition cycles, optional noise
    txs: list[TxRecord] = []
    payout_edges: list[tuple[str, str]] = []
    tx_index: dict[int, int] = {}

    def add_tx(block_number: int, frm: str, to: str, wei: int) -> None:
        idx = tx_index.get(block_number, 0)
        tx_index[block_number] = idx + 1
        txs.append(TxRecord(block_number, idx, frm, to, wei))

    payout_blocks = [
        d * config.blocks_per_day
        for d in range(config.payout_period_days, config.n_days, config.payout_period_days)
    ]
    # weights proportional to an idealized contribution split
    for p in pools:
        if not members[p]:
            continue
        share_wei = int(BLOCK_REWARD_ETH * WEI_PER_ETH) // len(members[p])
        for bn in payout_blocks:
            for m in members[p]:
                add_tx(bn, addr[p], addr[m], share_wei)
        payout_edges.extend((addr[p], addr[m]) for m in members[p])

    coalition_edges: list[tuple[str, str]] = []
    coalitions: list[list[str]] = []
    for spec in config.planted_coalitions:
        group = list(spec["members"])
        rate = int(spec.get("transfers_per_period", 1))
        amount_wei = int(float(spec.get("amount_eth", 0.5)) * WEI_PER_ETH)
        unknown = [g for g in group if g not in addr]
        if unknown:
            raise SynthConfigError(f"coalition references unknown miners {unknown}")
        if len(group) < 2:
            raise SynthConfigError("coalition needs at least 2 members")
        cycle = [(group[i], group[(i + 1) % len(group)]) for i in range(len(group))]
        for bn in payout_blocks or [total_blocks - 1]:
            for _ in range(rate):
                for frm, to in cycle:
                    add_tx(bn, addr[frm], addr[to], amount_wei)
        coalition_edges.extend((addr[f], addr[t]) for f, t in cycle)
        coalitions.append([addr[g] for g in group])

    # noise: transfers between fresh non-miner addresses, never touching
    # planted structure
    noise_base = 0xFFFF_0000_0000_0000_0000
    noise_pool = [f"0x{noise_base + i:040x}" for i in range(64)]
    for b in blocks:
        for _ in range(config.noise_txs_per_block):
            frm, to = rng.sample(noise_pool, 2)
            add_tx(b.block_number, frm, to, rng.randrange(10**15, 10**18))

    # ground truth roles/against labels from the planted edge set
    out_edges: set[tuple[str, str]] = set(payout_edges) | set(coalition_edges)
    has_out: set[str] = {e[0] for e in out_edges}
    has_in: set[str] = {e[1] for e in out_edges}
    roles: dict[str, str] = {}
    for name in all_names:
        a = addr[name]
        if a in has_out and a in has_in:
            roles[a] = "mixed"
        elif a in has_out:
            roles[a] = "sender"
        elif a in has_in:
            roles[a] = "receiver"
        else:
            roles[a] = "isolated"

    blocks_by_miner: dict[str, int] = {}
    for b in blocks:
        blocks_by_miner[b.miner] = blocks_by_miner.get(b.miner, 0) + 1
    against = sorted(
        (f, t)
        for (f, t) in out_edges
        if blocks_by_miner.get(t, 0) > blocks_by_miner.get(f, 0)
    )

    truth = GroundTruth(
        miners=addr,
        payout_edges=sorted(set(payout_edges)),
        coalition_edges=sorted(set(coalition_edges)),
        coalitions=coalitions,
        roles=roles,
        against_edges=against,
    )
    return blocks, txs, prices, truth


def write_chain(
    out_dir,
    blocks: list[BlockRecord],
    txs: list[TxRecord],
    prices: list[PricePoint],
    truth: GroundTruth,
) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "blocks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block_number", "timestamp", "miner"])
        for b in blocks:
            w.writerow([b.block_number, b.timestamp, b.miner])
    with open(out / "transactions.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block_number", "tx_index", "from_address", "to_address", "value_wei"])
        for t in txs:
            w.writerow([t.block_number, t.tx_index, t.from_address, t.to_address, t.value_wei])
    with open(out / "prices.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "usd_per_eth"])
        for p in prices:
            w.writerow([p.date.isoformat(), f"{p.usd_per_eth:.6f}"])
    with open(out / "ground_truth.json", "w") as fh:
        json.dump(truth.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def fixture_config(seed: int = 42) -> SynthConfig:
    """The documented end-to-end fixture: 2 pools with 5 members each, 4
    solo miners, one planted 3-coalition."""
    return SynthConfig(
        n_pools=2,
        members_per_pool=5,
        n_solo_miners=4,
        n_days=120,
        blocks_per_day=20,
        payout_period_days=30,
        pool_hash_weights=[40.0, 25.0],
        planted_coalitions=[
            {
                "members": [
                    miner_name("pool", 0),
                    miner_name("solo", 0),
                    miner_name("solo", 1),
                ],
                "transfers_per_period": 1,
                "amount_eth": 0.5,
            }
        ],
        seed=seed,
    )
