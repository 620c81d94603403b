"""Parsing of block, transaction and price CSVs, miner identification and
miner-to-miner transaction extraction with USD valuation.

All input files are UTF-8 comma-delimited CSV with a header row. Files ending
in ``.gz`` are transparently decompressed.
"""

from __future__ import annotations

import bisect
import csv
import gzip
import logging
import re
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterable, Iterator, Sequence

log = logging.getLogger("minergraph.ingest")

WEI_PER_ETH = 10**18

_ADDRESS_RE = re.compile(r"^0x[0-9a-f]{40}$")


class IngestError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class BlockRecord:
    block_number: int
    timestamp: int
    miner: str


@dataclass(frozen=True)
class TxRecord:
    block_number: int
    tx_index: int
    from_address: str
    to_address: str
    value_wei: int


@dataclass(frozen=True)
class PricePoint:
    date: date
    usd_per_eth: float


@dataclass(frozen=True)
class MinerTx:
    block_number: int
    from_address: str
    to_address: str
    value_usd: float


@dataclass
class FilterResult:
    """Outcome of miner-to-miner filtering.

    kept + dropped + self_count always equals the number of input transactions.
    """

    miner_txs: list[MinerTx]
    dropped: int
    self_count: int


def normalize_address(raw: str) -> str:
    addr = raw.strip().lower()
    if not _ADDRESS_RE.match(addr):
        raise IngestError(f"invalid address: {raw!r}")
    return addr


def _open_text(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8", newline="")
    return open(path, "rt", encoding="utf-8", newline="")


def _reader(stream, expected_header: Sequence[str], what: str):
    rd = csv.reader(stream)
    try:
        header = next(rd)
    except StopIteration:
        raise IngestError(f"{what}: empty file, header required") from None
    if [h.strip() for h in header] != list(expected_header):
        raise IngestError(
            f"{what}: bad header {header!r}, expected {','.join(expected_header)}"
        )
    return rd


def parse_blocks(source) -> list[BlockRecord]:
    """Parse blocks.csv (block_number,timestamp,miner) into sorted records.

    ``source`` is a path or an open text stream. Duplicate block numbers are
    an error; non-monotone timestamps only produce a warning.
    """
    if hasattr(source, "read"):
        return _parse_blocks_stream(source)
    with _open_text(source) as fh:
        return _parse_blocks_stream(fh)


def _parse_blocks_stream(stream) -> list[BlockRecord]:
    rd = _reader(stream, ("block_number", "timestamp", "miner"), "blocks")
    records: list[BlockRecord] = []
    seen: set[int] = set()
    for lineno, row in enumerate(rd, start=2):
        if not row:
            continue
        try:
            num = int(row[0])
            ts = int(row[1])
            miner = normalize_address(row[2])
            if num < 0:
                raise ValueError("negative block_number")
        except (ValueError, IndexError, IngestError) as exc:
            raise IngestError(f"blocks line {lineno}: {exc}") from None
        if num in seen:
            raise IngestError(f"blocks line {lineno}: duplicate block_number {num}")
        seen.add(num)
        records.append(BlockRecord(num, ts, miner))
    records.sort(key=lambda b: b.block_number)
    for prev, cur in zip(records, records[1:]):
        if cur.timestamp < prev.timestamp:
            log.warning(
                "non-monotone timestamp at block %d (%d < %d)",
                cur.block_number,
                cur.timestamp,
                prev.timestamp,
            )
            break
    return records


def parse_transactions(source) -> Iterator[TxRecord]:
    """Stream transactions.csv rows as TxRecord, in file order.

    Streaming keeps memory bounded on very large files; callers that need
    the full collection can wrap in list().
    """
    if hasattr(source, "read"):
        yield from _parse_tx_stream(source)
    else:
        with _open_text(source) as fh:
            yield from _parse_tx_stream(fh)


def _parse_tx_stream(stream) -> Iterator[TxRecord]:
    rd = _reader(
        stream,
        ("block_number", "tx_index", "from_address", "to_address", "value_wei"),
        "transactions",
    )
    for lineno, row in enumerate(rd, start=2):
        if not row:
            continue
        try:
            num = int(row[0])
            idx = int(row[1])
            frm = normalize_address(row[2])
            to = normalize_address(row[3])
            wei = int(row[4])
            if wei < 0:
                raise ValueError("negative value_wei")
        except (ValueError, IndexError, IngestError) as exc:
            raise IngestError(f"transactions line {lineno}: {exc}") from None
        yield TxRecord(num, idx, frm, to, wei)


def parse_prices(source) -> list[PricePoint]:
    """Parse prices.csv (date,usd_per_eth), sorted by date, one row per day."""
    if hasattr(source, "read"):
        return _parse_prices_stream(source)
    with _open_text(source) as fh:
        return _parse_prices_stream(fh)


def _parse_prices_stream(stream) -> list[PricePoint]:
    rd = _reader(stream, ("date", "usd_per_eth"), "prices")
    points: list[PricePoint] = []
    seen: set[date] = set()
    for lineno, row in enumerate(rd, start=2):
        if not row:
            continue
        try:
            day = date.fromisoformat(row[0].strip())
            usd = float(row[1])
            if usd <= 0:
                raise ValueError("usd_per_eth must be positive")
        except (ValueError, IndexError) as exc:
            raise IngestError(f"prices line {lineno}: {exc}") from None
        if day in seen:
            raise IngestError(f"prices line {lineno}: duplicate date {day}")
        seen.add(day)
        points.append(PricePoint(day, usd))
    points.sort(key=lambda p: p.date)
    return points


def miner_set(blocks: Iterable[BlockRecord], upto_block: int) -> set[str]:
    """Distinct miner addresses of blocks with block_number <= upto_block."""
    return {b.miner for b in blocks if b.block_number <= upto_block}


class PriceIndex:
    """Daily price lookup with nearest-earlier fallback.

    A missing date resolves to the closest earlier date; dates before the
    whole series resolve to the earliest available price.
    """

    def __init__(self, prices: Sequence[PricePoint]):
        if not prices:
            raise IngestError("price series is empty")
        self._dates = [p.date for p in prices]
        self._usd = [p.usd_per_eth for p in prices]

    def usd_per_eth(self, day: date) -> float:
        i = bisect.bisect_right(self._dates, day) - 1
        if i < 0:
            i = 0
        return self._usd[i]


def block_date(block: BlockRecord) -> date:
    return datetime.fromtimestamp(block.timestamp, tz=timezone.utc).date()


def usd_value(tx: TxRecord, block: BlockRecord, prices: PriceIndex) -> float:
    """USD value of a transaction at the daily rate of its block's UTC date."""
    return (tx.value_wei / WEI_PER_ETH) * prices.usd_per_eth(block_date(block))


def filter_miner_tx(
    txs: Iterable[TxRecord],
    miners: set[str],
    prices: PriceIndex,
    blocks: Sequence[BlockRecord],
) -> FilterResult:
    """Keep transactions where sender and receiver are distinct miners.

    Self-transactions between a miner and itself are excluded from the kept
    set but tallied separately so the input count reconciles. Transactions
    referencing a block not present in ``blocks`` are an error.
    """
    by_number = {b.block_number: b for b in blocks}
    kept: list[MinerTx] = []
    dropped = 0
    self_count = 0
    for tx in txs:
        block = by_number.get(tx.block_number)
        if block is None:
            raise IngestError(f"transaction references unknown block {tx.block_number}")
        if tx.from_address in miners and tx.to_address in miners:
            if tx.from_address == tx.to_address:
                self_count += 1
                continue
            kept.append(
                MinerTx(
                    tx.block_number,
                    tx.from_address,
                    tx.to_address,
                    usd_value(tx, block, prices),
                )
            )
        else:
            dropped += 1
    return FilterResult(kept, dropped, self_count)
