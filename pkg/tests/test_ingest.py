import gzip
import io
import logging
from datetime import date

import pytest

from minergraph import ingest
from minergraph.ingest import (
    BlockRecord,
    IngestError,
    PriceIndex,
    PricePoint,
    TxRecord,
    filter_miner_tx,
    miner_set,
    parse_blocks,
    parse_prices,
    parse_transactions,
    usd_value,
)

ADDR_A = "0x" + "aa" * 20
ADDR_B = "0x" + "bb" * 20
ADDR_C = "0x" + "cc" * 20
ADDR_X = "0x" + "11" * 20


def blocks_csv(rows):
    return io.StringIO("block_number,timestamp,miner\n" + "".join(rows))


def test_parse_blocks_normalizes_addresses():
    mixed = "0x" + "AB" * 20
    records = parse_blocks(blocks_csv([f"5,1600000000,{mixed}\n"]))
    assert records == [BlockRecord(5, 1600000000, "0x" + "ab" * 20)]


def test_parse_blocks_empty_file_header_only():
    assert parse_blocks(blocks_csv([])) == []


def test_parse_blocks_sorts_by_block_number():
    rows = [f"2,30,{ADDR_A}\n", f"0,10,{ADDR_B}\n", f"1,20,{ADDR_C}\n"]
    records = parse_blocks(blocks_csv(rows))
    assert [b.block_number for b in records] == sorted([0, 1, 2])


def test_parse_blocks_duplicate_block_is_error():
    rows = [f"1,10,{ADDR_A}\n", f"1,20,{ADDR_B}\n"]
    with pytest.raises(IngestError, match="duplicate block_number"):
        parse_blocks(blocks_csv(rows))


def test_parse_blocks_malformed_row_reports_line_number():
    rows = [f"1,10,{ADDR_A}\n", "nonsense,x,y\n"]
    with pytest.raises(IngestError, match="line 3"):
        parse_blocks(blocks_csv(rows))


def test_parse_blocks_nonmonotone_timestamps_warns_only(caplog):
    rows = [f"0,100,{ADDR_A}\n", f"1,50,{ADDR_B}\n"]
    with caplog.at_level(logging.WARNING, logger="minergraph.ingest"):
        records = parse_blocks(blocks_csv(rows))
    assert len(records) == 2
    assert any("non-monotone" in r.message for r in caplog.records)


def test_parse_blocks_gzip(tmp_path):
    path = tmp_path / "blocks.csv.gz"
    with gzip.open(path, "wt") as fh:
        fh.write(f"block_number,timestamp,miner\n0,10,{ADDR_A}\n")
    assert parse_blocks(path) == [BlockRecord(0, 10, ADDR_A)]


def test_parse_roundtrip_byte_exact(tmp_path):
    rows = [f"0,10,{ADDR_A}\n", f"1,20,{ADDR_B}\n"]
    records = parse_blocks(blocks_csv(rows))
    serialized = "block_number,timestamp,miner\n" + "".join(
        f"{b.block_number},{b.timestamp},{b.miner}\n" for b in records
    )
    assert parse_blocks(io.StringIO(serialized)) == records


def test_miner_set_dedup_and_bounds():
    blocks = [
        BlockRecord(0, 1, ADDR_A),
        BlockRecord(1, 2, ADDR_B),
        BlockRecord(2, 3, ADDR_A),
    ]
    assert miner_set(blocks, 2) == {ADDR_A, ADDR_B}
    assert miner_set(blocks, 1) == {ADDR_A, ADDR_B}
    assert miner_set(blocks, -1) == set()


def test_miner_set_fixture_seven_miners():
    miners = ["0x" + f"{i:02x}" * 20 for i in range(7)]
    blocks = [BlockRecord(i, i, miners[i % 7]) for i in range(100)]
    assert miner_set(blocks, 99) == set(miners)


DAY = 86400


def price_index(points):
    return PriceIndex([PricePoint(d, p) for d, p in points])


def test_usd_value_exact_date():
    prices = price_index([(date(2020, 9, 13), 100.0)])
    block = BlockRecord(5, 1600000000, ADDR_A)  # 2020-09-13 UTC
    tx = TxRecord(5, 0, ADDR_A, ADDR_B, 2 * 10**18)
    assert usd_value(tx, block, prices) == 200.0


def test_usd_value_zero_wei():
    prices = price_index([(date(2020, 9, 13), 100.0)])
    block = BlockRecord(5, 1600000000, ADDR_A)
    assert usd_value(TxRecord(5, 0, ADDR_A, ADDR_B, 0), block, prices) == 0.0


def test_usd_value_missing_date_falls_back_to_prior_day():
    prices = price_index([(date(2020, 9, 12), 250.0), (date(2020, 9, 15), 300.0)])
    block = BlockRecord(5, 1600000000, ADDR_A)  # 2020-09-13, missing
    assert usd_value(TxRecord(5, 0, ADDR_A, ADDR_B, 10**18), block, prices) == 250.0


def test_usd_value_before_series_uses_earliest():
    prices = price_index([(date(2020, 9, 20), 42.0)])
    block = BlockRecord(5, 1600000000, ADDR_A)
    assert usd_value(TxRecord(5, 0, ADDR_A, ADDR_B, 10**18), block, prices) == 42.0


def test_usd_value_monotone_in_wei():
    prices = price_index([(date(2020, 9, 13), 173.5)])
    block = BlockRecord(5, 1600000000, ADDR_A)
    values = [
        usd_value(TxRecord(5, 0, ADDR_A, ADDR_B, w), block, prices)
        for w in [0, 10**15, 10**17, 10**18, 5 * 10**18]
    ]
    assert values == sorted(values)


def _filter_fixture():
    blocks = [BlockRecord(0, 1600000000, ADDR_A)]
    prices = price_index([(date(2020, 9, 13), 1.0)])
    txs = [
        TxRecord(0, 0, ADDR_A, ADDR_B, 10**18),
        TxRecord(0, 1, ADDR_A, ADDR_X, 10**18),
        TxRecord(0, 2, ADDR_B, ADDR_B, 10**18),
    ]
    return blocks, prices, txs


def test_filter_keeps_miner_pairs_and_tallies_self():
    blocks, prices, txs = _filter_fixture()
    result = filter_miner_tx(txs, {ADDR_A, ADDR_B}, prices, blocks)
    assert [(t.from_address, t.to_address) for t in result.miner_txs] == [
        (ADDR_A, ADDR_B)
    ]
    assert result.self_count == 1
    assert result.dropped == 1


def test_filter_counts_reconcile():
    blocks, prices, txs = _filter_fixture()
    result = filter_miner_tx(txs, {ADDR_A, ADDR_B}, prices, blocks)
    assert len(result.miner_txs) + result.dropped + result.self_count == len(txs)


def test_filter_empty_miner_set():
    blocks, prices, txs = _filter_fixture()
    result = filter_miner_tx(txs, set(), prices, blocks)
    assert result.miner_txs == []
    assert result.dropped == len(txs)


def test_filter_unknown_block_is_error():
    blocks, prices, _ = _filter_fixture()
    with pytest.raises(IngestError, match="unknown block"):
        filter_miner_tx(
            [TxRecord(99, 0, ADDR_A, ADDR_B, 1)], {ADDR_A, ADDR_B}, prices, blocks
        )


def test_filter_idempotent():
    blocks, prices, txs = _filter_fixture()
    miners = {ADDR_A, ADDR_B}
    first = filter_miner_tx(txs, miners, prices, blocks)
    kept_raw = [
        t
        for t in txs
        if t.from_address in miners
        and t.to_address in miners
        and t.from_address != t.to_address
    ]
    second = filter_miner_tx(kept_raw, miners, prices, blocks)
    assert second.miner_txs == first.miner_txs
    assert second.dropped == 0 and second.self_count == 0


def test_parse_transactions_stream():
    text = (
        "block_number,tx_index,from_address,to_address,value_wei\n"
        f"0,0,{ADDR_A},{ADDR_B},1000\n"
    )
    txs = list(parse_transactions(io.StringIO(text)))
    assert txs == [TxRecord(0, 0, ADDR_A, ADDR_B, 1000)]


def test_parse_transactions_negative_wei_is_error():
    text = (
        "block_number,tx_index,from_address,to_address,value_wei\n"
        f"0,0,{ADDR_A},{ADDR_B},-1\n"
    )
    with pytest.raises(IngestError, match="line 2"):
        list(parse_transactions(io.StringIO(text)))


def test_parse_prices_sorted_and_validated():
    text = "date,usd_per_eth\n2020-01-02,20.5\n2020-01-01,10.0\n"
    points = parse_prices(io.StringIO(text))
    assert [p.date.isoformat() for p in points] == ["2020-01-01", "2020-01-02"]
    with pytest.raises(IngestError):
        parse_prices(io.StringIO("date,usd_per_eth\n2020-01-01,0\n"))
    with pytest.raises(IngestError, match="duplicate date"):
        parse_prices(io.StringIO("date,usd_per_eth\n2020-01-01,5\n2020-01-01,6\n"))


def test_bad_header_is_error():
    with pytest.raises(IngestError, match="bad header"):
        parse_blocks(io.StringIO("a,b,c\n"))
