"""Command-line interface.

Subcommands: ingest (validate/normalize inputs), analyze (full pipeline),
synth (fixture generator), export (GraphML/DOT of a built network), verify
(re-check emitted matching and dominating sets). Verbosity via the
MINERGRAPH_LOG environment variable (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import control, exports, ingest, netbuild, pipeline, synth

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BAD_INPUT = 2
EXIT_USAGE = 64

KNOWN_COMMANDS = ("ingest", "analyze", "synth", "export", "verify")


def _setup_logging() -> None:
    level = os.environ.get("MINERGRAPH_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-b", "--blocks", required=True, help="blocks.csv path")
    p.add_argument("-t", "--transactions", required=True, help="transactions.csv path")
    p.add_argument("-p", "--prices", required=True, help="prices.csv path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minergraph",
        description="Miner transaction network reconstruction and analysis",
    )
    sub = parser.add_subparsers(dest="command")

    p_ingest = sub.add_parser("ingest", help="validate and normalize input files")
    _add_input_args(p_ingest)
    p_ingest.add_argument("-o", "--out", help="write normalized copies here")

    p_analyze = sub.add_parser("analyze", help="run the full analysis pipeline")
    _add_input_args(p_analyze)
    p_analyze.add_argument("-o", "--out", required=True, help="output directory")
    p_analyze.add_argument("--window-days", type=int, default=30)
    p_analyze.add_argument("--slice", default="all", help="all | last | <k>")
    p_analyze.add_argument("--restarts", type=int, default=64)
    p_analyze.add_argument("--seed", type=int, default=0)
    p_analyze.add_argument("--theta", type=float, default=pipeline.DEFAULT_THETA)
    p_analyze.add_argument(
        "--format",
        default="csv,json",
        help="comma-separated subset of csv,json,graphml,dot",
    )
    p_analyze.add_argument("--workers", type=int, default=1)

    p_synth = sub.add_parser("synth", help="generate a synthetic chain")
    p_synth.add_argument("-o", "--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--config", help="JSON file overriding generator fields")
    p_synth.add_argument(
        "--fixture", action="store_true", help="use the documented test fixture config"
    )

    p_export = sub.add_parser("export", help="export a built network")
    _add_input_args(p_export)
    p_export.add_argument("-o", "--out", required=True, help="output directory")
    p_export.add_argument("--window-days", type=int, default=30)
    p_export.add_argument("--slice", default="last", help="last | <k>")
    p_export.add_argument("--format", default="graphml,dot")

    p_verify = sub.add_parser("verify", help="re-check emitted control sets")
    _add_input_args(p_verify)
    p_verify.add_argument(
        "-o", "--out", required=True, help="directory produced by analyze"
    )
    p_verify.add_argument("--window-days", type=int, default=30)
    return parser


def _cmd_ingest(args) -> int:
    blocks = ingest.parse_blocks(args.blocks)
    prices = ingest.parse_prices(args.prices)
    n_txs = sum(1 for _ in ingest.parse_transactions(args.transactions))
    print(f"blocks: {len(blocks)}")
    print(f"transactions: {n_txs}")
    print(f"price points: {len(prices)}")
    if blocks:
        miners = ingest.miner_set(blocks, blocks[-1].block_number)
        print(f"miners: {len(miners)}")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "blocks.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["block_number", "timestamp", "miner"])
            for b in blocks:
                w.writerow([b.block_number, b.timestamp, b.miner])
        with open(outdir / "prices.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", "usd_per_eth"])
            for p in prices:
                w.writerow([p.date.isoformat(), repr(p.usd_per_eth)])
        with open(outdir / "transactions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["block_number", "tx_index", "from_address", "to_address", "value_wei"]
            )
            for t in ingest.parse_transactions(args.transactions):
                w.writerow(
                    [t.block_number, t.tx_index, t.from_address, t.to_address, t.value_wei]
                )
    return EXIT_OK


def _cmd_analyze(args) -> int:
    cfg = pipeline.RunConfig(
        blocks_path=args.blocks,
        transactions_path=args.transactions,
        prices_path=args.prices,
        out_dir=args.out,
        window_days=args.window_days,
        slice_selection=args.slice,
        restarts=args.restarts,
        seed=args.seed,
        theta=args.theta,
        formats=tuple(args.format.split(",")),
        workers=args.workers,
    )
    pipeline.run_pipeline(cfg)
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.fixture:
        cfg = synth.fixture_config(seed=args.seed)
    else:
        cfg = synth.SynthConfig(seed=args.seed)
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        for key, value in overrides.items():
            if not hasattr(cfg, key):
                raise synth.SynthConfigError(f"unknown config field: {key}")
            setattr(cfg, key, value)
        if "price_walk" in overrides:
            cfg.price_walk = tuple(cfg.price_walk)
    blocks, txs, prices, truth = synth.generate_chain(cfg)
    synth.write_chain(args.out, blocks, txs, prices, truth)
    print(f"wrote {len(blocks)} blocks, {len(txs)} transactions to {args.out}")
    return EXIT_OK


def _rebuild(args, selection: str):
    blocks = ingest.parse_blocks(args.blocks)
    if not blocks:
        raise ingest.IngestError("no blocks in input")
    prices = ingest.PriceIndex(ingest.parse_prices(args.prices))
    miners = ingest.miner_set(blocks, blocks[-1].block_number)
    filtered = ingest.filter_miner_tx(
        ingest.parse_transactions(args.transactions), miners, prices, blocks
    )
    slices = pipeline.select_slices(
        netbuild.slice_boundaries(blocks, args.window_days), selection
    )
    nets = netbuild.build_networks(filtered.miner_txs, blocks, slices)
    return blocks, nets


def _cmd_export(args) -> int:
    blocks, nets = _rebuild(args, args.slice)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    formats = args.format.split(",")
    for net in nets:
        stats = netbuild.hash_stats(blocks, net.slice)
        base = outdir / f"slice_{net.slice.k:03d}"
        if "graphml" in formats:
            exports.write_graphml(net, stats, f"{base}.graphml")
        if "dot" in formats:
            exports.write_dot(net, stats, f"{base}.dot")
        if "csv" in formats:
            exports.write_edges_csv(net, f"{base}_edges.csv")
    return EXIT_OK


def _read_members(path: Path) -> list[str]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        next(rd)
        return [row[0] for row in rd if row]


def _cmd_verify(args) -> int:
    report_path = Path(args.out) / "report.json"
    with open(report_path) as fh:
        report = json.load(fh)
    blocks, _ = _rebuild(args, "all")  # validates inputs parse
    failures = 0
    for rec in report["slices"]:
        k = rec["k"]
        slice_dir = Path(args.out) / f"slice_{k:03d}"
        _, nets = _rebuild(args, str(k))
        net = nets[0]
        from . import topology

        stats = netbuild.hash_stats(blocks, net.slice)
        comp = topology.component_map(net, stats)
        gwcc_nodes = {n for n, cid in comp.wcc_id.items() if cid == comp.gwcc}
        net_gwcc = net.subgraph(gwcc_nodes)

        matching = [
            (row[0], row[1])
            for row in csv.reader(open(slice_dir / "matching.csv", newline=""))
        ][1:]
        if not control.verify_matching(net_gwcc, matching):
            print(f"slice {k}: matching INVALID", file=sys.stderr)
            failures += 1
        dom = _read_members(slice_dir / "dominating.csv")
        if not control.verify_domination(net_gwcc, dom):
            print(f"slice {k}: dominating set INVALID", file=sys.stderr)
            failures += 1
        thr = _read_members(slice_dir / "threshold.csv")
        covered = set(thr)
        adj = net_gwcc.out_adj()
        for m in thr:
            if m in adj:
                covered.update(adj[m])
        covered_hash = sum(stats.hash_share.get(n, 0.0) for n in covered)
        theta = rec["threshold"]["theta"]
        if covered_hash < theta and set(thr) != set(net_gwcc.nodes):
            print(
                f"slice {k}: threshold set covers {covered_hash:.4f} < {theta}",
                file=sys.stderr,
            )
            failures += 1
    if failures:
        print(f"verify: {failures} failure(s)", file=sys.stderr)
        return EXIT_ERROR
    print("verify: all control sets valid")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-") and argv[0] not in KNOWN_COMMANDS:
        print(f"unknown subcommand: {argv[0]}", file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return EXIT_USAGE
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    handlers = {
        "ingest": _cmd_ingest,
        "analyze": _cmd_analyze,
        "synth": _cmd_synth,
        "export": _cmd_export,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ingest.IngestError, synth.SynthConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
