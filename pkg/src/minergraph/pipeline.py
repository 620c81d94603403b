"""End-to-end orchestration: ingest -> slices -> per-slice analyses -> report.

All artifacts are written atomically (temp file + rename) and
deterministically: the same inputs and seed produce byte-identical output.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import concentration, control, exports, ingest, netbuild, topology

log = logging.getLogger("minergraph.pipeline")

SCHEMA_VERSION = 1
DEFAULT_THETA = 0.51


@dataclass
class RunConfig:
    blocks_path: str
    transactions_path: str
    prices_path: str
    out_dir: str
    window_days: int = 30
    slice_selection: str = "all"  # all | last | <k>
    restarts: int = 64
    seed: int = 0
    theta: float = DEFAULT_THETA
    formats: tuple[str, ...] = ("csv", "json")
    workers: int = 1

    def validate(self) -> None:
        for p in (self.blocks_path, self.transactions_path, self.prices_path):
            if not os.path.exists(p):
                raise FileNotFoundError(f"input file not found: {p}")
        if self.window_days < 1:
            raise ValueError("window_days must be >= 1")
        if self.slice_selection not in ("all", "last"):
            int(self.slice_selection)  # raises ValueError if not an index


def _atomic_write(path: Path, content: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(content)
    os.replace(tmp, path)


def _csv_text(header: list[str], rows: list[list]) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def analyze_slice(
    net: netbuild.MinerNetwork,
    stats: netbuild.MinerStats,
    restarts: int,
    seed: int,
    theta: float = DEFAULT_THETA,
) -> dict:
    """All per-slice analyses as one JSON-serializable record.

    Control analyses (against-hierarchy, drivers, dominating sets) run on
    the GWCC-induced subgraph, matching the scope of the reported network
    results; hash shares stay relative to the whole slice.
    """
    comp = topology.component_map(net, stats)
    gwcc_nodes = (
        {n for n, cid in comp.wcc_id.items() if cid == comp.gwcc}
        if comp.gwcc >= 0
        else set()
    )
    net_gwcc = net.subgraph(gwcc_nodes)

    blocks_list = [stats.blocks_mined[m] for m in sorted(stats.blocks_mined)]
    shares_pct = [stats.hash_share[m] * 100.0 for m in sorted(stats.hash_share)]
    mean_wdeg, median_wdeg = concentration.weighted_degree_summary(net)
    n_wcc = len(set(comp.wcc_id.values()))

    role_counts: dict[str, int] = {}
    for n in net.nodes:
        role_counts[comp.roles[n]] = role_counts.get(comp.roles[n], 0) + 1
    gwcc_roles = {n: comp.roles[n] for n in gwcc_nodes}
    flows = topology.component_flows(net, comp.roles, gwcc_nodes)
    sccs = topology.scc_stats(net, comp.scc_id, stats)

    hierarchy = control.against_hierarchy(net_gwcc, stats)
    drivers = control.driver_nodes(net_gwcc)
    dominating = control.greedy_min_weight_dominating_set(
        net_gwcc, stats, restarts=restarts, seed=seed
    )
    threshold = control.threshold_domination(
        net_gwcc, stats, theta=theta, restarts=restarts, seed=seed
    )

    total_value = net.total_value()
    gwcc_value = net_gwcc.total_value()
    k = net.slice.k

    def try_density(connected_only: bool):
        try:
            return concentration.density(net, connected_only=connected_only)
        except ValueError:
            return None

    record = {
        "k": k,
        "last_block": net.slice.last_block,
        "metrics": {
            "n_miners": len(net.nodes),
            "n_edges": len(net.edges),
            "total_value_usd": total_value,
            "gini_blocks": concentration.gini(blocks_list),
            "hhi": concentration.hhi(shares_pct),
            "top10_share": concentration.top_n_share(stats, 10),
            "density_all": try_density(False),
            "density_connected": try_density(True),
            "mean_wdeg": mean_wdeg,
            "median_wdeg": median_wdeg,
        },
        "gini": concentration.gini(blocks_list),
        "hhi": concentration.hhi(shares_pct),
        "density": try_density(False),
        "gwcc": {
            "n_wcc": n_wcc,
            "size": len(gwcc_nodes),
            "hash_share": math.fsum(stats.hash_share.get(n, 0.0) for n in gwcc_nodes),
            "value_usd": gwcc_value,
            "value_fraction": (gwcc_value / total_value) if total_value > 0 else 0.0,
            "roles": role_counts,
        },
        "scc": {
            "count": len(sccs.per_scc),
            "singletons": sccs.singleton_count,
            "largest": max((s["size"] for s in sccs.per_scc), default=0),
            "pearson_r": sccs.pearson_r,
            "p_value": sccs.p_value,
            "note": sccs.correlation_note,
        },
        "against": {
            "count": len(hierarchy.against_edges),
            "value_usd": hierarchy.against_value_usd,
            "fraction": hierarchy.against_fraction_of_value,
            "mean_climb_pct": hierarchy.mean_rank_climb_pct,
        },
        "drivers": {
            "n_d": drivers.n_d,
            "hash_share": math.fsum(
                stats.hash_share.get(n, 0.0) for n in drivers.drivers
            ),
            "reachable_fraction": drivers.reachable_fraction,
        },
        "dominating": {
            "size": len(dominating.members),
            "hash_share": dominating.total_hash_share,
        },
        "threshold": {
            "theta": theta,
            "size": len(threshold.members),
            "hash_share": threshold.total_hash_share,
            "covered": threshold.covered_hash_share,
        },
    }
    detail = {
        "component_map": comp,
        "flows": flows,
        "scc_stats": sccs,
        "hierarchy": hierarchy,
        "drivers": drivers,
        "dominating": dominating,
        "threshold": threshold,
        "gwcc_nodes": gwcc_nodes,
    }
    return {"record": record, "detail": detail}


def _write_slice_artifacts(
    slice_dir: Path,
    net: netbuild.MinerNetwork,
    stats: netbuild.MinerStats,
    result: dict,
    formats: tuple[str, ...],
) -> None:
    slice_dir.mkdir(parents=True, exist_ok=True)
    detail = result["detail"]
    record = result["record"]
    comp: topology.ComponentMap = detail["component_map"]

    if "csv" in formats:
        _atomic_write(
            slice_dir / "edges.csv",
            _csv_text(
                ["from", "to", "value_usd", "count"],
                [
                    [u, v, repr(net.edges[(u, v)].value_usd), net.edges[(u, v)].count]
                    for (u, v) in sorted(net.edges)
                ],
            ),
        )
        _atomic_write(
            slice_dir / "components.csv",
            _csv_text(
                ["node", "wcc_id", "scc_id", "role"],
                [[n, comp.wcc_id[n], comp.scc_id[n], comp.roles[n]] for n in net.nodes],
            ),
        )
        _atomic_write(
            slice_dir / "flows.csv",
            _csv_text(
                ["from_role", "to_role", "value_usd"],
                [
                    [fr, to, repr(v)]
                    for (fr, to), v in sorted(detail["flows"].items())
                ],
            ),
        )
        _atomic_write(
            slice_dir / "scc_stats.csv",
            _csv_text(
                ["scc_id", "size", "hash_share", "internal_value"],
                [
                    [s["scc_id"], s["size"], repr(s["hash_share"]), repr(s["internal_value"])]
                    for s in detail["scc_stats"].per_scc
                ],
            ),
        )
        for name, members in (
            ("drivers.csv", sorted(detail["drivers"].drivers)),
            ("dominating.csv", detail["dominating"].members),
            ("threshold.csv", detail["threshold"].members),
        ):
            _atomic_write(slice_dir / name, _csv_text(["node"], [[m] for m in members]))
        _atomic_write(
            slice_dir / "matching.csv",
            _csv_text(["from", "to"], [[u, v] for u, v in detail["drivers"].matching]),
        )
    if "json" in formats:
        control_doc = {
            "against": record["against"],
            "drivers": record["drivers"],
            "dominating": record["dominating"],
            "threshold": record["threshold"],
        }
        _atomic_write(
            slice_dir / "control.json",
            json.dumps(control_doc, indent=2, sort_keys=True) + "\n",
        )
    if "graphml" in formats:
        _atomic_write(slice_dir / "network.graphml", exports.to_graphml(net, stats))
    if "dot" in formats:
        _atomic_write(slice_dir / "network.dot", exports.to_dot(net, stats))


def _slice_job(args):
    net, stats, restarts, seed, theta = args
    return analyze_slice(net, stats, restarts, seed, theta)


def select_slices(slices, selection: str):
    if selection == "all":
        return slices
    if selection == "last":
        return [slices[-1]]
    k = int(selection)
    matching = [s for s in slices if s.k == k]
    if not matching:
        raise ValueError(f"no slice with k={k} (have 1..{len(slices)})")
    return matching


def run_pipeline(cfg: RunConfig) -> dict:
    """Execute the full analysis and write every artifact; returns the
    report document."""
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / ".partial"
    marker.touch()
    try:
        report = _run(cfg, out)
    except Exception:
        log.error("pipeline failed; outputs in %s are partial", out)
        raise
    marker.unlink()
    return report


def _run(cfg: RunConfig, out: Path) -> dict:
    blocks = ingest.parse_blocks(cfg.blocks_path)
    if not blocks:
        raise ingest.IngestError("no blocks in input")
    prices = ingest.PriceIndex(ingest.parse_prices(cfg.prices_path))
    miners = ingest.miner_set(blocks, blocks[-1].block_number)
    filtered = ingest.filter_miner_tx(
        ingest.parse_transactions(cfg.transactions_path), miners, prices, blocks
    )
    log.info(
        "ingest: %d miner txs kept, %d dropped, %d self",
        len(filtered.miner_txs),
        filtered.dropped,
        filtered.self_count,
    )

    all_slices = netbuild.slice_boundaries(blocks, cfg.window_days)
    slices = select_slices(all_slices, cfg.slice_selection)
    networks = netbuild.build_networks(filtered.miner_txs, blocks, slices)
    stats_by_slice = [netbuild.hash_stats(blocks, sl) for sl in slices]

    jobs = [
        (net, stats, cfg.restarts, cfg.seed, cfg.theta)
        for net, stats in zip(networks, stats_by_slice)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_slice_job, jobs))
    else:
        results = [_slice_job(j) for j in jobs]

    for net, stats, result in zip(networks, stats_by_slice, results):
        _write_slice_artifacts(
            out / f"slice_{net.slice.k:03d}", net, stats, result, cfg.formats
        )

    records = [r["record"] for r in results]
    metric_cols = [
        "n_miners",
        "n_edges",
        "total_value_usd",
        "gini_blocks",
        "hhi",
        "top10_share",
        "density_all",
        "density_connected",
        "mean_wdeg",
        "median_wdeg",
    ]
    _atomic_write(
        out / "metrics.csv",
        _csv_text(
            ["k", "last_block"] + metric_cols,
            [
                [rec["k"], rec["last_block"]]
                + [
                    "" if rec["metrics"][c] is None else repr(rec["metrics"][c])
                    if isinstance(rec["metrics"][c], float)
                    else rec["metrics"][c]
                    for c in metric_cols
                ]
                for rec in records
            ],
        ),
    )

    # figure-analogue data series
    window_values = netbuild.window_value_series(networks)
    _atomic_write(
        out / "value_per_window.csv",
        _csv_text(
            ["k", "window_value_usd", "cumulative_value_usd"],
            [
                [rec["k"], repr(wv), repr(rec["metrics"]["total_value_usd"])]
                for rec, wv in zip(records, window_values)
            ],
        ),
    )
    _atomic_write(
        out / "concentration_series.csv",
        _csv_text(
            ["k", "gini_blocks", "hhi", "top10_share", "density_all"],
            [
                [
                    rec["k"],
                    repr(rec["gini"]),
                    repr(rec["hhi"]),
                    repr(rec["metrics"]["top10_share"]),
                    "" if rec["density"] is None else repr(rec["density"]),
                ]
                for rec in records
            ],
        ),
    )
    final_net = networks[-1]
    ranked = sorted(
        (attr.value_usd for attr in final_net.edges.values()), reverse=True
    )
    _atomic_write(
        out / "edge_value_rank.csv",
        _csv_text(
            ["rank", "value_usd"], [[i, repr(v)] for i, v in enumerate(ranked, 1)]
        ),
    )
    profile = concentration.degree_profile(final_net)
    _atomic_write(
        out / "degree_scatter.csv",
        _csv_text(
            ["node", "w_in", "w_out", "d_in", "d_out"],
            [
                [n, repr(profile.w_in[n]), repr(profile.w_out[n]), profile.d_in[n], profile.d_out[n]]
                for n in final_net.nodes
            ],
        ),
    )

    report = {
        "schema_version": SCHEMA_VERSION,
        "window_days": cfg.window_days,
        "seed": cfg.seed,
        "restarts": cfg.restarts,
        "theta": cfg.theta,
        "n_slices_total": len(all_slices),
        "ingest": {
            "n_blocks": len(blocks),
            "n_miners": len(miners),
            "n_miner_txs": len(filtered.miner_txs),
            "n_dropped": filtered.dropped,
            "n_self": filtered.self_count,
        },
        "slices": records,
    }
    _atomic_write(
        out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    return report
