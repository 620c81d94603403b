"""Network export: GraphML, DOT and a flat edge list.

Node attributes: hash_share, blocks_mined. Edge attributes: value_usd,
count. Output is deterministic (nodes and edges in sorted order).
"""

from __future__ import annotations

import csv
from xml.sax.saxutils import escape, quoteattr

from .netbuild import MinerNetwork, MinerStats


def write_edges_csv(net: MinerNetwork, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["from", "to", "value_usd", "count"])
        for (u, v) in sorted(net.edges):
            attr = net.edges[(u, v)]
            w.writerow([u, v, repr(attr.value_usd), attr.count])


def to_graphml(net: MinerNetwork, stats: MinerStats) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="d0" for="node" attr.name="hash_share" attr.type="double"/>',
        '  <key id="d1" for="node" attr.name="blocks_mined" attr.type="long"/>',
        '  <key id="d2" for="edge" attr.name="value_usd" attr.type="double"/>',
        '  <key id="d3" for="edge" attr.name="count" attr.type="long"/>',
        '  <graph edgedefault="directed">',
    ]
    for n in net.nodes:
        lines.append(f"    <node id={quoteattr(n)}>")
        lines.append(f'      <data key="d0">{stats.hash_share.get(n, 0.0)!r}</data>')
        lines.append(f'      <data key="d1">{stats.blocks_mined.get(n, 0)}</data>')
        lines.append("    </node>")
    for (u, v) in sorted(net.edges):
        attr = net.edges[(u, v)]
        lines.append(f"    <edge source={quoteattr(u)} target={quoteattr(v)}>")
        lines.append(f'      <data key="d2">{attr.value_usd!r}</data>')
        lines.append(f'      <data key="d3">{attr.count}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def to_dot(net: MinerNetwork, stats: MinerStats) -> str:
    lines = ["digraph miners {"]
    for n in net.nodes:
        lines.append(
            f'  "{n}" [hash_share={stats.hash_share.get(n, 0.0)!r}, '
            f"blocks_mined={stats.blocks_mined.get(n, 0)}];"
        )
    for (u, v) in sorted(net.edges):
        attr = net.edges[(u, v)]
        lines.append(
            f'  "{u}" -> "{v}" [value_usd={attr.value_usd!r}, count={attr.count}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_graphml(net: MinerNetwork, stats: MinerStats, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_graphml(net, stats))


def write_dot(net: MinerNetwork, stats: MinerStats, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_dot(net, stats))
