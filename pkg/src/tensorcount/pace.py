"""PACE-2017 interchange formats: .gr graphs and .td tree decompositions."""

from __future__ import annotations

import networkx as nx

from .decomposition import TreeDecomposition
from .errors import MalformedPace
from .graphs import Graph


def vertex_numbering(g: Graph) -> dict:
    """Deterministic graph vertex -> 1..n numbering."""
    return {v: k + 1 for k, v in enumerate(sorted(g.vertices, key=str))}


def emit_gr(g: Graph, numbering: dict = None) -> str:
    num = numbering or vertex_numbering(g)
    lines = [f"p tw {len(g.vertices)} {len(g.edges)}"]
    for e in sorted(g.edges, key=str):
        u, v = sorted(num[x] for x in g.endpoints(e))
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def parse_gr(text: str) -> Graph:
    n = None
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "tw":
                raise MalformedPace(f"bad .gr header: {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedPace(f"bad .gr header: {line!r}")
            continue
        if n is None:
            raise MalformedPace("edge line before .gr header")
        try:
            u, v = (int(p) for p in parts)
        except ValueError:
            raise MalformedPace(f"bad .gr edge line: {line!r}")
        if not (1 <= u <= n and 1 <= v <= n) or u == v:
            raise MalformedPace(f"edge {u} {v} invalid for n={n}")
        edges.append((u, v))
    if n is None:
        raise MalformedPace("missing .gr header")
    g = Graph(vertices=set(range(1, n + 1)), edges={})
    for k, (u, v) in enumerate(edges):
        g.add_edge(("e", k), u, v)
    return g


def emit_td(td: TreeDecomposition, num_graph_vertices: int) -> str:
    """Bags must already be over 1..n integers (the PACE numbering)."""
    nodes = sorted(td.tree.nodes, key=str)
    ids = {n: k + 1 for k, n in enumerate(nodes)}
    max_bag = max((len(td.bags[n]) for n in nodes), default=0)
    lines = [f"s td {len(nodes)} {max_bag} {num_graph_vertices}"]
    for n in nodes:
        lines.append("b " + " ".join([str(ids[n])] + [str(v) for v in sorted(td.bags[n])]))
    for a, b in sorted((sorted((ids[x], ids[y])) for x, y in td.tree.edges)):
        lines.append(f"{a} {b}")
    return "\n".join(lines) + "\n"


def parse_td(text: str) -> TreeDecomposition:
    """Parse one .td solution; the tree may have nodes of any degree."""
    bags: dict[int, frozenset] = {}
    arcs: list[tuple[int, int]] = []
    header = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if len(parts) != 5 or parts[1] != "td":
                raise MalformedPace(f"bad .td solution line: {line!r}")
            header = tuple(int(p) for p in parts[2:])
            continue
        if parts[0] == "b":
            try:
                bag_id = int(parts[1])
                bags[bag_id] = frozenset(int(p) for p in parts[2:])
            except (IndexError, ValueError):
                raise MalformedPace(f"bad .td bag line: {line!r}")
            continue
        try:
            a, b = (int(p) for p in parts)
        except ValueError:
            raise MalformedPace(f"bad .td line: {line!r}")
        arcs.append((a, b))
    if header is None:
        raise MalformedPace("missing 's td' solution line")
    n_bags = header[0]
    if set(bags) != set(range(1, n_bags + 1)):
        raise MalformedPace("bag ids do not match declared count")
    tree = nx.Graph()
    tree.add_nodes_from(bags)
    for a, b in arcs:
        if a not in bags or b not in bags:
            raise MalformedPace(f"tree edge {a} {b} references unknown bag")
        tree.add_edge(a, b)
    return TreeDecomposition(tree, bags)


def split_td_solutions(text: str):
    """Split a stream containing several concatenated .td solutions."""
    blocks: list[list[str]] = []
    for raw in text.splitlines():
        if raw.strip().startswith("s td"):
            blocks.append([])
        if blocks:
            blocks[-1].append(raw)
    return ["\n".join(b) + "\n" for b in blocks]
