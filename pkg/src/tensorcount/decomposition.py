"""Tree, branch, and carving decompositions: validation, widths, heuristics.

Decomposition trees are networkx graphs whose nodes are opaque labels.
Branch and carving decompositions carry a leaf map from tree leaves to graph
edges / vertices. Tree decompositions carry a bag per node.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field

import networkx as nx

from .errors import InvalidDecomposition, NoHostBag
from .graphs import Graph

_fresh = itertools.count()


def fresh_node(prefix="n"):
    # zero-padded so string ordering of names matches creation order even
    # when the process-wide counter starts at different offsets
    return (prefix, f"{next(_fresh):012d}")


@dataclass
class TreeDecomposition:
    tree: nx.Graph
    bags: dict  # tree node -> frozenset of graph vertices

    def __post_init__(self):
        self.bags = {n: frozenset(b) for n, b in self.bags.items()}

    def width(self) -> int:
        return max(len(b) for b in self.bags.values()) - 1


@dataclass
class BranchDecomposition:
    tree: nx.Graph
    leaf_map: dict  # tree leaf node -> graph edge id


@dataclass
class CarvingDecomposition:
    tree: nx.Graph
    leaf_map: dict  # tree leaf node -> graph vertex


@dataclass
class StreamRecord:
    kind: str  # "tree" or "branch"
    decomposition: object
    width: int
    found_at: float
    planner: str = ""


@dataclass
class DecompositionStream:
    """Best-so-far sequence of decompositions; widths strictly decrease."""

    records: list = field(default_factory=list)

    def best(self):
        return self.records[-1] if self.records else None

    def offer(self, record: StreamRecord) -> bool:
        if self.records and record.width >= self.records[-1].width:
            return False
        self.records.append(record)
        return True


# --- validation --------------------------------------------------------------


def _check_tree_shape(tree: nx.Graph, what: str):
    if tree.number_of_nodes() == 0:
        raise InvalidDecomposition(f"{what}: empty tree")
    if not nx.is_tree(tree):
        raise InvalidDecomposition(f"{what}: decomposition graph is not a tree")


def validate_tree_decomposition(td: TreeDecomposition, g: Graph):
    """Raise InvalidDecomposition unless all three defining conditions hold."""
    _check_tree_shape(td.tree, "tree decomposition")
    if set(td.bags) != set(td.tree.nodes):
        raise InvalidDecomposition("tree decomposition: bags do not label every node")
    covered = set().union(*td.bags.values()) if td.bags else set()
    if covered != set(g.vertices):
        missing = set(g.vertices) - covered
        if missing:
            raise InvalidDecomposition(f"tree decomposition: vertices {missing} in no bag")
        raise InvalidDecomposition("tree decomposition: bags contain unknown vertices")
    for e, ends in g.edges.items():
        if not any(ends <= bag for bag in td.bags.values()):
            raise InvalidDecomposition(f"tree decomposition: edge {e!r} has no host bag")
    for v in g.vertices:
        nodes = [n for n, bag in td.bags.items() if v in bag]
        sub = td.tree.subgraph(nodes)
        if sub.number_of_nodes() and not nx.is_connected(sub):
            raise InvalidDecomposition(
                f"tree decomposition: bags containing {v!r} are disconnected"
            )


def _validate_leaf_decomposition(tree: nx.Graph, leaf_map: dict, targets, what: str):
    _check_tree_shape(tree, what)
    mapped = list(leaf_map.values())
    if len(mapped) != len(set(mapped)) or set(mapped) != set(targets):
        raise InvalidDecomposition(f"{what}: leaves are not a bijection onto the target set")
    for n in tree.nodes:
        deg = tree.degree[n]
        if n in leaf_map:
            if deg > 1:
                raise InvalidDecomposition(f"{what}: mapped leaf {n!r} has degree {deg}")
        else:
            if tree.number_of_nodes() > 2 and deg != 3:
                raise InvalidDecomposition(
                    f"{what}: internal node {n!r} has degree {deg}, expected 3"
                )
    for n in tree.nodes:
        if tree.degree[n] <= 1 and n not in leaf_map and tree.number_of_nodes() > 1:
            raise InvalidDecomposition(f"{what}: unmapped leaf node {n!r}")


def validate_branch_decomposition(bd: BranchDecomposition, g: Graph):
    if not g.edges:
        raise InvalidDecomposition("branch decomposition: graph has no edges")
    _validate_leaf_decomposition(bd.tree, bd.leaf_map, g.edges.keys(), "branch decomposition")


def validate_carving_decomposition(cd: CarvingDecomposition, g: Graph):
    _validate_leaf_decomposition(cd.tree, cd.leaf_map, g.vertices, "carving decomposition")


# --- widths ------------------------------------------------------------------


def width_tree(td: TreeDecomposition, g: Graph = None) -> int:
    if g is not None:
        validate_tree_decomposition(td, g)
    return td.width()


def _rooted_postorder(tree: nx.Graph):
    """(root, parent map, postorder node list) for an arbitrary rooting."""
    root = next(iter(tree.nodes))
    parent = {root: None}
    order = []
    stack = [root]
    while stack:
        node = stack.pop()
        order.append(node)
        for nbr in tree.neighbors(node):
            if nbr not in parent:
                parent[nbr] = node
                stack.append(nbr)
    return root, parent, list(reversed(order))


def width_branch(bd: BranchDecomposition, g: Graph) -> int:
    """Width by a single leaves-to-root sweep of per-vertex incidence counts."""
    validate_branch_decomposition(bd, g)
    tree = bd.tree
    if tree.number_of_edges() == 0:
        return 0
    deg = {v: g.degree(v) for v in g.vertices}
    root, parent, order = _rooted_postorder(tree)
    counts: dict[object, Counter] = {}
    width = 0
    for node in order:
        c = Counter()
        if node in bd.leaf_map:
            for v in g.endpoints(bd.leaf_map[node]):
                c[v] += 1
        for nbr in tree.neighbors(node):
            if parent.get(nbr) is node:
                child_c = counts.pop(nbr)
                if len(child_c) > len(c):
                    c, child_c = child_c, c
                c.update(child_c)
        if node is not root:
            boundary = sum(1 for v, k in c.items() if 0 < k < deg[v])
            width = max(width, boundary)
        counts[node] = c
    return width


def branch_width_bruteforce(bd: BranchDecomposition, g: Graph) -> int:
    """Per-arc boundary computation by explicit leaf-set enumeration."""
    validate_branch_decomposition(bd, g)
    width = 0
    for a in bd.tree.edges:
        side = _leaves_on_side(bd.tree, a, bd.leaf_map)
        other = set(g.edges) - side
        shared = g.subgraph_edge_endpoints(side) & g.subgraph_edge_endpoints(other)
        width = max(width, len(shared))
    return width


def _leaves_on_side(tree: nx.Graph, arc, leaf_map):
    u, v = arc
    cut = tree.copy()
    cut.remove_edge(u, v)
    comp = nx.node_connected_component(cut, u)
    return {leaf_map[n] for n in comp if n in leaf_map}


def width_carving(cd: CarvingDecomposition, g: Graph) -> int:
    """Max number of graph edges crossing any arc's vertex bipartition."""
    validate_carving_decomposition(cd, g)
    tree = cd.tree
    if tree.number_of_edges() == 0:
        return 0
    root, parent, order = _rooted_postorder(tree)
    counts: dict[object, Counter] = {}
    width = 0
    for node in order:
        c = Counter()
        if node in cd.leaf_map:
            for e in g.incident_edges(cd.leaf_map[node]):
                c[e] += 1
        for nbr in tree.neighbors(node):
            if parent.get(nbr) is node:
                child_c = counts.pop(nbr)
                if len(child_c) > len(c):
                    c, child_c = child_c, c
                c.update(child_c)
        if node is not root:
            crossing = sum(1 for e, k in c.items() if k == 1)
            width = max(width, crossing)
        counts[node] = c
    return width


# --- elimination-order heuristics -------------------------------------------


def _eliminate(adj: dict, order: list):
    """Bags from an elimination order over a simple adjacency structure."""
    adj = {v: set(nbrs) for v, nbrs in adj.items()}
    bags = []
    for v in order:
        nbrs = adj[v]
        bags.append(frozenset({v} | nbrs))
        for a in nbrs:
            adj[a].discard(v)
            adj[a].update(nbrs - {a})
        del adj[v]
    return bags


def _elimination_tree_decomposition(g: Graph, order: list) -> TreeDecomposition:
    bags = _eliminate(g.simple_adjacency(), order)
    pos = {v: k for k, v in enumerate(order)}
    tree = nx.Graph()
    nodes = [fresh_node("td") for _ in order]
    for n in nodes:
        tree.add_node(n)
    bag_map = dict(zip(nodes, bags))
    for k, bag in enumerate(bags):
        later = [pos[v] for v in bag if pos[v] > k]
        target = min(later) if later else (k + 1 if k + 1 < len(bags) else None)
        if target is not None:
            tree.add_edge(nodes[k], nodes[target])
    if not order:
        n = fresh_node("td")
        tree.add_node(n)
        bag_map = {n: frozenset()}
    return binarize_tree_decomposition(TreeDecomposition(tree, bag_map))


def binarize_tree_decomposition(td: TreeDecomposition) -> TreeDecomposition:
    """Split nodes of degree > 3 into bag-duplicating chains (width unchanged)."""
    tree = td.tree.copy()
    bags = dict(td.bags)
    while True:
        high = [n for n in tree.nodes if tree.degree[n] > 3]
        if not high:
            break
        n = high[0]
        nbrs = list(tree.neighbors(n))
        copy = fresh_node("td")
        bags[copy] = bags[n]
        tree.add_edge(n, copy)
        for m in nbrs[2:]:
            tree.remove_edge(n, m)
            tree.add_edge(copy, m)
    return TreeDecomposition(tree, bags)


def _ordered_vertices(g: Graph):
    return sorted(g.vertices, key=lambda v: str(v))


def _heuristic_order(g: Graph, score, seed: int) -> list:
    """Greedy elimination order, ties broken by seed-keyed randomness."""
    rng = random.Random(seed)
    adj = {v: set(nbrs) for v, nbrs in g.simple_adjacency().items()}
    order = []
    remaining = _ordered_vertices(g)
    while remaining:
        scored = [(score(adj, v), v) for v in remaining]
        best = min(s for s, _ in scored)
        ties = [v for s, v in scored if s == best]
        v = rng.choice(ties)
        order.append(v)
        nbrs = adj[v]
        for a in nbrs:
            adj[a].discard(v)
            adj[a].update(nbrs - {a})
        del adj[v]
        remaining.remove(v)
    return order


def _fill_in(adj, v) -> int:
    nbrs = list(adj[v])
    return sum(
        1
        for a, b in itertools.combinations(nbrs, 2)
        if b not in adj[a]
    )


def _degree(adj, v) -> int:
    return len(adj[v])


def min_fill_tree_decomposition(g: Graph, seed: int = 0) -> TreeDecomposition:
    return _elimination_tree_decomposition(g, _heuristic_order(g, _fill_in, seed))


def min_degree_tree_decomposition(g: Graph, seed: int = 0) -> TreeDecomposition:
    return _elimination_tree_decomposition(g, _heuristic_order(g, _degree, seed))


# --- conversions -------------------------------------------------------------


def tree_to_branch(td: TreeDecomposition, g: Graph) -> BranchDecomposition:
    """Branch decomposition of width at most width_tree + 1.

    Each graph edge is attached as a leaf under a host node whose bag
    contains both endpoints; host nodes are expanded into paths of copies so
    every node keeps degree <= 3, then edge-less branches are pruned.
    """
    if not g.edges:
        raise InvalidDecomposition("tree_to_branch requires a graph with edges")

    node_order = sorted(td.tree.nodes, key=str)
    hosted: dict[object, list] = {n: [] for n in node_order}
    for e in sorted(g.edges, key=str):
        ends = g.endpoints(e)
        host = next((n for n in node_order if ends <= td.bags[n]), None)
        if host is None:
            raise NoHostBag(f"no bag contains both endpoints of edge {e!r}")
        hosted[host].append(e)

    tree = nx.Graph()
    leaf_map: dict = {}
    # one copy of each td node per external attachment (tree arcs + hosted edges)
    slots: dict[object, list] = {}
    for n in node_order:
        needed = max(1, td.tree.degree[n] + len(hosted[n]))
        copies = [fresh_node("bd") for _ in range(needed)]
        slots[n] = copies
        tree.add_node(copies[0])
        for a, b in zip(copies, copies[1:]):
            tree.add_edge(a, b)
    cursor = {n: 0 for n in node_order}

    def take_slot(n):
        c = slots[n][cursor[n]]
        cursor[n] += 1
        return c

    for n, m in td.tree.edges:
        tree.add_edge(take_slot(n), take_slot(m))
    for n in node_order:
        for e in hosted[n]:
            leaf = fresh_node("bdleaf")
            leaf_map[leaf] = e
            tree.add_edge(take_slot(n), leaf)

    _prune_and_smooth(tree, leaf_map)
    return BranchDecomposition(tree, leaf_map)


def _prune_and_smooth(tree: nx.Graph, leaf_map: dict):
    """Drop scaffold leaves and suppress degree-2 scaffold nodes in place."""
    changed = True
    while changed:
        changed = False
        for n in list(tree.nodes):
            if n in leaf_map:
                continue
            deg = tree.degree[n]
            if deg <= 1 and tree.number_of_nodes() > 1:
                tree.remove_node(n)
                changed = True
            elif deg == 2:
                a, b = tree.neighbors(n)
                tree.remove_node(n)
                tree.add_edge(a, b)
                changed = True


def caterpillar_branch_decomposition(g: Graph, edge_order=None) -> BranchDecomposition:
    """Always-valid fallback: leaves along a spine in the given order."""
    edges = list(edge_order) if edge_order is not None else sorted(g.edges, key=str)
    if not edges:
        raise InvalidDecomposition("caterpillar requires at least one edge")
    return BranchDecomposition(*_caterpillar(edges))


def caterpillar_carving_decomposition(vertices) -> CarvingDecomposition:
    return CarvingDecomposition(*_caterpillar(list(vertices)))


def _caterpillar(items):
    tree = nx.Graph()
    leaf_map = {}
    leaves = []
    for x in items:
        n = fresh_node("leaf")
        leaf_map[n] = x
        leaves.append(n)
    if len(leaves) == 1:
        tree.add_node(leaves[0])
        return tree, leaf_map
    if len(leaves) == 2:
        tree.add_edge(leaves[0], leaves[1])
        return tree, leaf_map
    spine = [fresh_node("spine") for _ in range(len(leaves) - 2)]
    for a, b in zip(spine, spine[1:]):
        tree.add_edge(a, b)
    tree.add_edge(spine[0], leaves[0])
    tree.add_edge(spine[0], leaves[1])
    for s, l in zip(spine[1:], leaves[2:-1]):
        tree.add_edge(s, l)
    tree.add_edge(spine[-1], leaves[-1])
    return tree, leaf_map
