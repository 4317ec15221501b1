"""Factoring high-rank tensors along a branch decomposition.

The pipeline replaces each diagonal (variable) and acceptance (clause)
tensor by a tree of rank-<=3 pieces shaped like the minimal subtree of the
branch decomposition spanning the tensor's indices, builds the simplified
piece graph H, threads a carving decomposition through the decomposition
tree, and converts it into a contraction tree. For a branch decomposition
of width w the resulting plan has max-rank at most ceil(4w/3).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .decomposition import CarvingDecomposition, fresh_node, width_carving
from .errors import NotFactorable, PlanMismatch, TooManyFreeIndices
from .graphs import Graph
from .network import (
    FREE_VERTEX,
    ContractionTree,
    TensorNetwork,
    join,
    leaf,
    left_deep_tree,
    structure_graph,
)
from .tensor import Index, Tensor


@dataclass
class DimensionTree:
    """A tree whose leaves stand for the indices of one tensor.

    ``leaf_index`` maps each leaf node to its Index; internal nodes have
    degree at most 3.
    """

    tree: nx.Graph
    leaf_index: dict

    def __post_init__(self):
        leaves = {
            n
            for n in self.tree.nodes
            if self.tree.degree[n] <= 1
        }
        if set(self.leaf_index) != leaves:
            raise ValueError("leaf_index must cover exactly the tree leaves")
        if len(set(self.leaf_index.values())) != len(self.leaf_index):
            raise ValueError("duplicate index in dimension tree leaves")
        for n in self.tree.nodes:
            if self.tree.degree[n] > 3:
                raise ValueError("dimension tree nodes must have degree <= 3")

    def indices(self):
        return set(self.leaf_index.values())


@dataclass
class FactoredTensor:
    network: TensorNetwork
    pieces: dict  # dimension-tree node -> Tensor
    bonds: dict  # frozenset arc {n, m} -> bond Index


def dimension_tree_for(v, bd, g: Graph) -> DimensionTree:
    """Minimal subtree of the branch decomposition spanning v's edges,
    suppressed so leaves are exactly those edges' indices."""
    sub, leaf_index = _spanning_subtree(bd, set(g.incident_edges(v)))
    tree = sub.copy()
    for n in list(tree.nodes):
        if tree.degree[n] == 2 and n not in leaf_index:
            a, b = tree.neighbors(n)
            tree.remove_node(n)
            tree.add_edge(a, b)
    relabel = {n: i for n, i in leaf_index.items()}
    tree = nx.relabel_nodes(tree, relabel)
    return DimensionTree(tree, {i: i for i in leaf_index.values()})


def _spanning_subtree(bd, edge_set):
    """Unsuppressed minimal subtree of bd.tree whose leaves map onto edge_set."""
    terminals = [n for n, e in bd.leaf_map.items() if e in edge_set]
    if len(terminals) == 1:
        sub = nx.Graph()
        sub.add_node(terminals[0])
        return sub, {terminals[0]: bd.leaf_map[terminals[0]]}
    nodes = set()
    base = terminals[0]
    for t in terminals[1:]:
        nodes.update(nx.shortest_path(bd.tree, base, t))
    nodes.update(terminals)
    sub = bd.tree.subgraph(nodes).copy()
    return sub, {n: bd.leaf_map[n] for n in terminals}


# --- tensor kind detection ---------------------------------------------------


def detect_kind(a: Tensor):
    """'copy' for generalized diagonals, 'clause' for one-zero 0/1 tensors,
    None otherwise."""
    if a.rank == 0:
        return "copy"
    if _diagonal_values(a) is not None:
        return "copy"
    if _clause_polarities(a) is not None:
        return "clause"
    return None


def _diagonal_values(a: Tensor):
    """Diagonal vector if a is a generalized diagonal over equal domains."""
    domains = {i.domain_size for i in a.indices}
    if len(domains) != 1:
        return None
    d = domains.pop()
    diag = np.array([a.values[(k,) * a.rank] for k in range(d)])
    mask = np.zeros_like(a.values, dtype=bool)
    for k in range(d):
        mask[(k,) * a.rank] = True
    if np.any(a.values[~mask] != 0.0):
        return None
    return diag


def _clause_polarities(a: Tensor):
    """Per-index satisfying values if a is 0/1 with a single zero entry."""
    if any(i.domain_size != 2 for i in a.indices):
        return None
    if not np.all((a.values == 0.0) | (a.values == 1.0)):
        return None
    zeros = np.argwhere(a.values == 0.0)
    if len(zeros) != 1:
        return None
    falsifying = zeros[0]
    return {i: 1 - int(b) for i, b in zip(a.indices, falsifying)}


# --- factoring one tensor ----------------------------------------------------


def factor_tensor(a: Tensor, kind: str, t: DimensionTree, bond_prefix="b") -> FactoredTensor:
    """Replace a by a tree of rank-<=3 pieces shaped like t.

    Supported kinds are 'copy' (generalized diagonal) and 'clause'
    (0/1 acceptance with one falsifying entry). Other tensors are returned
    unfactored when the tree is trivial, else rejected.
    """
    if t.indices() != a.index_set():
        raise NotFactorable("dimension tree leaves must be the tensor's indices")
    if t.tree.number_of_nodes() == 1:
        node = next(iter(t.tree.nodes))
        return FactoredTensor(TensorNetwork((a,)), {node: a}, {})

    if kind == "copy":
        diag = _diagonal_values(a)
        if diag is None:
            raise NotFactorable("tensor is not a generalized diagonal")
        return _factor_copy(a, t, diag, bond_prefix)
    if kind == "clause":
        pol = _clause_polarities(a)
        if pol is None:
            raise NotFactorable("tensor is not a single-zero acceptance tensor")
        return _factor_clause(a, t, pol, bond_prefix)
    if a.rank <= 3:
        raise NotFactorable("general tensors require a trivial dimension tree")
    raise NotFactorable(f"unsupported tensor kind {kind!r}")


def _fresh_bonds(t: DimensionTree, domain: int, prefix):
    bonds = {}
    # orientation of nx edge tuples depends on insertion order, so sort by
    # the endpoint names, not the tuple
    for k, (n, m) in enumerate(sorted(t.tree.edges, key=lambda e: sorted(map(str, e)))):
        bonds[frozenset((n, m))] = Index((prefix, k), domain)
    return bonds


def _piece_indices(t: DimensionTree, node, bonds):
    out = []
    if node in t.leaf_index:
        out.append(t.leaf_index[node])
    for nbr in sorted(t.tree.neighbors(node), key=str):
        out.append(bonds[frozenset((node, nbr))])
    return tuple(out)


def _factor_copy(a: Tensor, t: DimensionTree, diag, prefix) -> FactoredTensor:
    d = a.indices[0].domain_size
    bonds = _fresh_bonds(t, d, prefix)
    carrier = min(t.leaf_index, key=lambda n: t.leaf_index[n].sort_key())
    pieces = {}
    for node in t.tree.nodes:
        indices = _piece_indices(t, node, bonds)
        values = np.zeros(tuple(i.domain_size for i in indices))
        for k in range(d):
            values[(k,) * len(indices)] = diag[k] if node == carrier else 1.0
        pieces[node] = Tensor(indices, values)
    ordered = tuple(pieces[n] for n in sorted(t.tree.nodes, key=str))
    return FactoredTensor(TensorNetwork(ordered), pieces, bonds)


def _factor_clause(a: Tensor, t: DimensionTree, pol, prefix) -> FactoredTensor:
    """Pieces propagate a 'satisfied so far' bit along arcs toward a root
    leaf, which enforces overall acceptance."""
    bonds = _fresh_bonds(t, 2, prefix)
    root = min(t.leaf_index, key=lambda n: t.leaf_index[n].sort_key())
    parent = {root: None}
    order = [root]
    stack = [root]
    while stack:
        node = stack.pop()
        for nbr in sorted(t.tree.neighbors(node), key=str):
            if nbr not in parent:
                parent[nbr] = node
                order.append(nbr)
                stack.append(nbr)

    pieces = {}
    for node in t.tree.nodes:
        indices = _piece_indices(t, node, bonds)
        own = t.leaf_index.get(node)
        up = bonds[frozenset((node, parent[node]))] if parent[node] is not None else None
        down = [
            bonds[frozenset((node, nbr))]
            for nbr in t.tree.neighbors(node)
            if parent.get(nbr) is node
        ]
        values = np.zeros(tuple(i.domain_size for i in indices))
        for combo in itertools.product((0, 1), repeat=len(indices)):
            tau = dict(zip(indices, combo))
            sat = any(tau[b] == 1 for b in down)
            if own is not None:
                sat = sat or tau[own] == pol[own]
            if up is not None:
                ok = tau[up] == (1 if sat else 0)
            else:
                ok = sat
            values[combo] = 1.0 if ok else 0.0
        pieces[node] = Tensor(indices, values)
    ordered = tuple(pieces[n] for n in sorted(t.tree.nodes, key=str))
    return FactoredTensor(TensorNetwork(ordered), pieces, bonds)


# --- the full construction ---------------------------------------------------


@dataclass
class FactorBranchResult:
    network: TensorNetwork
    tree: ContractionTree
    branch_width: int
    carving_width: int  # width of the audit carving decomposition, -1 if trivial path
    piece_map: dict  # id(piece) -> original tensor


def factor_branch(n: TensorNetwork, bd, g: Graph = None):
    """Factor the network along a branch decomposition of its structure
    graph and return (M, contraction tree)."""
    result = factor_branch_audit(n, bd, g)
    return result.network, result.tree


def factor_branch_audit(n: TensorNetwork, bd, g: Graph = None) -> FactorBranchResult:
    from .decomposition import width_branch

    if len(n.free_indices) > 3:
        raise TooManyFreeIndices(f"{len(n.free_indices)} free indices, at most 3 allowed")
    if g is None:
        g = structure_graph(n)
    if not g.edges:
        return _trivial_plan(n, g, 0)
    w = width_branch(bd, g)
    if w == 0:
        return _trivial_plan(n, g, 0)

    # Part 1: factor every tensor along its spanning subtree of bd.tree.
    factorizations = {}
    subtrees = {}
    isolated = []
    for ordinal, a in enumerate(n.tensors):
        if a.rank == 0:
            isolated.append(a)
            continue
        sub, leaf_index = _spanning_subtree(bd, set(a.indices))
        dt = DimensionTree(sub, leaf_index)
        kind = detect_kind(a)
        if kind is None and sub.number_of_nodes() > 1:
            raise NotFactorable(
                f"tensor #{ordinal} is neither a diagonal nor an acceptance tensor"
            )
        fact = factor_tensor(a, kind or "copy", dt, bond_prefix=("b", ordinal))
        factorizations[ordinal] = fact
        subtrees[ordinal] = dt
    if len(n.free_indices) > 0:
        z_sub, _ = _spanning_subtree(bd, set(n.free_indices))
        subtrees["z"] = DimensionTree(z_sub, {
            node: e for node, e in bd.leaf_map.items()
            if node in z_sub.nodes and e in n.free_indices
        })

    pieces = []
    piece_map = {}
    for ordinal in sorted(factorizations, key=str):
        original = n.tensors[ordinal]
        for node in sorted(subtrees[ordinal].tree.nodes, key=str):
            p = factorizations[ordinal].pieces[node]
            pieces.append(p)
            piece_map[id(p)] = original
    for a in isolated:
        pieces.append(a)
        piece_map[id(a)] = a
    m = TensorNetwork(tuple(pieces))

    # Part 2: the simplified piece graph H.
    h, h_vertex_piece = _build_h(n, bd, factorizations, subtrees, g)

    # Part 3: thread a carving decomposition of H through bd.tree.
    s_tree, s_leaf_map = _build_carving_of_h(bd, h, subtrees)

    cwidth = width_carving(CarvingDecomposition(s_tree, s_leaf_map), h)

    # Part 5: relabel to pieces, merge the free-vertex placeholders, attach
    # scalars, and convert to a contraction tree.
    cd = _to_network_carving(s_tree, s_leaf_map, h_vertex_piece, isolated, n)
    tree = carving_to_contraction_tree(m, cd)
    return FactorBranchResult(m, tree, w, cwidth, piece_map)


def _trivial_plan(n: TensorNetwork, g: Graph, w: int) -> FactorBranchResult:
    """Width-0 / edge-free networks: contract component by component."""
    comp_of = {}
    adjacency = {id(t): set() for t in n.tensors}
    owner = {}
    for t in n.tensors:
        for i in t.indices:
            if i in owner:
                adjacency[id(t)].add(owner[i])
                adjacency[owner[i]].add(id(t))
            else:
                owner[i] = id(t)
    seen = set()
    groups = []
    by_id = {id(t): t for t in n.tensors}
    for t in n.tensors:
        if id(t) in seen:
            continue
        stack, comp = [id(t)], []
        seen.add(id(t))
        while stack:
            u = stack.pop()
            comp.append(by_id[u])
            for v in adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        groups.append(comp)
    node = None
    for comp in groups:
        sub = left_deep_tree(comp)
        node = sub if node is None else join(node, sub)
    return FactorBranchResult(n, node, w, -1, {id(t): t for t in n.tensors})


def _build_h(n, bd, factorizations, subtrees, g):
    h = Graph()
    h_vertex_piece = {}
    for key, dt in subtrees.items():
        for node in dt.tree.nodes:
            hv = (key, node)
            h.add_vertex(hv)
            if key != "z":
                h_vertex_piece[hv] = factorizations[key].pieces[node]
    synthetic = itertools.count()
    for key, dt in subtrees.items():
        for a, b in dt.tree.edges:
            if key == "z":
                edge_id = ("zarc", next(synthetic))
            else:
                edge_id = factorizations[key].bonds[frozenset((a, b))]
            h.add_edge(edge_id, (key, a), (key, b))
    # one edge per original index, at its leaf of bd.tree
    ordinal_of = {id(t): k for k, t in enumerate(n.tensors)}
    for leaf_node, index in bd.leaf_map.items():
        ends = g.endpoints(index)
        keys = []
        for v in ends:
            if v is FREE_VERTEX:
                keys.append("z")
            else:
                keys.append(ordinal_of[id(v)])
        h.add_edge(index, (keys[0], leaf_node), (keys[1], leaf_node))
    return h, h_vertex_piece


def _build_carving_of_h(bd, h: Graph, subtrees):
    """Attach H's vertices as leaves along the arcs of the decomposition
    tree.

    A piece (v, n) may only sit on an arc of v's own subtree at n: moving
    past a piece then swaps one crossing edge for another instead of adding
    two. Degree-3 pieces (which each add one crossing) are split evenly over
    their three arcs, giving the ceil(4w/3) carving-width bound.
    """
    t = bd.tree
    members = {node: [] for node in t.nodes}
    for hv in sorted(h.vertices, key=str):
        members[hv[1]].append(hv)

    assignment = {}  # (tree node, arc frozenset) -> list of H vertices
    for node in t.nodes:
        arcs = [frozenset((node, nbr)) for nbr in sorted(t.neighbors(node), key=str)]
        for a in arcs:
            assignment[(node, a)] = []
        if not arcs:
            continue
        deg3_load = {a: 0 for a in arcs}

        def allowed_arcs(hv):
            sub = subtrees[hv[0]].tree
            own = [
                frozenset((node, m))
                for m in sorted(sub.neighbors(node), key=str)
                if frozenset((node, m)) in deg3_load
            ]
            return own or arcs

        deg3 = [hv for hv in members[node] if h.degree(hv) >= 3]
        rest = [hv for hv in members[node] if h.degree(hv) < 3]
        for hv in deg3:
            arc = min(allowed_arcs(hv), key=lambda a: (deg3_load[a], str(sorted(a, key=str))))
            deg3_load[arc] += 1
            assignment[(node, arc)].append(hv)
        for hv in rest:
            arc = allowed_arcs(hv)[0]
            assignment[(node, arc)].append(hv)

    s = nx.Graph()
    leaf_map = {}
    hubs = {node: ("hub", node) for node in t.nodes}
    for node in t.nodes:
        s.add_node(hubs[node])
    for u, v in t.edges:
        arc = frozenset((u, v))
        chain = [hubs[u]]
        for hv in assignment[(u, arc)] + list(reversed(assignment[(v, arc)])):
            x = fresh_node("x")
            leaf_node = fresh_node("hleaf")
            leaf_map[leaf_node] = hv
            s.add_edge(x, leaf_node)
            chain.append(x)
        chain.append(hubs[v])
        for a, b in zip(chain, chain[1:]):
            s.add_edge(a, b)
    for node in t.nodes:
        if t.degree[node] == 1:
            s.remove_node(hubs[node])

    _smooth_carving(s, leaf_map)
    return s, leaf_map


def _smooth_carving(tree: nx.Graph, leaf_map: dict):
    changed = True
    while changed:
        changed = False
        for node in list(tree.nodes):
            if node in leaf_map:
                continue
            deg = tree.degree[node]
            if deg <= 1 and tree.number_of_nodes() > 1:
                tree.remove_node(node)
                changed = True
            elif deg == 2:
                a, b = tree.neighbors(node)
                tree.remove_node(node)
                tree.add_edge(a, b)
                changed = True


def _attach_leaf(tree: nx.Graph, leaf_node):
    """Hang a new leaf off the tree without breaking binary shape."""
    if tree.number_of_nodes() == 0:
        tree.add_node(leaf_node)
        return
    if tree.number_of_nodes() == 1:
        tree.add_edge(next(iter(tree.nodes)), leaf_node)
        return
    u, v = min(tree.edges, key=lambda e: sorted(map(str, e)))
    mid = fresh_node("attach")
    tree.remove_edge(u, v)
    tree.add_edge(u, mid)
    tree.add_edge(mid, v)
    tree.add_edge(mid, leaf_node)


def _to_network_carving(s_tree, s_leaf_map, h_vertex_piece, isolated, n):
    tree = s_tree.copy()
    leaf_map = {}
    z_leaves = []
    for leaf_node, hv in s_leaf_map.items():
        if hv[0] == "z":
            z_leaves.append(leaf_node)
        else:
            leaf_map[leaf_node] = h_vertex_piece[hv]
    if z_leaves:
        # merge the free-vertex placeholders into a single z leaf
        keep = max(z_leaves, key=str)
        for leaf_node in z_leaves:
            if leaf_node is not keep:
                tree.remove_node(leaf_node)
        _smooth_carving(tree, {**leaf_map, keep: FREE_VERTEX})
        leaf_map[keep] = FREE_VERTEX
    else:
        z_leaf = fresh_node("zleaf")
        _attach_leaf(tree, z_leaf)
        leaf_map[z_leaf] = FREE_VERTEX
    for a in isolated:
        leaf_node = fresh_node("scalar")
        _attach_leaf(tree, leaf_node)
        leaf_map[leaf_node] = a
    return CarvingDecomposition(tree, leaf_map)


def carving_to_contraction_tree(m: TensorNetwork, cd: CarvingDecomposition) -> ContractionTree:
    """Drop the free-vertex leaf and read the rooted tree as a plan."""
    z_nodes = [node for node, v in cd.leaf_map.items() if v is FREE_VERTEX]
    if len(z_nodes) != 1:
        raise PlanMismatch("carving decomposition must contain the free vertex once")
    tree = cd.tree.copy()
    z = z_nodes[0]
    if tree.number_of_nodes() == 1:
        raise PlanMismatch("carving decomposition has no tensor leaves")
    neighbors = list(tree.neighbors(z))
    tree.remove_node(z)
    root = neighbors[0]

    def build(node, parent):
        children = [nbr for nbr in tree.neighbors(node) if nbr is not parent]
        if not children:
            if node not in cd.leaf_map:
                raise PlanMismatch(f"unmapped carving leaf {node!r}")
            return leaf(cd.leaf_map[node])
        if len(children) != 2:
            raise PlanMismatch(f"carving node {node!r} has {len(children)} children")
        return join(build(children[0], node), build(children[1], node))

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * tree.number_of_nodes() + 100))
    try:
        plan = build(root, None)
    finally:
        sys.setrecursionlimit(old)
    leaves = plan.leaves()
    if set(map(id, leaves)) != set(map(id, m.tensors)):
        raise PlanMismatch("carving leaves do not match the network's tensors")
    return plan


def max_rank_bound(width: int) -> int:
    return math.ceil(4 * max(width, 1) / 3)
