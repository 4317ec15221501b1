"""Tensor networks, structure graphs, contraction trees, and execution.

A network is a collection of tensors in which no index appears more than
twice. Indices appearing once are free, twice are bond. The structure graph
has one vertex per tensor plus a distinguished free vertex; every index is
an edge.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import IndexOveruse, PlanMismatch
from .graphs import Graph
from .tensor import Index, Tensor, contract_pair, tensors_close


class FreeVertex:
    """Singleton marker for the structure graph's free vertex."""

    def __repr__(self):
        return "<free-vertex>"


FREE_VERTEX = FreeVertex()


@dataclass(frozen=True, eq=False)
class TensorNetwork:
    tensors: tuple[Tensor, ...]

    def __post_init__(self):
        tensors = tuple(self.tensors)
        if not tensors:
            raise ValueError("a tensor network must contain at least one tensor")
        object.__setattr__(self, "tensors", tensors)
        counts = Counter()
        for t in tensors:
            counts.update(t.indices)
        for index, n in counts.items():
            if n > 2:
                raise IndexOveruse(f"index {index.id!r} appears {n} times")
        object.__setattr__(
            self, "_free", frozenset(i for i, n in counts.items() if n == 1)
        )
        object.__setattr__(
            self, "_bond", frozenset(i for i, n in counts.items() if n == 2)
        )

    @property
    def free_indices(self) -> frozenset[Index]:
        return self._free

    @property
    def bond_indices(self) -> frozenset[Index]:
        return self._bond


def free_and_bond_indices(n: TensorNetwork):
    return n.free_indices, n.bond_indices


def structure_graph(n: TensorNetwork) -> Graph:
    """The graph with one vertex per tensor plus the free vertex, one edge
    per index."""
    g = Graph(vertices=set(n.tensors) | {FREE_VERTEX}, edges={})
    owners: dict[Index, list] = {}
    for t in n.tensors:
        for i in t.indices:
            owners.setdefault(i, []).append(t)
    for i, ts in owners.items():
        if len(ts) == 2:
            g.add_edge(i, ts[0], ts[1])
        else:
            g.add_edge(i, ts[0], FREE_VERTEX)
    return g


# --- contraction trees -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ContractionTree:
    """Rooted binary tree over a network's tensors. Leaves hold tensors."""

    tensor: Tensor | None = None
    left: "ContractionTree | None" = None
    right: "ContractionTree | None" = None

    def __post_init__(self):
        if self.tensor is None:
            if self.left is None or self.right is None:
                raise ValueError("internal node needs two children")
        elif self.left is not None or self.right is not None:
            raise ValueError("leaf node cannot have children")

    @property
    def is_leaf(self) -> bool:
        return self.tensor is not None

    def leaves(self) -> list[Tensor]:
        out = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node.tensor)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def postorder(self):
        """Yield nodes bottom-up, children before parents, left before right."""
        out = []
        stack = [self]
        while stack:
            node = stack.pop()
            out.append(node)
            if not node.is_leaf:
                stack.append(node.left)
                stack.append(node.right)
        return reversed(out)


def leaf(t: Tensor) -> ContractionTree:
    return ContractionTree(tensor=t)


def join(a: ContractionTree, b: ContractionTree) -> ContractionTree:
    return ContractionTree(left=a, right=b)


def left_deep_tree(tensors) -> ContractionTree:
    tensors = list(tensors)
    node = leaf(tensors[0])
    for t in tensors[1:]:
        node = join(node, leaf(t))
    return node


def _check_plan(n: TensorNetwork, t: ContractionTree):
    plan_leaves = t.leaves()
    if len(plan_leaves) != len(n.tensors) or set(map(id, plan_leaves)) != set(
        map(id, n.tensors)
    ):
        raise PlanMismatch("contraction tree leaves do not match the network")


def execute(n: TensorNetwork, t: ContractionTree) -> Tensor:
    """Contract the network pairwise, guided by the tree (iteratively, to
    handle deep plans)."""
    _check_plan(n, t)
    results: dict[int, Tensor] = {}
    for node in t.postorder():
        if node.is_leaf:
            results[id(node)] = node.tensor
        else:
            a = results.pop(id(node.left))
            b = results.pop(id(node.right))
            results[id(node)] = contract_pair(a, b)
    return results[id(t)]


def node_index_sets(t: ContractionTree) -> dict[int, frozenset[Index]]:
    """Symbolic execution: node id -> index set of the tensor produced there."""
    sets: dict[int, frozenset[Index]] = {}
    for node in t.postorder():
        if node.is_leaf:
            sets[id(node)] = node.tensor.index_set()
        else:
            a, b = sets[id(node.left)], sets[id(node.right)]
            sets[id(node)] = a ^ b
    return sets


def max_rank(n: TensorNetwork, t: ContractionTree) -> int:
    _check_plan(n, t)
    return max(len(s) for s in node_index_sets(t).values())


def time_cost(n: TensorNetwork, t: ContractionTree, throughput: float = 1e9) -> float:
    """Estimated seconds: summed matrix-multiply op counts over all pairwise
    contractions, divided by a throughput constant."""
    _check_plan(n, t)
    return contraction_ops(t) / throughput


def contraction_ops(t: ContractionTree) -> int:
    sets = node_index_sets(t)
    total = 0
    for node in t.postorder():
        if node.is_leaf:
            continue
        union = sets[id(node.left)] | sets[id(node.right)]
        ops = 1
        for i in union:
            ops *= i.domain_size
        total += ops
    return total


def verify_partial_contraction(m: TensorNetwork, n: TensorNetwork, f: dict) -> bool:
    """Check that executing each preimage f^-1(A) reproduces A (1e-10 relative).

    f maps id(tensor of m) -> tensor of n. Returns False on any structural
    mismatch.
    """
    if set(f) != set(map(id, m.tensors)):
        return False
    groups: dict[int, list[Tensor]] = {id(t): [] for t in n.tensors}
    for t in m.tensors:
        target = f[id(t)]
        if id(target) not in groups:
            return False
        groups[id(target)].append(t)
    by_id = {id(t): t for t in n.tensors}
    for target_id, members in groups.items():
        if not members:
            return False
        try:
            sub = TensorNetwork(tuple(members))
            result = execute(sub, left_deep_tree(members))
        except Exception:
            return False
        if not tensors_close(result, by_id[target_id], rtol=1e-10, atol=1e-12):
            return False
    return True


# --- plan serialization ------------------------------------------------------


def serialize_plan(n: TensorNetwork, t: ContractionTree) -> str:
    """Line-based plan: `contract <id1> <id2> -> <id3>` in postorder. Leaves
    are numbered by network order; intermediates continue the numbering."""
    _check_plan(n, t)
    numbers = {id(tensor): k for k, tensor in enumerate(n.tensors)}
    next_id = len(n.tensors)
    lines = []
    node_num: dict[int, int] = {}
    for node in t.postorder():
        if node.is_leaf:
            node_num[id(node)] = numbers[id(node.tensor)]
        else:
            node_num[id(node)] = next_id
            lines.append(
                f"contract {node_num[id(node.left)]} {node_num[id(node.right)]} -> {next_id}"
            )
            next_id += 1
    return "\n".join(lines) + ("\n" if lines else "")


def parse_plan(n: TensorNetwork, text: str) -> ContractionTree:
    nodes: dict[int, ContractionTree] = {
        k: leaf(tensor) for k, tensor in enumerate(n.tensors)
    }
    consumed: set[int] = set()
    root = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5 or parts[0] != "contract" or parts[3] != "->":
            raise PlanMismatch(f"bad plan line: {line!r}")
        a, b, out = int(parts[1]), int(parts[2]), int(parts[4])
        if a in consumed or b in consumed or a not in nodes or b not in nodes:
            raise PlanMismatch(f"plan reuses or misses operands in: {line!r}")
        node = join(nodes[a], nodes[b])
        consumed.update((a, b))
        nodes[out] = node
        root = node
    if root is None:
        if len(n.tensors) == 1:
            return nodes[0]
        raise PlanMismatch("empty plan for multi-tensor network")
    _check_plan(n, root)
    return root
