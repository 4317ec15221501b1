"""Memory-bounded execution by index slicing.

Slicing fixes a bond index to each of its values in turn, executes the
(smaller) sliced network with the same tree shape, and sums the results.
The memory model charges 8 bytes per tensor entry and assumes a strict
postorder: a leaf is loaded when first needed, intermediates live until
their parent consumes them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import BudgetInfeasible, NoCandidates, NotABondIndex
from .network import ContractionTree, TensorNetwork, join, leaf, node_index_sets
from .tensor import Assignment, Index, Tensor, add, contract_pair, slice_tensor

BYTES_PER_ENTRY = 8


def network_slice(n: TensorNetwork, eta: Assignment) -> TensorNetwork:
    """Fix bond indices to concrete values across the whole network."""
    for index in eta:
        if index not in n.bond_indices:
            raise NotABondIndex(f"{index.id!r} is not a bond index of the network")
    return TensorNetwork(tuple(slice_tensor(t, eta) for t in n.tensors))


def _slice_plan(n: TensorNetwork, t: ContractionTree, eta: Assignment):
    """The same tree shape over the sliced tensors."""
    sliced = {id(old): slice_tensor(old, eta) for old in n.tensors}
    m = TensorNetwork(tuple(sliced[id(old)] for old in n.tensors))

    built = {}
    for node in t.postorder():
        if node.is_leaf:
            built[id(node)] = leaf(sliced[id(node.tensor)])
        else:
            built[id(node)] = join(built[id(node.left)], built[id(node.right)])
    return m, built[id(t)]


def _bytes(index_set, drop=frozenset()) -> int:
    out = BYTES_PER_ENTRY
    for i in index_set:
        if i not in drop:
            out *= i.domain_size
    return out


def mem_cost(n: TensorNetwork, t: ContractionTree, drop=frozenset()) -> int:
    """Peak live bytes of executing t in strict postorder, with the indices
    in ``drop`` treated as already sliced away."""
    sets = node_index_sets(t)
    peak = {}
    live = {}
    for node in t.postorder():
        out = _bytes(sets[id(node)], drop)
        if node.is_leaf:
            peak[id(node)] = out
        else:
            lp, rp = peak[id(node.left)], peak[id(node.right)]
            ll, rl = live[id(node.left)], live[id(node.right)]
            peak[id(node)] = max(lp, ll + rp, ll + rl + out)
        live[id(node)] = out
    return peak[id(t)]


def choose_slice_index(n: TensorNetwork, t: ContractionTree, already=frozenset()) -> Index:
    """Greedy pick: the bond index whose removal minimizes the memory cost,
    ties broken by smallest index id."""
    candidates = sorted(n.bond_indices - already, key=Index.sort_key)
    if not candidates:
        raise NoCandidates("no bond index left to slice")
    return min(
        candidates,
        key=lambda i: (mem_cost(n, t, drop=already | {i}), i.sort_key()),
    )


@dataclass
class SlicedExecution:
    result: Tensor
    sliced_indices: list = field(default_factory=list)
    mem_estimate: int = 0
    peak_observed: int = 0
    num_slices: int = 1


def _execute_tracked(n: TensorNetwork, t: ContractionTree):
    """Execute the plan while tracking live bytes under the memory model."""
    results: dict[int, Tensor] = {}
    live = 0
    peak = 0
    for node in t.postorder():
        if node.is_leaf:
            results[id(node)] = node.tensor
            live += node.tensor.size * BYTES_PER_ENTRY
        else:
            a = results.pop(id(node.left))
            b = results.pop(id(node.right))
            out = contract_pair(a, b)
            live += out.size * BYTES_PER_ENTRY
            peak = max(peak, live)
            live -= (a.size + b.size) * BYTES_PER_ENTRY
            results[id(node)] = out
        peak = max(peak, live)
    return results[id(t)], peak


def sliced_execute(
    n: TensorNetwork,
    t: ContractionTree,
    mem_budget: int | None = None,
) -> SlicedExecution:
    """Execute the plan within the byte budget, slicing bond indices as
    needed and summing the per-binding results in lexicographic order."""
    chosen: list[Index] = []
    if mem_budget is not None:
        while mem_cost(n, t, drop=frozenset(chosen)) > mem_budget:
            try:
                chosen.append(choose_slice_index(n, t, already=frozenset(chosen)))
            except NoCandidates:
                raise BudgetInfeasible(
                    f"cannot fit in {mem_budget} bytes even fully sliced "
                    f"(needs {mem_cost(n, t, drop=n.bond_indices)})"
                )
    estimate = mem_cost(n, t, drop=frozenset(chosen))

    if not chosen:
        result, peak = _execute_tracked(n, t)
        return SlicedExecution(result, [], estimate, peak, 1)

    total = None
    peak = 0
    count = 0
    domains = [range(i.domain_size) for i in chosen]
    for combo in itertools.product(*domains):
        eta = Assignment(zip(chosen, combo))
        m, plan = _slice_plan(n, t, eta)
        part, part_peak = _execute_tracked(m, plan)
        peak = max(peak, part_peak)
        total = part if total is None else add(total, part)
        count += 1
    return SlicedExecution(total, chosen, estimate, peak, count)
