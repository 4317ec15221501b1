"""Reduce a weighted CNF instance to a tensor network.

One index per variable-occurrence pair (var, clause ordinal), domain 2. Each
variable contributes a generalized-diagonal tensor carrying its weight pair;
each clause contributes a 0/1 tensor accepting exactly the occurrence
assignments whose true literals satisfy the clause. The contraction of the
resulting (fully bonded) network is the weighted model count.
"""

from __future__ import annotations

import itertools

import numpy as np

from .formula import CnfFormula, WeightFunction
from .graphs import Graph
from .network import TensorNetwork
from .tensor import Index, Tensor, scalar


def occurrence_indices(formula: CnfFormula) -> dict[tuple[int, int], Index]:
    """Variable-major map (var, clause ordinal) -> shared Index of domain 2."""
    out: dict[tuple[int, int], Index] = {}
    for var in formula.variables():
        for c_ord, clause in enumerate(formula.clauses):
            if any(abs(lit) == var for lit in clause):
                out[(var, c_ord)] = Index((var, c_ord), 2)
    return out


def copy_tensor(indices: tuple[Index, ...], w0: float, w1: float) -> Tensor:
    """Diagonal tensor: w0 at the all-zeros entry, w1 at the all-ones entry."""
    if not indices:
        return scalar(w0 + w1)
    values = np.zeros(tuple(i.domain_size for i in indices))
    values[(0,) * len(indices)] = w0
    values[(1,) * len(indices)] = w1
    return Tensor(indices, values)


def clause_tensor_entry(clause: tuple[int, ...], true_vars: set[int]) -> int:
    """1 iff setting exactly the given variables true satisfies the clause."""
    for lit in clause:
        var = abs(lit)
        if (lit > 0) == (var in true_vars):
            return 1
    return 0


def clause_tensor(clause: tuple[int, ...], indices: tuple[Index, ...]) -> Tensor:
    """0/1 acceptance tensor over the clause's occurrence indices.

    Index k of the list corresponds to the k-th distinct variable of the
    clause (the index ids are (var, clause ordinal) pairs).
    """
    if not clause:
        return scalar(0.0)  # empty clause: unsatisfiable
    variables = [abs(lit) for lit in clause]
    values = np.zeros(tuple(i.domain_size for i in indices))
    for bits in itertools.product((0, 1), repeat=len(indices)):
        true_vars = {v for v, b in zip(variables, bits) if b == 1}
        values[bits] = clause_tensor_entry(clause, true_vars)
    return Tensor(indices, values)


def primal_graph(formula: CnfFormula) -> Graph:
    """Variables as vertices, one edge per co-occurring pair."""
    g = Graph(vertices=set(formula.variables()), edges={})
    pairs = set()
    for clause in formula.clauses:
        variables = sorted({abs(lit) for lit in clause})
        for k, u in enumerate(variables):
            for v in variables[k + 1:]:
                pairs.add((u, v))
    for u, v in sorted(pairs):
        g.add_edge((u, v), u, v)
    return g


def reduce_formula(formula: CnfFormula, weights: WeightFunction) -> TensorNetwork:
    """Build the network whose contraction equals the weighted model count."""
    occ = occurrence_indices(formula)
    tensors: list[Tensor] = []

    for var in formula.variables():
        w0, w1 = weights.pair(var)
        var_indices = tuple(
            occ[(var, c_ord)]
            for c_ord in range(len(formula.clauses))
            if (var, c_ord) in occ
        )
        tensors.append(copy_tensor(var_indices, w0, w1))

    for c_ord, clause in enumerate(formula.clauses):
        cl_indices = tuple(occ[(abs(lit), c_ord)] for lit in clause)
        tensors.append(clause_tensor(clause, cl_indices))

    if not tensors:
        return TensorNetwork((scalar(1.0),))  # empty formula over 0 vars
    return TensorNetwork(tuple(tensors))
