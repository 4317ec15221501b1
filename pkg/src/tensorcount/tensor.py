"""Dense tensors over named indices: contraction, addition, slicing.

Values are float64 numpy arrays in row-major layout; the first listed index
varies slowest. Tensors are treated as immutable values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import BindingOutOfDomain, IndexMismatch


@dataclass(frozen=True)
class Index:
    """A named axis with a finite domain. Equality and hashing are by id only."""

    id: object
    domain_size: int

    def __post_init__(self):
        if self.domain_size < 1:
            raise ValueError(f"index {self.id!r} has empty domain")

    def __eq__(self, other):
        return isinstance(other, Index) and self.id == other.id

    def __hash__(self):
        return hash(self.id)

    def sort_key(self):
        # total order for deterministic tie-breaking across mixed id types
        return (str(type(self.id).__name__), str(self.id))


class Assignment(dict):
    """Map from Index to a value inside its domain."""

    def __init__(self, bindings=()):
        super().__init__(bindings)
        for index, value in self.items():
            if not 0 <= value < index.domain_size:
                raise BindingOutOfDomain(f"{value} outside domain of {index.id!r}")


@dataclass(frozen=True, eq=False)
class Tensor:
    indices: tuple[Index, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        indices = tuple(self.indices)
        object.__setattr__(self, "indices", indices)
        if len(set(indices)) != len(indices):
            raise ValueError("duplicate index in tensor")
        shape = tuple(i.domain_size for i in indices)
        values = np.asarray(self.values, dtype=np.float64).reshape(shape)
        object.__setattr__(self, "values", values)

    @property
    def rank(self) -> int:
        return len(self.indices)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def index_set(self) -> frozenset[Index]:
        return frozenset(self.indices)

    def entry(self, assignment: Assignment) -> float:
        pos = tuple(assignment[i] for i in self.indices)
        return float(self.values[pos])

    def transposed(self, order: Iterable[Index]) -> "Tensor":
        """Same tensor with indices listed in the given order."""
        order = tuple(order)
        if set(order) != set(self.indices) or len(order) != len(self.indices):
            raise IndexMismatch("transpose order must be a permutation of the indices")
        perm = tuple(self.indices.index(i) for i in order)
        return Tensor(order, np.transpose(self.values, perm))

    def all_assignments(self):
        for combo in itertools.product(*(range(i.domain_size) for i in self.indices)):
            yield Assignment(zip(self.indices, combo))


def scalar(value: float) -> Tensor:
    return Tensor((), np.array(value, dtype=np.float64))


def contract_pair(a: Tensor, b: Tensor) -> Tensor:
    """Contract two tensors over their shared indices.

    Implemented as a transpose + matrix multiply + reshape, so the cost is
    the product of the domain sizes of the union of both index sets.
    """
    shared = [i for i in a.indices if i in b.index_set()]
    kept_a = [i for i in a.indices if i not in b.index_set()]
    kept_b = [i for i in b.indices if i not in a.index_set()]
    axes_a = [a.indices.index(i) for i in shared]
    axes_b = [b.indices.index(i) for i in shared]
    values = np.tensordot(a.values, b.values, axes=(axes_a, axes_b))
    return Tensor(tuple(kept_a + kept_b), values)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Entrywise sum; b is aligned to a's index order first."""
    if a.index_set() != b.index_set():
        raise IndexMismatch("tensor sum requires identical index sets")
    return Tensor(a.indices, a.values + b.transposed(a.indices).values)


def slice_tensor(a: Tensor, eta: Assignment) -> Tensor:
    """Fix the indices bound by eta; bindings for absent indices are ignored."""
    for index, value in eta.items():
        if not 0 <= value < index.domain_size:
            raise BindingOutOfDomain(f"{value} outside domain of {index.id!r}")
    selector = tuple(eta[i] if i in eta else slice(None) for i in a.indices)
    remaining = tuple(i for i in a.indices if i not in eta)
    return Tensor(remaining, a.values[selector])


def naive_contract(a: Tensor, b: Tensor) -> Tensor:
    """Sum-over-assignments evaluation of pairwise contraction (test oracle)."""
    shared = sorted(a.index_set() & b.index_set(), key=Index.sort_key)
    out_indices = tuple(i for i in a.indices if i not in b.index_set()) + tuple(
        i for i in b.indices if i not in a.index_set()
    )
    shape = tuple(i.domain_size for i in out_indices)
    values = np.zeros(shape)
    for combo in itertools.product(*(range(i.domain_size) for i in out_indices)):
        tau = dict(zip(out_indices, combo))
        total = 0.0
        for scombo in itertools.product(*(range(i.domain_size) for i in shared)):
            rho = dict(tau)
            rho.update(zip(shared, scombo))
            va = a.values[tuple(rho[i] for i in a.indices)]
            vb = b.values[tuple(rho[i] for i in b.indices)]
            total += float(va) * float(vb)
        values[combo] = total
    return Tensor(out_indices, values)


def tensors_close(a: Tensor, b: Tensor, rtol=1e-10, atol=0.0) -> bool:
    if a.index_set() != b.index_set():
        return False
    return np.allclose(a.values, b.transposed(a.indices).values, rtol=rtol, atol=atol)
