"""Weighted model counting via tensor-network contraction."""

from .driver import CountResult, bench_directory, count_file, count_formula, count_text
from .errors import CounterError
from .factoring import factor_branch
from .formula import CnfFormula, WeightFunction, parse_dimacs
from .network import ContractionTree, TensorNetwork, execute, structure_graph
from .reduction import reduce_formula
from .slicing import sliced_execute
from .tensor import Index, Tensor

__version__ = "1.0.0"

__all__ = [
    "CnfFormula",
    "ContractionTree",
    "CountResult",
    "CounterError",
    "Index",
    "Tensor",
    "TensorNetwork",
    "WeightFunction",
    "bench_directory",
    "count_file",
    "count_formula",
    "count_text",
    "execute",
    "factor_branch",
    "parse_dimacs",
    "reduce_formula",
    "sliced_execute",
    "structure_graph",
]
