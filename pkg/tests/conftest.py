import random

import pytest

from tensorcount.formula import CnfFormula, WeightFunction


def random_cnf(rng, num_vars, num_clauses, clause_size=3):
    """Random k-CNF over exactly num_vars variables (k capped by num_vars)."""
    k = min(clause_size, num_vars)
    clauses = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(num_vars, tuple(clauses))


def random_weights(rng, num_vars, lo=0.0, hi=1.0):
    return WeightFunction(
        {v: (rng.uniform(lo, hi), rng.uniform(lo, hi)) for v in range(1, num_vars + 1)}
    )


@pytest.fixture
def rng():
    return random.Random(20240817)
