"""Exception hierarchy shared across the package."""


class CounterError(Exception):
    """Base class for all tensorcount errors."""


# --- CNF parsing / oracle ---

class MalformedHeader(CounterError):
    pass


class LiteralOutOfRange(CounterError):
    pass


class UnterminatedClause(CounterError):
    pass


class InvalidWeightLine(CounterError):
    pass


class TooManyVariables(CounterError):
    pass


# --- tensor kernel ---

class IndexMismatch(CounterError):
    pass


class BindingOutOfDomain(CounterError):
    pass


# --- networks and plans ---

class IndexOveruse(CounterError):
    pass


class PlanMismatch(CounterError):
    pass


# --- graph decompositions ---

class InvalidDecomposition(CounterError):
    pass


class MalformedPace(CounterError):
    pass


class AllPlannersFailed(CounterError):
    pass


class NoHostBag(CounterError):
    pass


# --- factoring ---

class NotFactorable(CounterError):
    pass


class TooManyFreeIndices(CounterError):
    pass


# --- slicing ---

class NotABondIndex(CounterError):
    pass


class NoCandidates(CounterError):
    pass


class BudgetInfeasible(CounterError):
    pass


# --- driver ---

class Timeout(CounterError):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats
