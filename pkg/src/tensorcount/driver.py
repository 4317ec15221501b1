"""The counting pipeline: parse, reduce, plan anytime, factor, execute.

Planning is anytime: decompositions keep arriving (from heuristics or an
external solver) and each improving one is turned into a contraction plan.
Planning stops once ``alpha * predicted_contraction_seconds`` drops below
the time already spent — spending much longer planning than the best known
plan would take to run is wasted effort. ``alpha=0`` stops after the first
plan, which makes runs reproducible.
"""

from __future__ import annotations

import math
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .decomposition import DecompositionStream, StreamRecord, tree_to_branch
from .errors import AllPlannersFailed, Timeout
from .factoring import factor_branch_audit
from .formula import CnfFormula, WeightFunction, parse_dimacs
from .network import TensorNetwork, max_rank, serialize_plan, structure_graph, time_cost
from .portfolio import _validated_width, builtin_planner, portfolio_plan
from .reduction import reduce_formula
from .slicing import sliced_execute

# calibration constants: planning-time multiplier per decomposition source,
# measured on a single CPU core
ALPHA_DEFAULTS = {
    "tamaki": 3.8e-11,
    "flowcutter": 4.8e-12,
    "htd": 1.6e-12,
    "hicks": 1e-21,
    "p3": 1.4e-11,
    "p4": 1.6e-11,
}
SINGLE_PLANNER_ALPHA = 3.8e-11
PORTFOLIO_ALPHA = 1.4e-11
PORTFOLIO_MEMBERS = ("minfill", "mindegree", "caterpillar")


def default_alpha(planner_spec: str) -> float:
    if planner_spec == "portfolio":
        return PORTFOLIO_ALPHA
    name = planner_spec.split(":", 1)[-1] if ":" in planner_spec else planner_spec
    normalized = "".join(c for c in name.lower() if c.isalnum())
    for key, value in ALPHA_DEFAULTS.items():
        if key in normalized:
            return value
    return SINGLE_PLANNER_ALPHA


@dataclass
class CountResult:
    count: float
    elapsed: float
    planner: str
    kind: str
    width: int
    max_rank: int
    num_plans: int
    num_slices: int
    mem_estimate: int
    peak_observed: int
    sliced_indices: tuple = ()
    plan_text: str = field(default="", repr=False)


@dataclass
class _Planned:
    record: StreamRecord
    network: TensorNetwork
    tree: object
    cost: float


def _plan_from_record(n, g, record) -> _Planned:
    if record.kind == "tree":
        bd = tree_to_branch(record.decomposition, g)
    elif record.kind == "branch":
        bd = record.decomposition
    else:
        raise ValueError(f"unknown decomposition kind {record.kind!r}")
    result = factor_branch_audit(n, bd, g)
    return _Planned(record, result.network, result.tree,
                    time_cost(result.network, result.tree))


def _single_planner_source(planner, g, seed, should_stop):
    """Validated, strictly width-improving candidates from one planner.

    Yields None between candidates so the caller can evaluate its stopping
    rule even while no improvement arrives.
    """
    stream = DecompositionStream()
    for kind, decomposition in planner.candidates(g, seed, should_stop):
        record = None
        try:
            width = _validated_width(kind, decomposition, g)
        except Exception:
            width = None
        if width is not None:
            candidate = StreamRecord(kind=kind, decomposition=decomposition,
                                     width=width, found_at=0.0, planner=planner.name)
            if stream.offer(candidate):
                record = candidate
        yield record
        if should_stop():
            return


def _portfolio_source(planners, g, seed, deadline_from, stop_event):
    """Stream records from worker threads through a queue."""
    q: queue.Queue = queue.Queue()
    done = threading.Event()

    def run():
        try:
            portfolio_plan(g, planners, deadline=max(0.0, deadline_from()),
                           seed=seed, on_record=q.put, stop_event=stop_event)
        except AllPlannersFailed:
            pass
        finally:
            done.set()

    worker = threading.Thread(target=run, daemon=True)
    worker.start()
    while True:
        try:
            yield q.get(timeout=0.05)
        except queue.Empty:
            if stop_event.is_set() or (done.is_set() and q.empty()):
                return
            if deadline_from() <= 0:
                return
            yield None  # heartbeat: lets the caller apply its stopping rule


def plan_contraction(
    n: TensorNetwork,
    planner_spec: str = "minfill",
    alpha: float | None = None,
    timeout: float | None = None,
    seed: int = 0,
    jobs: int | None = None,
    clock=time.monotonic,
    plan_source=None,
):
    """Run the anytime planning loop and return (best plan, stats).

    ``plan_source`` overrides the planners with an explicit iterable of
    StreamRecords (used to replay planning traces deterministically).
    """
    if alpha is None:
        alpha = default_alpha(planner_spec)
    g = structure_graph(n)
    if not g.edges:
        result = factor_branch_audit(n, None, g)
        record = StreamRecord(kind="branch", decomposition=None, width=0,
                              found_at=0.0, planner="direct")
        planned = _Planned(record, result.network, result.tree,
                           time_cost(result.network, result.tree))
        return planned, 1, 0.0
    start = clock()
    budget = math.inf if timeout is None else timeout
    stop_event = threading.Event()

    def elapsed():
        return clock() - start

    def should_stop():
        return stop_event.is_set() or elapsed() >= budget

    if plan_source is not None:
        source = iter(plan_source)
    elif planner_spec == "portfolio":
        members = PORTFOLIO_MEMBERS
        if jobs is not None:
            members = members[: max(1, jobs)]
        planners = [builtin_planner(name) for name in members]
        source = _portfolio_source(planners, g, seed,
                                   lambda: budget - elapsed(), stop_event)
    else:
        source = _single_planner_source(builtin_planner(planner_spec), g, seed,
                                        should_stop)

    best: _Planned | None = None
    num_plans = 0
    try:
        for record in source:
            if record is not None:
                try:
                    planned = _plan_from_record(n, g, record)
                except Exception:
                    planned = None
                if planned is not None:
                    num_plans += 1
                    if best is None or planned.cost < best.cost:
                        best = planned
            if best is not None and alpha * best.cost < elapsed():
                break
            if elapsed() >= budget:
                break
    finally:
        stop_event.set()

    if best is None:
        stats = {"elapsed": elapsed(), "num_plans": 0, "planner": planner_spec}
        if elapsed() >= budget:
            raise Timeout(f"no contraction plan within {timeout}s", stats=stats)
        raise AllPlannersFailed("planning produced no usable decomposition")
    return best, num_plans, elapsed()


def count_formula(
    formula: CnfFormula,
    weights: WeightFunction,
    timeout: float | None = None,
    alpha: float | None = None,
    planner: str = "minfill",
    mem_budget: int | None = None,
    seed: int = 0,
    jobs: int | None = None,
    clock=time.monotonic,
    plan_source=None,
) -> CountResult:
    start = clock()
    n = reduce_formula(formula, weights)
    best, num_plans, _ = plan_contraction(
        n, planner_spec=planner, alpha=alpha, timeout=timeout,
        seed=seed, jobs=jobs, clock=clock, plan_source=plan_source,
    )
    execution = sliced_execute(best.network, best.tree, mem_budget=mem_budget)
    if execution.result.rank != 0:
        raise AllPlannersFailed("count network contracted to a non-scalar")
    return CountResult(
        count=float(execution.result.values),
        elapsed=clock() - start,
        planner=best.record.planner,
        kind=best.record.kind,
        width=best.record.width,
        max_rank=max_rank(best.network, best.tree),
        num_plans=num_plans,
        num_slices=execution.num_slices,
        mem_estimate=execution.mem_estimate,
        peak_observed=execution.peak_observed,
        sliced_indices=tuple(i.id for i in execution.sliced_indices),
        plan_text=serialize_plan(best.network, best.tree),
    )


def count_text(text, **kwargs) -> CountResult:
    formula, weights = parse_dimacs(text)
    return count_formula(formula, weights, **kwargs)


def count_file(path, **kwargs) -> CountResult:
    return count_text(Path(path).read_text(), **kwargs)


# --- benchmarking ------------------------------------------------------------


@dataclass
class BenchEntry:
    name: str
    status: str  # "ok" | "timeout" | "error"
    seconds: float
    count: float | None = None


@dataclass
class BenchReport:
    entries: list
    timeout: float

    @property
    def par2(self) -> float:
        """Sum of solved wall times plus twice the timeout per unsolved."""
        total = 0.0
        for e in self.entries:
            total += e.seconds if e.status == "ok" else 2.0 * self.timeout
        return total


def bench_directory(directory, timeout: float = 60.0, **kwargs) -> BenchReport:
    entries = []
    for path in sorted(Path(directory).glob("*.cnf")):
        start = time.monotonic()
        try:
            result = count_file(path, timeout=timeout, **kwargs)
            entries.append(BenchEntry(path.name, "ok",
                                      time.monotonic() - start, result.count))
        except Timeout:
            entries.append(BenchEntry(path.name, "timeout", time.monotonic() - start))
        except Exception:
            entries.append(BenchEntry(path.name, "error", time.monotonic() - start))
    return BenchReport(entries, timeout)
