import sys
import textwrap
import time

import pytest

from tensorcount.decomposition import (
    TreeDecomposition,
    validate_tree_decomposition,
    width_tree,
)
from tensorcount.errors import AllPlannersFailed
from tensorcount.graphs import Graph
from tensorcount.portfolio import (
    CaterpillarPlanner,
    ExternalPlanner,
    HeuristicPlanner,
    builtin_planner,
    portfolio_plan,
)
from tensorcount.decomposition import min_fill_tree_decomposition


def cycle(n):
    g = Graph(vertices=set(range(n)), edges={})
    for k in range(n):
        g.add_edge(("e", k), k, (k + 1) % n)
    return g


class TestBuiltinPlanners:
    def test_known_names(self):
        assert builtin_planner("minfill").name == "minfill"
        assert builtin_planner("mindegree").name == "mindegree"
        assert isinstance(builtin_planner("caterpillar"), CaterpillarPlanner)
        ext = builtin_planner("external:solver --flag")
        assert isinstance(ext, ExternalPlanner)
        assert ext.command == "solver --flag"

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            builtin_planner("quantum")

    def test_heuristic_escalates_seeds(self):
        seen = []

        def builder(g, seed):
            seen.append(seed)
            return min_fill_tree_decomposition(g, seed)

        planner = HeuristicPlanner("t", builder, rounds=4)
        list(planner.candidates(cycle(5), seed=10, should_stop=lambda: False))
        assert seen == [10, 11, 12, 13]

    def test_heuristic_respects_stop(self):
        planner = HeuristicPlanner("t", min_fill_tree_decomposition)
        stop_after = [3]

        def should_stop():
            stop_after[0] -= 1
            return stop_after[0] < 0

        got = list(planner.candidates(cycle(5), seed=0, should_stop=should_stop))
        assert len(got) == 3


class TestPortfolio:
    def test_single_planner_deterministic(self):
        g = cycle(7)
        planner = HeuristicPlanner("minfill", min_fill_tree_decomposition, rounds=5)
        a = portfolio_plan(g, [planner], deadline=5.0, seed=3)
        planner2 = HeuristicPlanner("minfill", min_fill_tree_decomposition, rounds=5)
        b = portfolio_plan(g, [planner2], deadline=5.0, seed=3)
        assert [r.width for r in a.records] == [r.width for r in b.records]
        assert a.best().width == b.best().width

    def test_stream_widths_strictly_decrease(self):
        g = cycle(9)
        planners = [
            HeuristicPlanner("minfill", min_fill_tree_decomposition, rounds=4),
            builtin_planner("caterpillar"),
        ]
        stream = portfolio_plan(g, planners, deadline=5.0, seed=0)
        widths = [r.width for r in stream.records]
        assert widths == sorted(widths, reverse=True)
        assert len(set(widths)) == len(widths)

    def test_invalid_candidates_dropped(self):
        g = cycle(5)

        class BrokenPlanner:
            name = "broken"

            def candidates(self, graph, seed, should_stop):
                # bags miss vertices: never validates
                import networkx as nx

                tree = nx.Graph()
                tree.add_node(0)
                yield "tree", TreeDecomposition(tree, {0: frozenset()})

        with pytest.raises(AllPlannersFailed):
            portfolio_plan(g, [BrokenPlanner()], deadline=2.0, seed=0)

    def test_failing_planner_does_not_sink_others(self):
        g = cycle(5)

        class CrashPlanner:
            name = "crash"

            def candidates(self, graph, seed, should_stop):
                raise RuntimeError("boom")
                yield  # pragma: no cover

        stream = portfolio_plan(
            g,
            [CrashPlanner(), HeuristicPlanner("minfill", min_fill_tree_decomposition, rounds=3)],
            deadline=5.0,
            seed=0,
        )
        assert stream.best().width == 2


SOLVER_OK = textwrap.dedent("""
    import sys
    lines = sys.stdin.read().splitlines()
    n = int(lines[0].split()[2])
    # first a sloppy solution, then an improvement, then a junk block
    print(f"s td 1 {n} {n}")
    print("b 1 " + " ".join(str(i) for i in range(1, n + 1)))
    sys.stdout.flush()
    print(f"s td 1 2 {n}")  # malformed: bag misses vertices, dropped on validation
    print("b 1 1 2")
    sys.stdout.flush()
""")

SOLVER_HANGS = textwrap.dedent("""
    import sys, time
    sys.stdin.read()
    time.sleep(60)
""")


class TestExternalPlanner:
    def test_reads_incremental_solutions(self, tmp_path):
        script = tmp_path / "solver.py"
        script.write_text(SOLVER_OK)
        planner = ExternalPlanner(f"{sys.executable} {script}")
        g = cycle(5)
        got = list(planner.candidates(g, seed=0, should_stop=lambda: False))
        assert len(got) == 2  # both blocks parse; validation happens upstream
        kind, td = got[0]
        assert kind == "tree"
        validate_tree_decomposition(td, g)
        assert width_tree(td) == 4  # one big bag

    def test_invalid_solution_filtered_by_portfolio(self, tmp_path):
        script = tmp_path / "solver.py"
        script.write_text(SOLVER_OK)
        g = cycle(5)
        stream = portfolio_plan(
            g, [ExternalPlanner(f"{sys.executable} {script}")], deadline=5.0, seed=0
        )
        assert [r.width for r in stream.records] == [4]

    def test_deadline_terminates_child(self, tmp_path):
        script = tmp_path / "solver.py"
        script.write_text(SOLVER_HANGS)
        planner = ExternalPlanner(f"{sys.executable} {script}")
        g = cycle(4)
        start = time.monotonic()
        deadline = start + 0.5
        got = list(
            planner.candidates(g, seed=0, should_stop=lambda: time.monotonic() > deadline)
        )
        assert got == []
        assert time.monotonic() - start < 10.0
