import math

import pytest

from tensorcount.decomposition import (
    StreamRecord,
    caterpillar_branch_decomposition,
    min_fill_tree_decomposition,
    tree_to_branch,
)
from tensorcount.driver import (
    ALPHA_DEFAULTS,
    CountResult,
    bench_directory,
    count_file,
    count_formula,
    count_text,
    default_alpha,
    plan_contraction,
)
from tensorcount.errors import AllPlannersFailed, Timeout
from tensorcount.factoring import factor_branch_audit
from tensorcount.formula import brute_force_count, parse_dimacs
from tensorcount.network import structure_graph, time_cost
from tensorcount.reduction import reduce_formula

EXAMPLE4 = "p cnf 4 4\n1 2 -3 0\n1 3 4 0\n-2 -3 0\n-3 -4 0\n"


class FakeClock:
    def __init__(self):
        self.t = 0.0

    def __call__(self):
        return self.t


def example4_network():
    f, w = parse_dimacs(EXAMPLE4)
    return reduce_formula(f, w)


def scripted_records(n):
    """Worsening-to-improving decomposition sequence for the test network."""
    g = structure_graph(n)
    cat = caterpillar_branch_decomposition(g)
    tds = [min_fill_tree_decomposition(g, seed=s) for s in (0, 1)]
    records = [StreamRecord("branch", cat, 99, 0.0, "scripted")]
    for td in tds:
        records.append(StreamRecord("tree", td, 98, 0.0, "scripted"))
    return records


def plan_costs(n, records):
    g = structure_graph(n)
    costs = []
    for r in records:
        bd = r.decomposition if r.kind == "branch" else tree_to_branch(r.decomposition, g)
        res = factor_branch_audit(n, bd, g)
        costs.append(time_cost(res.network, res.tree))
    return costs


def expected_stop(costs, alpha):
    """Mirror of the planning guard: one virtual second per plan."""
    best = math.inf
    for k, cost in enumerate(costs, start=1):
        best = min(best, cost)
        if alpha * best < float(k):
            return k
    return len(costs)


class TestGuard:
    @pytest.mark.parametrize("alpha", [0.0, 1e-12, 1e-9, 1e9, 2.5])
    def test_scripted_planner_reproduces_stop_decision(self, alpha):
        n = example4_network()
        records = scripted_records(n)
        costs = plan_costs(n, records)
        clock = FakeClock()

        def source():
            for r in records:
                clock.t += 1.0
                yield r

        best, num_plans, _ = plan_contraction(
            n, alpha=alpha, clock=clock, plan_source=source()
        )
        assert num_plans == expected_stop(costs, alpha)
        assert best.cost == min(costs[:num_plans])

    def test_alpha_zero_stops_after_first_plan(self):
        n = example4_network()
        records = scripted_records(n)
        clock = FakeClock()

        def source():
            for r in records:
                clock.t += 1.0
                yield r

        _, num_plans, _ = plan_contraction(n, alpha=0.0, clock=clock, plan_source=source())
        assert num_plans == 1

    def test_empty_source_fails(self):
        with pytest.raises(AllPlannersFailed):
            plan_contraction(example4_network(), alpha=0.0, plan_source=[])

    def test_timeout_without_plan(self):
        clock = FakeClock()

        def source():
            while True:
                clock.t += 1.0
                yield None  # planner busy, never delivers

        with pytest.raises(Timeout) as err:
            plan_contraction(
                example4_network(), alpha=0.0, timeout=5.0, clock=clock, plan_source=source()
            )
        assert err.value.stats["num_plans"] == 0


class TestAlphaDefaults:
    def test_calibration_table(self):
        assert ALPHA_DEFAULTS == {
            "tamaki": 3.8e-11,
            "flowcutter": 4.8e-12,
            "htd": 1.6e-12,
            "hicks": 1e-21,
            "p3": 1.4e-11,
            "p4": 1.6e-11,
        }

    def test_lookup(self):
        assert default_alpha("portfolio") == 1.4e-11
        assert default_alpha("external:tamaki --seed 1") == 3.8e-11
        assert default_alpha("external:flow_cutter_pace17") == 4.8e-12
        assert default_alpha("minfill") == 3.8e-11


class TestCounting:
    def test_example4(self):
        result = count_text(EXAMPLE4, alpha=0.0)
        assert result.count == pytest.approx(7.0, abs=1e-12)
        assert isinstance(result, CountResult)
        assert result.plan_text.startswith("contract")

    def test_matches_brute_force_with_weights(self, rng):
        from tests.conftest import random_cnf, random_weights

        for trial in range(10):
            nv = rng.randint(2, 7)
            f = random_cnf(rng, nv, rng.randint(1, 10), clause_size=rng.randint(1, 3))
            w = random_weights(rng, nv)
            result = count_formula(f, w, alpha=0.0, seed=trial)
            assert result.count == pytest.approx(
                brute_force_count(f, w), rel=1e-9, abs=1e-12
            )

    def test_no_clauses(self):
        result = count_text("p cnf 3 0\n", alpha=0.0)
        assert result.count == 8.0
        assert result.planner == "direct"

    def test_empty_clause(self):
        result = count_text("p cnf 2 1\n0\n", alpha=0.0)
        assert result.count == 0.0

    def test_mem_budget_forces_slicing(self):
        free = count_text(EXAMPLE4, alpha=0.0)
        budget = max(64, free.mem_estimate - 8)
        result = count_text(EXAMPLE4, alpha=0.0, mem_budget=budget)
        assert result.num_slices > 1
        assert result.mem_estimate <= budget
        assert result.count == pytest.approx(7.0, abs=1e-9)

    def test_determinism_bitwise(self):
        a = count_text(EXAMPLE4, planner="minfill", alpha=0.0, seed=5)
        b = count_text(EXAMPLE4, planner="minfill", alpha=0.0, seed=5)
        assert a.count == b.count  # bitwise: same float
        assert a.plan_text == b.plan_text
        assert a.width == b.width and a.max_rank == b.max_rank

    def test_portfolio_runs(self):
        result = count_text(EXAMPLE4, planner="portfolio", timeout=5.0)
        assert result.count == pytest.approx(7.0, abs=1e-9)


class TestBench:
    def test_par2(self, tmp_path):
        (tmp_path / "a.cnf").write_text(EXAMPLE4)
        (tmp_path / "b.cnf").write_text("p cnf 2 1\n1 2 0\n")
        (tmp_path / "junk.cnf").write_text("not a cnf\n")
        report = bench_directory(tmp_path, timeout=30.0, alpha=0.0)
        by_name = {e.name: e for e in report.entries}
        assert by_name["a.cnf"].status == "ok"
        assert by_name["a.cnf"].count == pytest.approx(7.0, abs=1e-9)
        assert by_name["b.cnf"].count == pytest.approx(3.0, abs=1e-9)
        assert by_name["junk.cnf"].status == "error"
        solved = by_name["a.cnf"].seconds + by_name["b.cnf"].seconds
        assert report.par2 == pytest.approx(solved + 2 * 30.0)

    def test_count_file(self, tmp_path):
        path = tmp_path / "f.cnf"
        path.write_text(EXAMPLE4)
        assert count_file(path, alpha=0.0).count == pytest.approx(7.0, abs=1e-12)
