"""Command-line client for the counter.

Runs locally by default; with --server it posts the instance to a running
service instead. Exit codes: 0 success, 10 timeout, 20 memory budget
infeasible, 2 malformed input.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .driver import bench_directory, count_text
from .errors import BudgetInfeasible, CounterError, Timeout

EXIT_OK = 0
EXIT_TIMEOUT = 10
EXIT_INFEASIBLE = 20
EXIT_INPUT = 2


@click.group()
def main():
    """Weighted model counting via tensor-network contraction."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--timeout", type=float, default=None, help="Wall-clock limit in seconds.")
@click.option("--alpha", type=float, default=None,
              help="Planning-vs-execution tradeoff; 0 stops after the first plan.")
@click.option("--planner", default="minfill", show_default=True,
              help="minfill | mindegree | portfolio | external:<cmd>")
@click.option("--mem-budget", type=int, default=None, help="Peak memory budget in bytes.")
@click.option("--jobs", type=int, default=None, help="Max concurrent planner workers.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--plan-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write the chosen contraction plan to this file.")
@click.option("--server", default=None, help="Base URL of a counting service to use.")
def count(file, timeout, alpha, planner, mem_budget, jobs, seed, plan_out, server):
    """Count the weighted models of a DIMACS CNF file."""
    try:
        text = file.read_text()
    except OSError as exc:
        click.echo(f"c error reading {file}: {exc}", err=True)
        sys.exit(EXIT_INPUT)

    if server is not None:
        _remote_count(server, text, timeout, alpha, planner, mem_budget, seed, plan_out)
        return

    try:
        result = count_text(
            text, timeout=timeout, alpha=alpha, planner=planner,
            mem_budget=mem_budget, jobs=jobs, seed=seed,
        )
    except Timeout as exc:
        click.echo(f"c timeout: {exc}", err=True)
        sys.exit(EXIT_TIMEOUT)
    except BudgetInfeasible as exc:
        click.echo(f"c infeasible memory budget: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    except (CounterError, ValueError) as exc:
        click.echo(f"c input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)

    if plan_out is not None:
        plan_out.write_text(result.plan_text)
    _report(result.count, result.planner, result.width, result.max_rank,
            result.num_slices, result.elapsed)


def _report(value, planner, width, rank, slices, elapsed):
    click.echo(f"c planner {planner}")
    click.echo(f"c width {width}")
    click.echo(f"c max-rank {rank}")
    click.echo(f"c slices {slices}")
    click.echo(f"c seconds {elapsed:.3f}")
    click.echo(f"s wmc {value!r}")


def _remote_count(server, text, timeout, alpha, planner, mem_budget, seed, plan_out):
    import httpx

    payload = {
        "dimacs": text, "timeout": timeout, "alpha": alpha,
        "planner": planner, "mem_budget": mem_budget, "seed": seed,
    }
    try:
        response = httpx.post(f"{server.rstrip('/')}/count", json=payload, timeout=None)
    except httpx.HTTPError as exc:
        click.echo(f"c server error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    if response.status_code == 504:
        click.echo("c timeout (server)", err=True)
        sys.exit(EXIT_TIMEOUT)
    if response.status_code == 507:
        click.echo("c infeasible memory budget (server)", err=True)
        sys.exit(EXIT_INFEASIBLE)
    if response.status_code != 200:
        click.echo(f"c input error: {response.text}", err=True)
        sys.exit(EXIT_INPUT)
    body = response.json()
    if plan_out is not None:
        Path(plan_out).write_text(body["plan"])
    _report(body["count"], body["planner"], body["width"], body["max_rank"],
            body["num_slices"], body["elapsed"])


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--timeout", type=float, default=60.0, show_default=True)
@click.option("--planner", default="minfill", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def bench(directory, timeout, planner, seed):
    """Count every .cnf in a directory and report a PAR-2 score."""
    report = bench_directory(directory, timeout=timeout, planner=planner, seed=seed)
    for entry in report.entries:
        if entry.status == "ok":
            click.echo(f"c {entry.name} ok {entry.seconds:.3f}s count {entry.count!r}")
        else:
            click.echo(f"c {entry.name} {entry.status} {entry.seconds:.3f}s")
    click.echo(f"s par2 {report.par2:.3f}")


if __name__ == "__main__":
    main()
