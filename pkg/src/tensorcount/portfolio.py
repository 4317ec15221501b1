"""Anytime planners and the parallel portfolio stream.

A planner is an object with a ``name`` and a ``candidates(graph, seed,
should_stop)`` generator yielding ("tree"|"branch", decomposition) pairs
with escalating effort. The portfolio runs one worker per planner, validates
every candidate, and admits strictly width-improving ones into a single
monotone stream.
"""

from __future__ import annotations

import shlex
import signal
import subprocess
import threading
import time

from .decomposition import (
    BranchDecomposition,
    CarvingDecomposition,  # noqa: F401  (re-exported for adapters)
    DecompositionStream,
    StreamRecord,
    TreeDecomposition,
    caterpillar_branch_decomposition,
    min_degree_tree_decomposition,
    min_fill_tree_decomposition,
    validate_branch_decomposition,
    validate_tree_decomposition,
    width_branch,
    width_tree,
)
from .errors import AllPlannersFailed, MalformedPace
from .graphs import Graph
from .pace import emit_gr, parse_td, vertex_numbering


class HeuristicPlanner:
    """In-process elimination-order heuristic with seed-escalating restarts."""

    def __init__(self, name, builder, rounds=None):
        self.name = name
        self._builder = builder
        self._rounds = rounds

    def candidates(self, g: Graph, seed: int, should_stop):
        r = 0
        while self._rounds is None or r < self._rounds:
            if should_stop():
                return
            yield "tree", self._builder(g, seed + r)
            r += 1


class CaterpillarPlanner:
    """Validity fallback: one caterpillar branch decomposition."""

    name = "caterpillar"

    def candidates(self, g: Graph, seed: int, should_stop):
        if g.edges:
            yield "branch", caterpillar_branch_decomposition(g)


class ExternalPlanner:
    """Adapter for a PACE-speaking tree-decomposition solver process.

    Writes the .gr instance on the child's stdin, reads incremental .td
    solutions from its stdout, and interrupts the child at the deadline.
    """

    def __init__(self, command: str, name=None):
        self.command = command
        self.name = name or f"external:{command}"

    def candidates(self, g: Graph, seed: int, should_stop):
        numbering = vertex_numbering(g)
        back = {k: v for v, k in numbering.items()}
        proc = subprocess.Popen(
            shlex.split(self.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
        def watchdog():
            while proc.poll() is None:
                if should_stop():
                    proc.send_signal(signal.SIGTERM)
                    try:
                        proc.wait(timeout=2.0)
                    except subprocess.TimeoutExpired:
                        proc.kill()
                    return
                time.sleep(0.05)

        watcher = threading.Thread(target=watchdog, daemon=True)
        try:
            proc.stdin.write(emit_gr(g, numbering))
            proc.stdin.close()
            watcher.start()

            def to_decomposition(block):
                td = parse_td(block)
                return TreeDecomposition(
                    td.tree,
                    {n: frozenset(back[v] for v in bag) for n, bag in td.bags.items()},
                )

            block: list[str] = []
            emitted = 0
            while True:
                line = proc.stdout.readline()
                at_eof = line == ""
                if at_eof or (line.strip().startswith("s td") and block):
                    if block:
                        try:
                            decomposition = to_decomposition("\n".join(block) + "\n")
                            emitted += 1
                            yield "tree", decomposition
                        except MalformedPace:
                            pass
                        block = []
                    if at_eof:
                        break
                block.append(line)
            proc.wait()
            if emitted == 0 and proc.returncode not in (0, None, -signal.SIGTERM):
                raise RuntimeError(
                    f"external planner exited with code {proc.returncode}"
                )
        finally:
            if proc.poll() is None:
                proc.kill()
            proc.stdout.close()


def builtin_planner(spec: str):
    if spec == "minfill":
        return HeuristicPlanner("minfill", min_fill_tree_decomposition)
    if spec == "mindegree":
        return HeuristicPlanner("mindegree", min_degree_tree_decomposition)
    if spec == "caterpillar":
        return CaterpillarPlanner()
    if spec.startswith("external:"):
        return ExternalPlanner(spec.split(":", 1)[1])
    raise ValueError(f"unknown planner {spec!r}")


def _validated_width(kind, decomposition, g: Graph):
    if kind == "tree":
        validate_tree_decomposition(decomposition, g)
        return width_tree(decomposition)
    if kind == "branch":
        return width_branch(decomposition, g)
    raise ValueError(f"unknown decomposition kind {kind!r}")


def portfolio_plan(
    g: Graph,
    planners,
    deadline: float,
    seed: int = 0,
    on_record=None,
    stop_event: threading.Event | None = None,
) -> DecompositionStream:
    """Run the planners until the deadline, collating validated improving
    decompositions into one stream.

    With a single planner the run is inline and fully deterministic for a
    fixed seed; with several planners one worker thread per planner feeds
    the stream under a lock.
    """
    if not planners:
        raise AllPlannersFailed("no planners configured")
    stream = DecompositionStream()
    start = time.monotonic()
    lock = threading.Lock()
    errors: list[Exception] = []

    def should_stop():
        if stop_event is not None and stop_event.is_set():
            return True
        return time.monotonic() - start >= deadline

    def admit(kind, decomposition, planner_name):
        try:
            width = _validated_width(kind, decomposition, g)
        except Exception:
            return  # invalid candidates are dropped, never admitted
        record = StreamRecord(
            kind=kind,
            decomposition=decomposition,
            width=width,
            found_at=time.monotonic() - start,
            planner=planner_name,
        )
        with lock:
            if stream.offer(record) and on_record is not None:
                on_record(record)

    def run(planner):
        try:
            for kind, decomposition in planner.candidates(g, seed, should_stop):
                admit(kind, decomposition, planner.name)
                if should_stop():
                    break
        except Exception as exc:  # planner failure: record, others continue
            errors.append(exc)

    if len(planners) == 1:
        run(planners[0])
    else:
        threads = [threading.Thread(target=run, args=(p,), daemon=True) for p in planners]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=max(0.0, deadline - (time.monotonic() - start)) + 5.0)

    if not stream.records:
        raise AllPlannersFailed(
            f"no planner produced a valid decomposition ({len(errors)} failed)"
        )
    return stream
