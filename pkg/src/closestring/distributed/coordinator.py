"""Driving a run over the queue.

:func:`dist_solve` is the generic timeout/split/requeue loop for one
subproblem. :func:`coordinate` solves an instance from two sides at once:
an optimisation front that keeps lowering the best distance found, and one
fixed-distance front per candidate distance below it that tries to rule
that distance out. The run ends once the two meet.
"""

from __future__ import annotations

import tempfile
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field

from ..core import StringSet, max_distance
from ..solver import SolveResult
from .queue import ResultRecord, WorkQueue, default_worker_name
from .subproblem import Subproblem, root_subproblem, split
from .worker import RunConfig, run_worker, worker_loop


def front_key(mode: str, fixed_d: int | None):
    return ("high", None) if mode == "optimize" else (mode, fixed_d)


@dataclass
class FrontTracker:
    """Which subproblems of each front are still open, fed from result files."""

    outstanding: dict = field(default_factory=lambda: defaultdict(set))
    finished: set = field(default_factory=set)
    solved: dict = field(default_factory=lambda: defaultdict(list))
    witnesses: list = field(default_factory=list)
    best: tuple | None = None
    nodes: int = 0
    records: int = 0

    def add(self, key, sub_id: str) -> None:
        if sub_id not in self.finished:
            self.outstanding[key].add(sub_id)

    def feed(self, rec: ResultRecord) -> None:
        key = front_key(rec.mode, rec.fixed_d)
        self.records += 1
        self.nodes += rec.nodes
        if rec.mode == "enumerate":
            self.witnesses.extend(rec.witnesses)
        elif rec.witnesses and rec.best_d is not None:
            if self.best is None or rec.best_d < self.best[0]:
                self.best = (rec.best_d, rec.witnesses[0])
        if rec.mode == "decide" and rec.status == "solved":
            self.solved[key].append(rec.id)
        if rec.final:
            self.finished.add(rec.id)
            self.outstanding[key].discard(rec.id)
            for child in rec.children:
                self.add(key, child)

    def open(self, key) -> bool:
        return bool(self.outstanding.get(key))

    def any_open(self) -> bool:
        return any(self.outstanding.values())


class _Pool:
    """Worker threads over one queue (the in-process stand-in for worker nodes)."""

    def __init__(self, queue: WorkQueue, cfg: RunConfig):
        self.stop = threading.Event()
        self.threads = [
            threading.Thread(target=worker_loop, daemon=True,
                             args=(queue, cfg, f"{default_worker_name()}.{i}", self.stop.is_set))
            for i in range(cfg.workers)
        ]
        for t in self.threads:
            t.start()

    def close(self) -> None:
        self.stop.set()
        for t in self.threads:
            t.join()


def _queue_for(cfg: RunConfig):
    if cfg.queue_dir is not None:
        return WorkQueue(cfg.queue_dir), None
    tmp = tempfile.TemporaryDirectory(prefix="closestring-queue-")
    return WorkQueue(tmp.name), tmp


def _check_rejected(queue: WorkQueue) -> None:
    rejected = queue.root / "rejected"
    if rejected.exists() and any(rejected.iterdir()):
        names = ", ".join(p.name for p in rejected.iterdir())
        raise RuntimeError(f"workers rejected corrupt subproblems: {names}")


def dist_solve(sub: Subproblem, cfg: RunConfig, queue: WorkQueue | None = None) -> SolveResult:
    """Run ``sub`` through the queue until it is solved or its space is exhausted.

    Every unit runs for at most ``cfg.t_max`` seconds (or ``cfg.unit_nodes``
    nodes) and is split ``cfg.k`` ways when it runs out. Enumerate mode
    collects every solution found by every piece.
    """
    tmp = None
    if queue is None:
        queue, tmp = _queue_for(cfg)
    queue.clear_stop()
    t0 = time.monotonic()
    tracker = FrontTracker()
    key = front_key(sub.mode, sub.fixed_d)
    queue.enqueue(sub)
    tracker.add(key, sub.id)
    seen: set = set()
    pool = _Pool(queue, cfg)
    status = None
    try:
        while True:
            for rec in queue.read_results(seen):
                tracker.feed(rec)
            _check_rejected(queue)
            if sub.mode == "decide" and tracker.solved[key]:
                status = "solved"
                break
            if not tracker.open(key):
                break
            if cfg.time_limit is not None and time.monotonic() - t0 > cfg.time_limit:
                status = "timeout"
                break
            if cfg.node_limit is not None and tracker.nodes >= cfg.node_limit:
                status = "resource-limit"
                break
            if cfg.workers == 0:
                # no helpers: do the work in this thread
                if not worker_loop(queue, cfg, default_worker_name(), idle_exit=True,
                                   max_units=1):
                    time.sleep(cfg.idle_sleep)
            else:
                time.sleep(cfg.idle_sleep)
    finally:
        queue.request_stop()
        pool.close()
    for rec in queue.read_results(seen):
        tracker.feed(rec)

    res = SolveResult(sub.mode, status or "unsat", nodes=tracker.nodes,
                      wall_time=time.monotonic() - t0)
    if sub.mode == "enumerate":
        res.witnesses = list(tracker.witnesses)
        res.solutions = len(res.witnesses)
        if status is None:
            res.status = "solved" if res.witnesses else "unsat"
        res.best_d = sub.fixed_d if res.witnesses else None
    elif tracker.best is not None:
        res.best_d, w = tracker.best
        res.witnesses = [w]
        res.solutions = 1
        if status is None:
            res.status = "solved"
    if tmp is not None:
        tmp.cleanup()
    return res


def coordinate(strings: StringSet, cfg: RunConfig, heuristic: str = "pwm",
               domain_mode: str = "restricted", tie_seed: int | None = None,
               queue: WorkQueue | None = None) -> SolveResult:
    """Find the closest-string distance with a high front and low fronts in parallel."""
    tmp = None
    if queue is None:
        queue, tmp = _queue_for(cfg)
    queue.clear_stop()
    board = queue.board
    t0 = time.monotonic()
    try:
        return _coordinate(strings, cfg, heuristic, domain_mode, tie_seed, queue, board, t0)
    finally:
        if tmp is not None:
            tmp.cleanup()


def _coordinate(strings, cfg, heuristic, domain_mode, tie_seed, queue, board, t0):
    root = root_subproblem(strings, "optimize", heuristic=heuristic,
                           domain_mode=domain_mode, tie_seed=tie_seed, id="high")
    board.post_low(root.bounds.d_low)

    # seed phase: plain optimisation in one process for t_max
    seed = run_worker(root, cfg.t_max, board, node_limit=cfg.unit_nodes,
                      poll_every=cfg.poll_nodes)
    if seed.result.finished:
        seed.result.wall_time = time.monotonic() - t0
        return seed.result

    state = board.read()
    if state.witness is None:
        # any input string is within the diameter of all the others
        dists = [max_distance(row, strings) for row in strings.codes]
        best = min(range(strings.n), key=dists.__getitem__)
        board.post_high(dists[best], strings.alphabet.decode(strings.codes[best]))
        state = board.read()
    if state.closed:
        return _final(board, strings, seed.result.nodes, t0, "solved")

    tracker = FrontTracker()
    high_key = front_key("optimize", None)
    for child in split(seed.next, cfg.k, incumbent=state.d_high):
        queue.enqueue(child)
        tracker.add(high_key, child.id)
    spawned = []
    for d in range(state.d_low, state.d_high):
        sub = root_subproblem(strings, "decide", d, heuristic, domain_mode, tie_seed,
                              id=f"low{d}")
        queue.enqueue(sub)
        tracker.add(front_key("decide", d), sub.id)
        spawned.append(d)

    seen: set = set()
    pool = _Pool(queue, cfg)
    status = "solved"
    try:
        while True:
            for rec in queue.read_results(seen):
                tracker.feed(rec)
            _check_rejected(queue)
            state = board.read()
            # contiguous refutations from the bottom raise the lower bound
            low = state.d_low
            while low in spawned and low < state.d_high \
                    and not tracker.open(front_key("decide", low)) \
                    and not tracker.solved[front_key("decide", low)]:
                low += 1
            if low > state.d_low:
                board.post_low(low)
                state = board.read()
            if state.closed:
                break
            if not tracker.open(high_key):
                # the optimisation front ran dry: nothing beats the incumbent
                board.post_low(state.d_high)
                break
            if not tracker.any_open():
                break
            if cfg.time_limit is not None and time.monotonic() - t0 > cfg.time_limit:
                status = "timeout"
                break
            if cfg.node_limit is not None and seed.result.nodes + tracker.nodes >= cfg.node_limit:
                status = "resource-limit"
                break
            if cfg.workers == 0:
                if not worker_loop(queue, cfg, default_worker_name(), idle_exit=True,
                                   max_units=1):
                    time.sleep(cfg.idle_sleep)
            else:
                time.sleep(cfg.idle_sleep)
    finally:
        queue.request_stop()
        pool.close()
    for rec in queue.read_results(seen):
        tracker.feed(rec)
    return _final(board, strings, seed.result.nodes + tracker.nodes, t0, status)


def _final(board, strings, nodes, t0, status) -> SolveResult:
    state = board.read()
    trace = []
    start = None
    for kind, d, _, stamp in board.entries():
        if kind == "HIGH":
            start = stamp if start is None else start
            if not trace or d < trace[-1][1]:
                trace.append((stamp - start, d))
    return SolveResult("optimize", status, best_d=state.d_high, witnesses=[state.witness],
                       nodes=nodes, solutions=1, wall_time=time.monotonic() - t0, trace=trace)
