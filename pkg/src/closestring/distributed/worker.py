"""Running one unit of work: resume, search for T_max, then finish or split."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, replace
from typing import Callable

from ..core import BoundInterval
from ..solver import Search, SolveResult
from .board import BoardState, BoundBoard
from .queue import ResultRecord, WorkQueue, default_worker_name
from .subproblem import Subproblem, SubproblemError, split

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    t_max: float = 60.0
    k: int = 2
    workers: int = 1
    queue_dir: str | os.PathLike | None = None
    node_limit: int | None = None
    time_limit: float | None = None
    # per-unit node budget; a deterministic stand-in for t_max in tests
    unit_nodes: int | None = None
    checkpoint_nodes: int | None = 10_000
    poll_nodes: int = 10_000
    idle_sleep: float = 0.005

    def __post_init__(self):
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        if self.k < 2:
            raise ValueError("branching factor k must be >= 2")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")


@dataclass
class WorkOutcome:
    result: SolveResult
    next: Subproblem | None = None  # the suspended remainder when the unit timed out


def _incumbent(sub: Subproblem, state: BoardState) -> int | None:
    if sub.mode == "optimize" and state.witness is not None:
        return state.d_high
    return None


def run_worker(sub: Subproblem, t_max: float | None, board: BoundBoard | None = None, *,
               node_limit: int | None = None, should_stop: Callable[[], bool] | None = None,
               checkpoint=None, checkpoint_every: int | None = None,
               poll_every: int = 10_000, min_nodes: int = 0) -> WorkOutcome:
    """Resume ``sub`` from its frontier and search for at most ``t_max`` seconds.

    Bounds are read from ``board`` on entry and every ``poll_every`` nodes.
    On timeout the returned ``next`` subproblem carries the advanced frontier,
    so a rerun never repeats explored nodes.
    """
    state = board.read() if board is not None else BoardState()
    if sub.mode == "decide" and state.d_high is not None and state.d_high <= sub.fixed_d \
            and state.witness is not None:
        return WorkOutcome(SolveResult(sub.mode, "cancelled"))
    try:
        search = Search(sub.to_model(), sub.frontier, incumbent=_incumbent(sub, state),
                        d_low=state.d_low)
    except ValueError as exc:
        raise SubproblemError(f"subproblem {sub.id}: {exc}") from exc

    def poll():
        if should_stop is not None and should_stop():
            return None, None, True
        if board is None:
            return None
        s = board.read()
        return s.d_low, s.d_high if s.witness is not None else None, False

    def on_solution(d, witness):
        if board is not None and sub.mode != "enumerate":
            board.post_high(d, witness)

    use_poll = board is not None or should_stop is not None
    res = search.run(node_limit=node_limit, time_limit=t_max,
                     poll=poll if use_poll else None, poll_every=poll_every,
                     checkpoint=checkpoint, checkpoint_every=checkpoint_every,
                     on_solution=on_solution, min_nodes=min_nodes)
    nxt = None
    if res.status in ("timeout", "resource-limit"):
        nxt = replace(sub, frontier=tuple(res.frontier), nodes=sub.nodes + res.nodes,
                      bounds=_tightened(sub.bounds, board.read() if board else state))
    return WorkOutcome(res, nxt)


def _tightened(bounds: BoundInterval, state: BoardState) -> BoundInterval:
    low, high = bounds.d_low, bounds.d_high
    if state.d_low is not None:
        low = max(low, state.d_low)
    if state.d_high is not None and state.witness is not None:
        high = min(high, state.d_high)
    return BoundInterval(min(low, high), high)


def split_and_finish(queue: WorkQueue, claim, sub: Subproblem, k: int) -> list[Subproblem]:
    """Enqueue the children of a split-pending claim and close it out.

    Deterministic in the claim's contents, so a rerun after a crash enqueues
    the same child ids, which the queue ignores the second time.
    """
    state = queue.board.read()
    children = split(sub, k, incumbent=_incumbent(sub, state))
    for child in children:
        queue.enqueue(child)
    queue.write_result(sub, ResultRecord(sub.id, sub.segment, "split", sub.mode, sub.fixed_d,
                                         children=[c.id for c in children]))
    queue.complete(claim)
    return children


def process_claim(queue: WorkQueue, claim, cfg: RunConfig,
                  should_stop: Callable[[], bool] | None = None) -> WorkOutcome | None:
    sub = queue.load(claim)
    if sub.split_pending:
        split_and_finish(queue, claim, sub, cfg.k)
        return None

    mode = sub.mode
    progress = {"seg": sub.segment, "nodes": 0, "emitted": 0}

    def checkpoint(frontier, witnesses, nodes):
        # results before the frontier moves: a crash in between only repeats work
        queue.write_result(sub, ResultRecord(sub.id, progress["seg"], "partial", mode,
                                             sub.fixed_d, nodes=nodes - progress["nodes"],
                                             witnesses=witnesses))
        progress["seg"] += 1
        progress["nodes"] = nodes
        progress["emitted"] += len(witnesses)
        queue.checkpoint(claim, replace(sub, frontier=tuple(frontier),
                                        nodes=sub.nodes + nodes, segment=progress["seg"]))

    out = run_worker(sub, cfg.t_max, queue.board, node_limit=cfg.unit_nodes,
                     should_stop=should_stop, checkpoint=checkpoint,
                     checkpoint_every=cfg.checkpoint_nodes, poll_every=cfg.poll_nodes,
                     min_nodes=1)  # every unit makes progress, even with t_max=0
    res = out.result
    rest = res.witnesses if mode == "optimize" else res.witnesses[progress["emitted"]:]
    record = ResultRecord(sub.id, progress["seg"], "partial", mode, sub.fixed_d,
                          best_d=res.best_d, nodes=res.nodes - progress["nodes"],
                          witnesses=rest)
    if res.status == "cancelled" and res.frontier is not None and should_stop is not None \
            and should_stop():
        # halted, not pruned: keep the work for a later resume
        queue.write_result(sub, record)
        queue.checkpoint(claim, replace(sub, frontier=tuple(res.frontier),
                                        nodes=sub.nodes + res.nodes,
                                        segment=progress["seg"] + 1))
        queue.release(claim)
    elif out.next is not None:
        queue.write_result(sub, record)
        pending = replace(out.next, segment=progress["seg"] + 1, split_pending=True)
        queue.checkpoint(claim, pending)
        split_and_finish(queue, claim, pending, cfg.k)
    else:
        record.status = res.status
        queue.write_result(sub, record)
        queue.complete(claim)
    return out


def worker_loop(queue: WorkQueue, cfg: RunConfig, name: str | None = None,
                should_stop: Callable[[], bool] | None = None, idle_exit: bool = False,
                max_units: int | None = None) -> int:
    """Claim and process subproblems until stopped; returns the units processed."""
    name = name or default_worker_name()

    def stop():
        return queue.stopped() or (should_stop is not None and should_stop())

    units = 0
    while not stop():
        claim = queue.claim(name)
        if claim is None:
            if idle_exit:
                break
            time.sleep(cfg.idle_sleep)
            continue
        try:
            process_claim(queue, claim, cfg, stop)
        except SubproblemError as exc:
            log.error("rejecting %s: %s", claim.name, exc)
            rejected = queue.root / "rejected"
            rejected.mkdir(exist_ok=True)
            os.replace(claim, rejected / claim.name)
        units += 1
        if max_units is not None and units >= max_units:
            break
    return units
