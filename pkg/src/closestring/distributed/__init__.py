"""Splitting searches into files and running them on a pool of workers."""

from .board import BoardState, BoundBoard
from .coordinator import FrontTracker, coordinate, dist_solve
from .queue import ResultRecord, WorkQueue, default_worker_name
from .subproblem import (Subproblem, SubproblemError, child_id, parse_subproblem,
                         root_subproblem, serialize_subproblem, split)
from .worker import RunConfig, WorkOutcome, process_claim, run_worker, worker_loop

__all__ = [
    "BoardState", "BoundBoard", "FrontTracker", "RunConfig", "ResultRecord", "Subproblem",
    "SubproblemError", "WorkOutcome", "WorkQueue", "child_id", "coordinate",
    "default_worker_name", "dist_solve", "parse_subproblem", "process_claim",
    "root_subproblem", "run_worker", "serialize_subproblem", "split", "worker_loop",
]
