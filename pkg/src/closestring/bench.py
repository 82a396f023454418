"""Benchmark grid: PWM against SDF ordering on random instances.

Every search yields two rows. ``opt`` stops the clock at the last incumbent
(time to optimal), ``cert`` at the end of the search, once optimality is
proven (time including the certificate).
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor

from .io import BenchRow, random_stringset
from .solver import build_model, solve_min

DEFAULT_NS = (3, 4, 5, 6)
DEFAULT_LS = (10, 15)
DEFAULT_SEEDS = 10


def instance_id(n: int, length: int, seed: int) -> str:
    return f"n{n}-l{length}-s{seed}"


def bench_instance(n: int, length: int, seed: int, heuristic: str,
                   node_limit: int | None = None) -> list[BenchRow]:
    strings = random_stringset(n, length, seed=seed)
    res = solve_min(build_model(strings, "optimize", heuristic),
                    {"node_limit": node_limit} if node_limit else None)
    times = [t for t, _ in res.trace]
    iid = instance_id(n, length, seed)
    opt_nodes = res.trace_nodes[-1] if res.trace_nodes else res.nodes
    opt = BenchRow(iid, n, length, seed, heuristic, "opt", res.best_d, max(opt_nodes, 1),
                   times[-1] if times else res.wall_time, times)
    cert = BenchRow(iid, n, length, seed, heuristic, "cert",
                    res.best_d if res.finished else None, max(res.nodes, 1),
                    res.wall_time, times)
    return [opt, cert]


def _job(args):
    return bench_instance(*args)


def bench_grid(ns=DEFAULT_NS, lengths=DEFAULT_LS, seeds=DEFAULT_SEEDS,
               heuristics=("pwm", "sdf"), jobs: int = 1,
               node_limit: int | None = None) -> list[BenchRow]:
    """Rows for every (n, length, seed, heuristic), in that nesting order.

    ``seeds`` is a count (seeds 0..seeds-1) or an explicit iterable.
    """
    seed_list = range(seeds) if isinstance(seeds, int) else list(seeds)
    tasks = [(n, length, s, h, node_limit)
             for n, length, s, h in itertools.product(ns, lengths, seed_list, heuristics)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_job, tasks))
    else:
        parts = [_job(t) for t in tasks]
    return [row for part in parts for row in part]
