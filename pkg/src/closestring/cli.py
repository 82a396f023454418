"""Command line: ``closestring <subcommand> ...``.

Exit codes: 0 solved or completed, 1 unsatisfiable, 2 usage error,
3 resource limit hit, 4 bad input.

The primary output on stdout is deterministic for fixed flags and seeds.
Incumbent traces carry wall-clock times, so ``solve`` and ``coordinate``
write them to stderr (or ``--trace FILE``) as ``t_ms,d`` lines.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import bench
from .core import InstanceError
from .io import format_instance, generate_instance, parse_instance, write_bench_csv
from .solver import build_model, decide, enumerate_all, solve_min

EXIT_OK, EXIT_UNSAT, EXIT_USAGE, EXIT_LIMIT, EXIT_INPUT = 0, 1, 2, 3, 4
QUEUE_ENV = "CLOSESTRING_QUEUE"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _add_instance(p):
    p.add_argument("instance", help="instance file, or - for stdin")
    p.add_argument("--format", choices=("plain", "fasta"), default=None,
                   help="input format (default: guess from content)")


def _add_search(p):
    p.add_argument("--heuristic", choices=("pwm", "sdf"), default="pwm")
    p.add_argument("--tie-seed", type=int, default=None,
                   help="shuffle PWM ties with this seed (default: least index)")
    p.add_argument("--unrestricted", action="store_true",
                   help="search all symbols at every position")
    p.add_argument("--root-sac", action="store_true",
                   help="singleton consistency probe at the root")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None, help="seconds")


def _add_queue(p):
    p.add_argument("--queue", default=None,
                   help=f"queue directory (default: ${QUEUE_ENV}, else a temporary one)")
    p.add_argument("--t-max", type=float, default=60.0, help="seconds per work unit")
    p.add_argument("--k", type=int, default=2, help="split branching factor")
    p.add_argument("--unit-nodes", type=int, default=None,
                   help="node budget per work unit (deterministic alternative to --t-max)")
    p.add_argument("--checkpoint-nodes", type=int, default=10_000,
                   help="persist progress every this many nodes")
    p.add_argument("--poll-nodes", type=int, default=10_000,
                   help="re-read the bounds file every this many nodes")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="closestring", description="Exact closest string search.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="minimise the largest distance")
    _add_instance(p)
    _add_search(p)
    p.add_argument("--trace", default=None, help="write the t_ms,d trace here instead of stderr")

    p = sub.add_parser("decide", help="is there a string within distance d?")
    _add_instance(p)
    _add_search(p)
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("enumerate", help="all strings within distance d")
    _add_instance(p)
    _add_search(p)
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("gen", help="random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alphabet", default="ACGT")
    p.add_argument("--format", choices=("plain", "fasta"), default="plain")

    p = sub.add_parser("bench", help="PWM vs SDF grid, CSV on stdout")
    p.add_argument("--n", type=_int_list, default=list(bench.DEFAULT_NS))
    p.add_argument("--l", type=_int_list, default=list(bench.DEFAULT_LS))
    p.add_argument("--seeds", type=int, default=bench.DEFAULT_SEEDS)
    p.add_argument("--heuristics", default="pwm,sdf")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--no-timing", action="store_true", help="drop wall-clock columns")
    p.add_argument("--out", default=None, help="write the CSV here instead of stdout")

    p = sub.add_parser("coordinate", help="two-front distributed solve over a queue")
    _add_instance(p)
    _add_queue(p)
    p.add_argument("--heuristic", choices=("pwm", "sdf"), default="pwm")
    p.add_argument("--workers", type=int, default=1, help="worker threads started here")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--trace", default=None)

    p = sub.add_parser("worker", help="process subproblems from a queue")
    _add_queue(p)
    p.add_argument("--name", default=None)
    p.add_argument("--idle-exit", action="store_true", help="exit when the queue is empty")
    p.add_argument("--max-units", type=int, default=None)
    p.add_argument("--recover", action="store_true",
                   help="first re-enqueue claims held by dead workers on this host")
    return parser


def _read(args):
    text = sys.stdin.read() if args.instance == "-" else _slurp(args.instance)
    return parse_instance(text, args.format).to_stringset()


def _slurp(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _validate(args):
    for name in ("node_limit", "time_limit", "d", "seeds", "jobs", "max_units", "unit_nodes",
                 "checkpoint_nodes", "poll_nodes"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise UsageError(f"--{name.replace('_', '-')} must be >= 0")
    if getattr(args, "t_max", 0) < 0:
        raise UsageError("--t-max must be >= 0")
    if getattr(args, "k", 2) < 2:
        raise UsageError("--k must be >= 2")
    if args.command == "gen" and (args.n < 1 or args.l < 1):
        raise UsageError("--n and --l must be >= 1")
    if args.command == "bench":
        hs = args.heuristics.split(",")
        if not hs or any(h not in ("pwm", "sdf") for h in hs):
            raise UsageError("--heuristics takes pwm and/or sdf")
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")


def _limits(args):
    return {k: v for k, v in (("node_limit", args.node_limit),
                              ("time_limit", args.time_limit)) if v is not None}


def _domain_mode(args):
    return "unrestricted" if args.unrestricted else "restricted"


def _status_code(res):
    if res.status in ("timeout", "resource-limit", "cancelled"):
        return EXIT_LIMIT
    return EXIT_OK if res.status == "solved" else EXIT_UNSAT


def _emit_trace(args, res):
    lines = "".join(f"{t * 1000:.3f},{d}\n" for t, d in res.trace)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(lines)
    else:
        sys.stderr.write(lines)


def _print_solution(out, res):
    if res.best_d is not None:
        out.write(f"d={res.best_d}\nwitness={res.witnesses[0]}\n")
    out.write(f"status={res.status}\nnodes={res.nodes}\n")


def cmd_solve(args, out):
    strings = _read(args)
    model = build_model(strings, "optimize", args.heuristic, _domain_mode(args),
                        tie_seed=args.tie_seed, root_sac=args.root_sac)
    res = solve_min(model, _limits(args))
    _print_solution(out, res)
    _emit_trace(args, res)
    return _status_code(res)


def _fixed(args, mode):
    strings = _read(args)
    if args.d > strings.length:
        raise UsageError(f"--d {args.d} exceeds string length {strings.length}")
    return build_model(strings, mode, args.heuristic, _domain_mode(args), args.d,
                       args.tie_seed, args.root_sac)


def cmd_decide(args, out):
    res = decide(_fixed(args, "decide"), limits=_limits(args))
    if res.status == "solved":
        out.write(f"sat\nwitness={res.witnesses[0]}\n")
    elif res.status == "unsat":
        out.write("unsat\n")
    else:
        out.write(f"{res.status}\n")
    out.write(f"nodes={res.nodes}\n")
    return _status_code(res)


def cmd_enumerate(args, out):
    res = enumerate_all(_fixed(args, "enumerate"), limits=_limits(args))
    out.write(f"{res.solutions}\n")
    for w in res.witnesses:
        out.write(w + "\n")
    if res.status in ("solved", "unsat"):
        return EXIT_OK
    return EXIT_LIMIT


def cmd_gen(args, out):
    from .core import Alphabet
    doc = generate_instance(args.n, args.l, Alphabet(args.alphabet), args.seed)
    out.write(format_instance(doc, args.format))
    return EXIT_OK


def cmd_bench(args, out):
    rows = bench.bench_grid(args.n, args.l, args.seeds, tuple(args.heuristics.split(",")),
                            args.jobs, args.node_limit)
    text = write_bench_csv(rows, timing=not args.no_timing)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def _queue_dir(args):
    return args.queue or os.environ.get(QUEUE_ENV) or None


def _run_config(args, **kw):
    from .distributed import RunConfig
    return RunConfig(t_max=args.t_max, k=args.k, queue_dir=_queue_dir(args),
                     unit_nodes=args.unit_nodes, checkpoint_nodes=args.checkpoint_nodes or None,
                     poll_nodes=max(args.poll_nodes, 1), **kw)


def cmd_coordinate(args, out):
    from .distributed import coordinate
    strings = _read(args)
    cfg = _run_config(args, workers=args.workers, node_limit=args.node_limit,
                      time_limit=args.time_limit)
    res = coordinate(strings, cfg, heuristic=args.heuristic)
    out.write(f"d={res.best_d}\nwitness={res.witnesses[0]}\nstatus={res.status}\n")
    _emit_trace(args, res)
    return _status_code(res)


def cmd_worker(args, out):
    from .distributed import WorkQueue, worker_loop
    qdir = _queue_dir(args)
    if qdir is None:
        raise UsageError(f"worker needs --queue or ${QUEUE_ENV}")
    queue = WorkQueue(qdir)
    if args.recover:
        for path in queue.recover():
            logging.getLogger(__name__).info("re-enqueued %s", path.name)
    units = worker_loop(queue, _run_config(args), args.name, idle_exit=args.idle_exit,
                        max_units=args.max_units)
    out.write(f"units={units}\n")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "decide": cmd_decide,
    "enumerate": cmd_enumerate,
    "gen": cmd_gen,
    "bench": cmd_bench,
    "coordinate": cmd_coordinate,
    "worker": cmd_worker,
}


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = make_parser().parse_args(argv)
        _validate(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"closestring: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InstanceError) as exc:
        print(f"closestring: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli())
