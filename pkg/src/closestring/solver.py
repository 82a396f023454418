"""Backtracking search for closest strings.

The constraint model keeps one search variable per string position. The
per-string mismatch indicators and their row sums are not materialised:
each string carries a lower bound on its final distance (positions whose
symbol is no longer in the domain), which is all the sum/max constraints
need. Propagation is forward checking on those sums: once a string has no
slack left, every open position is forced to that string's symbol.

Domains are bitmasks internally (bit ``c - 1`` set means code ``c`` allowed).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    BoundInterval,
    PWM,
    StringSet,
    build_pwm,
    distance_lower_bound,
    hamming_diameter,
    position_domains,
    pwm_value_order,
    pwm_variable_order,
)

MODES = ("optimize", "decide", "enumerate")
HEURISTICS = ("pwm", "sdf")
DOMAIN_MODES = ("restricted", "unrestricted")


class Unsatisfiable(Exception):
    """Root consistency emptied a domain: nothing exists at the current cap."""


@dataclass(frozen=True)
class FrontierStep:
    """One assigned depth of a suspended search.

    ``value`` is in progress for every step but the last; for the last step
    it is the next value to try, with its whole subtree still unexplored.
    """

    pos: int
    value: int
    exhausted: frozenset[int] = frozenset()


@dataclass(frozen=True)
class Model:
    strings: StringSet
    domains: tuple[frozenset[int], ...]
    bounds: BoundInterval
    mode: str = "optimize"
    d: int | None = None
    heuristic: str = "pwm"
    tie_seed: int | None = None
    domain_mode: str = "restricted"
    root_sac: bool = False
    pair_bound: bool = False

    @property
    def cap(self) -> int:
        """Largest distance a solution may have at the start of search."""
        return self.bounds.d_high if self.mode == "optimize" else self.d


@dataclass
class SolveResult:
    mode: str
    status: str  # solved | unsat | timeout | resource-limit | cancelled
    best_d: int | None = None
    witnesses: list[str] = field(default_factory=list)
    nodes: int = 0
    solutions: int = 0
    wall_time: float = 0.0
    trace: list[tuple[float, int]] = field(default_factory=list)
    trace_nodes: list[int] = field(default_factory=list)
    frontier: list[FrontierStep] | None = None

    @property
    def finished(self) -> bool:
        return self.status in ("solved", "unsat")


@dataclass
class SearchState:
    """Inspectable snapshot of a partial assignment and its mismatch accounting."""

    domains: list[frozenset[int]]
    assignment: list[int | None]
    mismatches: list[int]
    forced_mismatches: list[int]
    order: list[int] = field(default_factory=list)
    exhausted: list[frozenset[int]] = field(default_factory=list)
    nodes: int = 0

    @property
    def depth(self) -> int:
        return sum(v is not None for v in self.assignment)

    @classmethod
    def initial(cls, model: Model) -> "SearchState":
        n, length = model.strings.n, model.strings.length
        return cls(
            domains=list(model.domains),
            assignment=[None] * length,
            mismatches=[0] * n,
            forced_mismatches=[0] * n,
        )


def build_model(
    strings: StringSet,
    mode: str = "optimize",
    heuristic: str = "pwm",
    domain_mode: str = "restricted",
    d: int | None = None,
    tie_seed: int | None = None,
    root_sac: bool = False,
    pair_bound: bool = False,
) -> Model:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    if domain_mode not in DOMAIN_MODES:
        raise ValueError(f"unknown domain mode {domain_mode!r}")
    length = strings.length
    if mode == "optimize":
        d = None
    elif d is None or not 0 <= d <= length:
        raise ValueError(f"{mode} needs a fixed distance in [0, {length}], got {d}")
    if domain_mode == "restricted":
        domains = tuple(position_domains(strings))
    else:
        full = frozenset(strings.alphabet.codes)
        domains = (full,) * length
    bounds = BoundInterval(distance_lower_bound(strings), hamming_diameter(strings))
    return Model(strings, domains, bounds, mode, d, heuristic, tie_seed,
                 domain_mode, root_sac, pair_bound)


def _mask(values: Iterable[int]) -> int:
    m = 0
    for c in values:
        m |= 1 << (c - 1)
    return m


def _unmask(mask: int) -> frozenset[int]:
    out = []
    c = 1
    while mask:
        if mask & 1:
            out.append(c)
        mask >>= 1
        c += 1
    return frozenset(out)


class _Propagator:
    """Mismatch-sum propagation over bitmask domains; shared by all entry points."""

    def __init__(self, strings: StringSet, pair_bound: bool = False):
        codes = strings.codes.tolist()
        self.n = len(codes)
        self.length = len(codes[0])
        self.sbits = [[1 << (c - 1) for c in row] for row in codes]
        # column view: for each position, (string index, bit) pairs
        self.cols = [[(i, self.sbits[i][j]) for i in range(self.n)] for j in range(self.length)]
        self.pairs = []
        if pair_bound:
            for i in range(self.n):
                for k in range(i + 1, self.n):
                    diff = [j for j in range(self.length) if codes[i][j] != codes[k][j]]
                    both = [self.sbits[i][j] | self.sbits[k][j] for j in diff]
                    self.pairs.append((i, k, diff, both))

    def lower_bounds(self, dom: list[int]) -> list[int]:
        return [sum(1 for j, b in enumerate(row) if not dom[j] & b) for row in self.sbits]

    def fixpoint(self, dom: list[int], lb: list[int], cap: int,
                 changed: list[tuple[int, int]], tight: list[int]) -> bool:
        """Run to fixpoint from pending domain changes and newly tight strings.

        ``dom`` and ``lb`` are mutated. Returns False when some string's
        distance is forced above ``cap``.
        """
        sbits, cols = self.sbits, self.cols
        while changed or tight:
            while changed:
                j, old = changed.pop()
                lost = old & ~dom[j]
                for i, b in cols[j]:
                    if lost & b:
                        lb[i] += 1
                        if lb[i] > cap:
                            return False
                        if lb[i] == cap:
                            tight.append(i)
            if tight:
                row = sbits[tight.pop()]
                for j in range(self.length):
                    b = row[j]
                    d = dom[j]
                    if d & b and d != b:
                        dom[j] = b
                        changed.append((j, d))
        for i, k, diff, both in self.pairs:
            slack = 2 * cap - lb[i] - lb[k]
            if slack >= len(diff):
                continue
            open_diff = 0
            for j, bb in zip(diff, both):
                if dom[j] & bb == bb:
                    open_diff += 1
            if open_diff > slack:
                return False
        return True

    def root(self, dom: list[int], cap: int) -> list[int] | None:
        lb = self.lower_bounds(dom)
        if any(x > cap for x in lb):
            return None
        tight = [i for i, x in enumerate(lb) if x == cap]
        return lb if self.fixpoint(dom, lb, cap, [], tight) else None

    def assign(self, dom: list[int], lb: list[int], pos: int, bit: int,
               cap: int, rescan: bool) -> bool:
        old = dom[pos]
        dom[pos] = bit
        tight = []
        if rescan:
            for i, x in enumerate(lb):
                if x > cap:
                    return False
                if x == cap:
                    tight.append(i)
        return self.fixpoint(dom, lb, cap, [(pos, old)] if old != bit else [], tight)


def propagate(strings: StringSet, state: SearchState, cap: int,
              pair_bound: bool = False) -> bool:
    """Propagate ``state`` at distance cap ``cap``; returns False on failure.

    On success the state's domains are narrowed in place and its per-string
    committed and forced mismatch counts refreshed.
    """
    prop = _Propagator(strings, pair_bound)
    dom = []
    for j, (d, v) in enumerate(zip(state.domains, state.assignment)):
        if v is not None:
            if v not in d:
                return False
            dom.append(1 << (v - 1))
        else:
            dom.append(_mask(d))
    lb = prop.root(dom, cap)
    if lb is None:
        return False
    state.domains = [_unmask(m) for m in dom]
    committed = [
        sum(1 for j, v in enumerate(state.assignment) if v is not None and row[j] != 1 << (v - 1))
        for row in prop.sbits
    ]
    state.mismatches = committed
    state.forced_mismatches = [x - m for x, m in zip(lb, committed)]
    return True


def root_sac_probe(model: Model, cap: int | None = None) -> Model:
    """Singleton consistency at the root: drop values whose assignment fails at once.

    Raises :class:`Unsatisfiable` when a position loses every value.
    """
    cap = model.cap if cap is None else cap
    prop = _Propagator(model.strings, model.pair_bound)
    dom = [_mask(d) for d in model.domains]
    lb = prop.root(dom, cap)
    if lb is None:
        raise Unsatisfiable(f"root propagation fails at cap {cap}")
    changed = True
    while changed:
        changed = False
        for j in range(prop.length):
            keep = 0
            for c in sorted(_unmask(dom[j])):
                bit = 1 << (c - 1)
                trial, trial_lb = dom.copy(), lb.copy()
                if prop.assign(trial, trial_lb, j, bit, cap, rescan=False):
                    keep |= bit
            if keep != dom[j]:
                if not keep:
                    raise Unsatisfiable(f"position {j} has no consistent value at cap {cap}")
                old = dom[j]
                dom[j] = keep
                if not prop.fixpoint(dom, lb, cap, [(j, old)], []):
                    raise Unsatisfiable(f"root propagation fails at cap {cap}")
                changed = True
    return replace(model, domains=tuple(_unmask(m) for m in dom))


class _Frame:
    __slots__ = ("dom", "lb", "cap", "pos", "todo", "exhausted", "value")

    def __init__(self, dom, lb, cap, pos, todo):
        self.dom = dom
        self.lb = lb
        self.cap = cap
        self.pos = pos
        self.todo = todo
        self.exhausted = set()
        self.value = None


# poll() -> (d_low, d_high, stop); any element may be None/False
PollFn = Callable[[], tuple]
CheckpointFn = Callable[[list[FrontierStep], list[str], int], None]


class Search:
    """Resumable depth-first search over one model.

    ``frontier`` resumes a suspended search; ``incumbent`` (optimize mode) is
    a distance already achieved elsewhere, so only strictly better strings
    are sought. ``d_low`` overrides the model's proven lower bound.
    """

    def __init__(self, model: Model, frontier: Sequence[FrontierStep] = (),
                 incumbent: int | None = None, d_low: int | None = None):
        self.model = model
        self.strings = model.strings
        self.alphabet = model.strings.alphabet
        self.prop = _Propagator(model.strings, model.pair_bound)
        self.length = model.strings.length
        self.frontier_in = list(frontier)
        self.d_low = model.bounds.d_low if d_low is None else max(d_low, model.bounds.d_low)
        self.cap = model.cap
        if model.mode == "optimize" and incumbent is not None:
            self.cap = min(self.cap, incumbent - 1)
        self._validate_frontier()

        pwm = build_pwm(model.strings)
        self._setup_orders(pwm)
        self.frames: list[_Frame] = []
        self.assigned = [False] * self.length
        self.started = False
        self.nodes = 0
        self.best: tuple[int, tuple[int, ...]] | None = None
        self.found: list[tuple[int, ...]] = []

    def _validate_frontier(self):
        seen = set()
        for step in self.frontier_in:
            if not 0 <= step.pos < self.length or step.pos in seen:
                raise ValueError(f"frontier position {step.pos} is invalid or repeated")
            seen.add(step.pos)
            dom = self.model.domains[step.pos]
            if step.value not in dom:
                raise ValueError(
                    f"frontier value {step.value} at position {step.pos} outside domain")
            if not step.exhausted <= dom:
                raise ValueError(f"exhausted values at position {step.pos} outside domain")
            if step.value in step.exhausted:
                raise ValueError(f"frontier value at position {step.pos} marked exhausted")

    def _setup_orders(self, pwm: PWM):
        seed = self.model.tie_seed
        sigma = len(self.alphabet)
        if self.model.heuristic == "pwm":
            self.var_order = pwm_variable_order(pwm, seed)
            self.value_rank = [pwm_value_order(pwm, j, range(1, sigma + 1), seed)
                               for j in range(self.length)]
        else:
            self.var_order = None
            self.value_rank = [list(range(1, sigma + 1))] * self.length
            ties = list(range(self.length))
            if seed is not None:
                import random
                random.Random(seed).shuffle(ties)
            self.sdf_ties = ties

    # -- search primitives --------------------------------------------------

    def _choose(self, dom: list[int]) -> int:
        assigned = self.assigned
        if self.var_order is not None:
            for j in self.var_order:
                if not assigned[j]:
                    return j
        best, best_key = -1, None
        for j in range(self.length):
            if not assigned[j]:
                key = (dom[j].bit_count(), self.sdf_ties[j])
                if best_key is None or key < best_key:
                    best, best_key = j, key
        return best

    def _push(self, dom, lb, pos=None):
        pos = self._choose(dom) if pos is None else pos
        m = dom[pos]
        todo = [c for c in self.value_rank[pos] if m >> (c - 1) & 1]
        frame = _Frame(dom, lb, self.cap, pos, todo)
        self.frames.append(frame)
        self.assigned[pos] = True
        return frame

    @staticmethod
    def _is_leaf(dom) -> bool:
        return all(m & (m - 1) == 0 for m in dom)

    def _leaf(self, dom, lb) -> bool:
        """Record a full assignment. Returns True when search should stop."""
        sol = tuple(m.bit_length() for m in dom)
        dist = max(lb)
        mode = self.model.mode
        if mode == "optimize":
            self.best = (dist, sol)
            self.trace.append((time.monotonic() - self.t0, dist))
            self.trace_nodes.append(self.nodes)
            if self.on_solution is not None:
                self.on_solution(dist, self.alphabet.decode(sol))
            self.cap = dist - 1
            return self.cap < self.d_low
        self.found.append(sol)
        if self.on_solution is not None:
            self.on_solution(dist, self.alphabet.decode(sol))
        return mode == "decide"

    def _start(self) -> bool:
        """Build the root and replay the frontier. Returns True if a leaf stopped search."""
        self.started = True
        dom = [_mask(d) for d in self.model.domains]
        if self.cap < 0:
            return False
        lb = self.prop.root(dom, self.cap)
        if lb is None:
            return False
        if self._is_leaf(dom):
            return self._leaf(dom, lb)
        if not self.frontier_in:
            self._push(dom, lb)
            return False
        last = len(self.frontier_in) - 1
        for k, step in enumerate(self.frontier_in):
            if self.assigned[step.pos]:
                raise ValueError(f"frontier position {step.pos} assigned twice")
            frame = self._push(dom, lb, step.pos)
            frame.exhausted = set(step.exhausted)
            frame.todo = [c for c in frame.todo if c not in step.exhausted]
            if step.value not in frame.todo:
                # pruned since suspension: nothing left under it
                break
            frame.todo.remove(step.value)
            if k == last:
                frame.todo.insert(0, step.value)
                break
            frame.value = step.value
            dom, lb = dom.copy(), lb.copy()
            if not self.prop.assign(dom, lb, step.pos, 1 << (step.value - 1), self.cap, True):
                break
            if self._is_leaf(dom):
                return self._leaf(dom, lb)
        return False

    def frontier(self) -> list[FrontierStep]:
        steps = []
        for f in self.frames[:-1]:
            steps.append(FrontierStep(f.pos, f.value, frozenset(f.exhausted)))
        top = self.frames[-1]
        steps.append(FrontierStep(top.pos, top.todo[0], frozenset(top.exhausted)))
        return steps

    def state(self) -> SearchState:
        """Snapshot of the current node (the deepest frame's parent assignment)."""
        assignment: list[int | None] = [None] * self.length
        for f in self.frames:
            if f.value is not None:
                assignment[f.pos] = f.value
        if self.frames:
            top = self.frames[-1]
            dom = top.dom
            lb = top.lb
        else:
            dom = [_mask(d) for d in self.model.domains]
            lb = self.prop.lower_bounds(dom)
        committed = [
            sum(1 for j, v in enumerate(assignment) if v is not None and row[j] != 1 << (v - 1))
            for row in self.prop.sbits
        ]
        return SearchState(
            domains=[_unmask(m) for m in dom],
            assignment=assignment,
            mismatches=committed,
            forced_mismatches=[x - m for x, m in zip(lb, committed)],
            order=[f.pos for f in self.frames],
            exhausted=[frozenset(f.exhausted) for f in self.frames],
            nodes=self.nodes,
        )

    # -- driver ---------------------------------------------------------------

    def run(self, *, node_limit: int | None = None, time_limit: float | None = None,
            poll: PollFn | None = None, poll_every: int = 10_000,
            checkpoint: CheckpointFn | None = None, checkpoint_every: int | None = None,
            on_solution: Callable[[int, str], None] | None = None,
            min_nodes: int = 0) -> SolveResult:
        """Search until finished or a limit is hit.

        Limits count from this call; the time limit is not enforced before
        ``min_nodes`` nodes have been expanded. On a limit the result carries the
        frontier; a fresh ``Search`` built from it continues where this one
        stopped without revisiting any node.
        """
        mode = self.model.mode
        self.t0 = time.monotonic()
        self.trace: list[tuple[float, int]] = []
        self.trace_nodes: list[int] = []
        self.on_solution = on_solution
        self.found = []
        start_nodes = self.nodes
        if time_limit is not None and time_limit <= 0 and min_nodes <= 0:
            if self.started:
                return self._result("timeout", self.frontier() if self.frames else None)
            return self._result("timeout", list(self.frontier_in))

        status = None
        if not self.started:
            if self.cap < self.d_low:
                # nothing left below the cap can beat the proven lower bound
                self.frames = []
                self.started = True
            elif self.model.root_sac:
                try:
                    self.model = root_sac_probe(self.model, self.cap)
                except Unsatisfiable:
                    self.frames = []
                    self.started = True
                else:
                    if self._start():
                        status = "solved"
            elif self._start():
                status = "solved"

        deadline = None if time_limit is None else self.t0 + time_limit
        next_poll = self.nodes + poll_every if poll is not None else None
        next_ckpt = self.nodes + checkpoint_every if checkpoint is not None and checkpoint_every else None
        ckpt_from = 0
        frames = self.frames
        prop = self.prop
        length = self.length
        while status is None and frames:
            f = frames[-1]
            if f.value is not None:
                f.exhausted.add(f.value)
                f.value = None
            if not f.todo:
                frames.pop()
                self.assigned[f.pos] = False
                continue
            # clean point: the deepest frame's next value is untouched
            if node_limit is not None and self.nodes - start_nodes >= node_limit:
                return self._result("resource-limit", self.frontier())
            if deadline is not None and (self.nodes & 63) == 0 \
                    and self.nodes - start_nodes >= min_nodes and time.monotonic() >= deadline:
                return self._result("timeout", self.frontier())
            if next_poll is not None and self.nodes >= next_poll:
                next_poll = self.nodes + poll_every
                verdict = self._apply_poll(poll())
                if verdict is not None:
                    return self._result(verdict, self.frontier() if verdict == "cancelled" else None)
            if next_ckpt is not None and self.nodes >= next_ckpt:
                next_ckpt = self.nodes + checkpoint_every
                checkpoint(self.frontier(),
                           [self.alphabet.decode(s) for s in self.found[ckpt_from:]],
                           self.nodes)
                ckpt_from = len(self.found)

            v = f.todo.pop(0)
            f.value = v
            self.nodes += 1
            dom = f.dom.copy()
            lb = f.lb.copy()
            if not prop.assign(dom, lb, f.pos, 1 << (v - 1), self.cap, f.cap != self.cap):
                continue
            if len(frames) == length or self._is_leaf(dom):
                if self._leaf(dom, lb):
                    status = "solved"
                continue
            self._push(dom, lb)

        if status is None:
            # search space exhausted
            if mode == "optimize":
                status = "solved" if self.best is not None else "unsat"
            else:
                status = "solved" if self.found else "unsat"
        self.frames = []
        return self._result(status, None)

    def _apply_poll(self, update) -> str | None:
        if not update:
            return None
        d_low, d_high, stop = update
        if stop:
            return "cancelled"
        if d_low is not None:
            self.d_low = max(self.d_low, d_low)
        mode = self.model.mode
        if mode == "optimize":
            if d_high is not None:
                self.cap = min(self.cap, d_high - 1)
            if self.cap < self.d_low:
                return "solved" if self.best is not None else "unsat"
        elif mode == "decide":
            d = self.model.d
            if (d_high is not None and d_high <= d) or d < self.d_low:
                return "cancelled"
        return None

    def _result(self, status: str, frontier) -> SolveResult:
        mode = self.model.mode
        res = SolveResult(mode=mode, status=status, nodes=self.nodes,
                          wall_time=time.monotonic() - self.t0,
                          trace=list(self.trace), trace_nodes=list(self.trace_nodes),
                          frontier=frontier)
        if mode == "optimize":
            if self.best is not None:
                res.best_d = self.best[0]
                res.witnesses = [self.alphabet.decode(self.best[1])]
                res.solutions = 1
        else:
            res.witnesses = [self.alphabet.decode(s) for s in self.found]
            res.solutions = len(self.found)
            if self.found:
                res.best_d = self.model.d
        return res


def _limits(limits: dict | None) -> dict:
    limits = dict(limits or {})
    unknown = set(limits) - {"node_limit", "time_limit"}
    if unknown:
        raise ValueError(f"unknown limits {sorted(unknown)}")
    return limits


def solve_min(model: Model, limits: dict | None = None, **run_kw) -> SolveResult:
    """Branch and bound on the largest distance.

    Each incumbent tightens the cap and search carries on from where it is.
    Stops early when an incumbent meets the lower bound.
    """
    if model.mode != "optimize":
        raise ValueError("solve_min needs an optimize model")
    return Search(model).run(**_limits(limits), **run_kw)


def decide(model: Model, d: int | None = None, limits: dict | None = None,
           **run_kw) -> SolveResult:
    """Is there a string within ``d`` of every input string?"""
    if d is not None and model.d != d or model.mode != "decide":
        model = replace(model, mode="decide", d=model.d if d is None else d)
    if model.d is None or not 0 <= model.d <= model.strings.length:
        raise ValueError(f"decide needs a distance in [0, {model.strings.length}]")
    return Search(model).run(**_limits(limits), **run_kw)


def enumerate_all(model: Model, d_opt: int | None = None, limits: dict | None = None,
                  **run_kw) -> SolveResult:
    """Every string over the model's domains within ``d_opt`` of all inputs."""
    if d_opt is not None and model.d != d_opt or model.mode != "enumerate":
        model = replace(model, mode="enumerate", d=model.d if d_opt is None else d_opt)
    if model.d is None or not 0 <= model.d <= model.strings.length:
        raise ValueError(f"enumerate needs a distance in [0, {model.strings.length}]")
    return Search(model).run(**_limits(limits), **run_kw)


def search_tree_bound(model: Model) -> int:
    """Node count of the unpruned search tree, whatever the variable order."""
    sizes = [len(d) for d in model.domains]
    return int(np.prod([s + 1 for s in sizes], dtype=object)) - 1
