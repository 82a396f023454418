"""Self-contained units of search work and their text format.

A subproblem document looks like::

    version: 1
    id: root.1
    mode: enumerate
    d_low: 2
    d_high: 3
    fixed_d: 2
    heuristic: pwm
    tie_break: index
    alphabet: ACGT
    instance_hash: 5f1e...
    nodes: 120
    segment: 0
    split_pending: 0
    INSTANCE
    AAA
    TTT
    DOMAINS
    AT
    AT
    T
    FRONTIER
    1=A exhausted=
    3=T exhausted=
    END

Positions in FRONTIER lines are 1-based. With ``instance_path`` in the
header the INSTANCE section is omitted and the file at that path (plain or
FASTA) must match ``instance_hash``.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, replace

import numpy as np

from ..core import Alphabet, BoundInterval, StringSet, encode_strings
from ..io import read_instance
from ..solver import FrontierStep, Model, Search, build_model

FORMAT_VERSION = 1
MAX_ID = 96


class SubproblemError(ValueError):
    """Malformed, tampered or inconsistent subproblem document."""


@dataclass(frozen=True)
class Subproblem:
    id: str
    strings: StringSet
    domains: tuple[frozenset[int], ...]
    bounds: BoundInterval
    mode: str = "optimize"
    fixed_d: int | None = None
    heuristic: str = "pwm"
    tie_seed: int | None = None
    root_sac: bool = False
    frontier: tuple[FrontierStep, ...] = ()
    instance_path: str | None = None
    nodes: int = 0
    segment: int = 0
    split_pending: bool = False

    def __post_init__(self):
        validate(self)

    def to_model(self) -> Model:
        return Model(self.strings, self.domains, self.bounds, self.mode, self.fixed_d,
                     self.heuristic, self.tie_seed, "restricted", self.root_sac)


def validate(sub: Subproblem) -> None:
    length = sub.strings.length
    if not sub.id or any(not (ch.isalnum() or ch in "._-") for ch in sub.id):
        raise SubproblemError(f"bad subproblem id {sub.id!r}")
    if len(sub.domains) != length:
        raise SubproblemError(f"{len(sub.domains)} domains for strings of length {length}")
    codes = set(sub.strings.alphabet.codes)
    for j, dom in enumerate(sub.domains):
        if not dom or not dom <= codes:
            raise SubproblemError(f"domain at position {j + 1} is empty or invalid")
    if sub.mode not in ("optimize", "decide", "enumerate"):
        raise SubproblemError(f"unknown mode {sub.mode!r}")
    if sub.mode != "optimize" and (sub.fixed_d is None or not 0 <= sub.fixed_d <= length):
        raise SubproblemError(f"{sub.mode} subproblem needs fixed_d in [0, {length}]")
    if sub.bounds.d_high > length:
        raise SubproblemError("d_high exceeds string length")
    seen = set()
    for step in sub.frontier:
        if not 0 <= step.pos < length or step.pos in seen:
            raise SubproblemError(f"frontier position {step.pos + 1} invalid or repeated")
        seen.add(step.pos)
        dom = sub.domains[step.pos]
        if step.value not in dom:
            raise SubproblemError(
                f"frontier value at position {step.pos + 1} lies outside its domain")
        if not step.exhausted <= dom or step.value in step.exhausted:
            raise SubproblemError(
                f"exhausted set at position {step.pos + 1} inconsistent with domain")


def root_subproblem(strings: StringSet, mode: str = "optimize", d: int | None = None,
                    heuristic: str = "pwm", domain_mode: str = "restricted",
                    tie_seed: int | None = None, id: str = "root",
                    root_sac: bool = False) -> Subproblem:
    model = build_model(strings, mode, heuristic, domain_mode, d, tie_seed)
    return Subproblem(id, strings, model.domains, model.bounds, mode, model.d,
                      heuristic, tie_seed, root_sac)


def instance_hash(strings: StringSet) -> str:
    h = hashlib.sha256()
    h.update(strings.alphabet.symbols.encode())
    for s in strings.strings():
        h.update(b"\n" + s.encode())
    return h.hexdigest()


def _tie_text(seed):
    return "index" if seed is None else f"random:{seed}"


def serialize_subproblem(sub: Subproblem) -> str:
    alpha = sub.strings.alphabet
    head = {
        "version": FORMAT_VERSION,
        "id": sub.id,
        "mode": sub.mode,
        "d_low": sub.bounds.d_low,
        "d_high": sub.bounds.d_high,
        "fixed_d": "-" if sub.fixed_d is None else sub.fixed_d,
        "heuristic": sub.heuristic,
        "tie_break": _tie_text(sub.tie_seed),
        "root_sac": int(sub.root_sac),
        "alphabet": alpha.symbols,
        "instance_hash": instance_hash(sub.strings),
    }
    if sub.instance_path:
        head["instance_path"] = sub.instance_path
    head.update(nodes=sub.nodes, segment=sub.segment, split_pending=int(sub.split_pending))
    lines = [f"{k}: {v}" for k, v in head.items()]
    if not sub.instance_path:
        lines.append("INSTANCE")
        lines.extend(sub.strings.strings())
    lines.append("DOMAINS")
    lines.extend("".join(alpha.symbol(c) for c in sorted(d)) for d in sub.domains)
    lines.append("FRONTIER")
    for step in sub.frontier:
        ex = "".join(alpha.symbol(c) for c in sorted(step.exhausted))
        lines.append(f"{step.pos + 1}={alpha.symbol(step.value)} exhausted={ex}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def _split_sections(text: str, names: tuple[str, ...]):
    head, sections, current = {}, {}, None
    for raw in text.split("\n"):
        line = raw.rstrip("\r")
        if line in names:
            current = line
            sections[current] = []
        elif line == "END":
            current = "END"
        elif current is None:
            if not line:
                continue
            key, sep, val = line.partition(":")
            if not sep:
                raise SubproblemError(f"malformed header line {line!r}")
            head[key.strip()] = val.strip()
        elif current != "END":
            if line:
                sections[current].append(line)
        elif line:
            raise SubproblemError("content after END")
    if current != "END":
        raise SubproblemError("document is truncated (no END line)")
    return head, sections


def _int(head, key):
    try:
        return int(head[key])
    except KeyError:
        raise SubproblemError(f"missing header key {key!r}") from None
    except ValueError:
        raise SubproblemError(f"header {key!r} is not an integer: {head[key]!r}") from None


def parse_subproblem(text: str, base_dir: str | os.PathLike | None = None) -> Subproblem:
    head, sections = _split_sections(text, ("INSTANCE", "DOMAINS", "FRONTIER"))
    if _int(head, "version") != FORMAT_VERSION:
        raise SubproblemError(f"unsupported format version {head['version']}")
    try:
        alpha = Alphabet(head["alphabet"])
        if "instance_path" in head:
            path = head["instance_path"]
            full = path if base_dir is None else os.path.join(base_dir, path)
            strings = read_instance(full, alphabet=alpha).to_stringset(alpha)
        else:
            strings = encode_strings(sections.get("INSTANCE", []), alpha)
    except KeyError as exc:
        raise SubproblemError(f"missing header key {exc}") from None
    except (OSError, ValueError) as exc:
        raise SubproblemError(f"cannot load instance: {exc}") from exc
    if instance_hash(strings) != head.get("instance_hash"):
        raise SubproblemError("instance hash mismatch")
    try:
        domains = tuple(frozenset(alpha.code(ch) for ch in ln)
                        for ln in sections.get("DOMAINS", []))
        frontier = []
        for ln in sections.get("FRONTIER", []):
            assign, _, ex = ln.partition(" exhausted=")
            pos, _, sym = assign.partition("=")
            frontier.append(FrontierStep(int(pos) - 1, alpha.code(sym),
                                         frozenset(alpha.code(ch) for ch in ex)))
        tie = head.get("tie_break", "index")
        tie_seed = None if tie == "index" else int(tie.split(":", 1)[1])
        fixed = head.get("fixed_d", "-")
        return Subproblem(
            id=head["id"],
            strings=strings,
            domains=domains,
            bounds=BoundInterval(_int(head, "d_low"), _int(head, "d_high")),
            mode=head["mode"],
            fixed_d=None if fixed == "-" else int(fixed),
            heuristic=head.get("heuristic", "pwm"),
            tie_seed=tie_seed,
            root_sac=head.get("root_sac", "0") == "1",
            frontier=tuple(frontier),
            instance_path=head.get("instance_path"),
            nodes=_int(head, "nodes"),
            segment=_int(head, "segment"),
            split_pending=head.get("split_pending", "0") == "1",
        )
    except SubproblemError:
        raise
    except KeyError as exc:
        raise SubproblemError(f"missing header key {exc}") from None
    except ValueError as exc:
        raise SubproblemError(f"malformed field: {exc}") from exc


def child_id(parent: str, k: int) -> str:
    cid = f"{parent}.{k}"
    if len(cid) > MAX_ID:
        cid = "h" + hashlib.sha1(cid.encode()).hexdigest()[:20]
    return cid


def _steps(frames, upto):
    return [FrontierStep(f.pos, f.value, frozenset(f.exhausted)) for f in frames[:upto]]


def split(sub: Subproblem, k: int, incumbent: int | None = None) -> list[Subproblem]:
    """Partition the unexplored part of ``sub`` into at most ``k`` disjoint pieces.

    The split happens at the shallowest depth with two or more open values.
    Those values are cut into contiguous groups in heuristic order; the group
    holding the in-progress value keeps the deeper frontier. An exhausted
    subproblem gives ``[]``; one whose remaining space is a single leaf comes
    back as one child covering the same space.
    """
    if k < 2:
        raise ValueError("split needs k >= 2")
    search = Search(sub.to_model(), sub.frontier, incumbent=incumbent)
    search.t0 = 0.0
    search.trace, search.trace_nodes, search.found, search.on_solution = [], [], [], None
    single = [replace(sub, id=child_id(sub.id, 0), nodes=0, segment=0, split_pending=False)]
    if search._start() or search.found or search.trace:
        # replay itself reached a leaf; only a rerun of the whole space reports it
        return single
    frames, prop = search.frames, search.prop

    while True:
        # unwind finished frames as the search loop would
        while frames:
            f = frames[-1]
            if f.value is not None:
                f.exhausted.add(f.value)
                f.value = None
            if f.todo:
                break
            frames.pop()
            search.assigned[f.pos] = False
        if not frames:
            return []
        depth = None
        for t, f in enumerate(frames):
            items = ([f.value] if f.value is not None else []) + f.todo
            if len(items) >= 2:
                depth = t
                break
        if depth is not None:
            break
        # one open value on a single path: follow it without counting nodes
        top = frames[-1]
        v = top.todo.pop(0)
        top.value = v
        dom, lb = top.dom.copy(), top.lb.copy()
        if not prop.assign(dom, lb, top.pos, 1 << (v - 1), search.cap, top.cap != search.cap):
            continue
        if search._is_leaf(dom):
            return single
        search._push(dom, lb)

    f = frames[depth]
    in_progress = f.value
    items = ([in_progress] if in_progress is not None else []) + f.todo
    groups = [list(g) for g in np.array_split(np.array(items), min(k, len(items)))]
    children = []
    for i, group in enumerate(groups):
        group = [int(c) for c in group]
        domains = list(sub.domains)
        domains[f.pos] = frozenset(group)
        frontier = _steps(frames, depth)
        if in_progress is not None and in_progress in group:
            frontier.append(FrontierStep(f.pos, in_progress, frozenset()))
            frontier.extend(_steps(frames[depth + 1:], len(frames) - depth - 2))
            last = frames[-1]
            frontier.append(FrontierStep(last.pos, last.todo[0], frozenset(last.exhausted)))
        children.append(replace(
            sub, id=child_id(sub.id, i), domains=tuple(domains), frontier=tuple(frontier),
            nodes=0, segment=0, split_pending=False))
    return children
