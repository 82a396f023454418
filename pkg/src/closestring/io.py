"""Instance files (plain and FASTA), random instances and benchmark CSV."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields

import numpy as np

from .core import DNA, Alphabet, InstanceError, StringSet, encode_strings


@dataclass
class InstanceDoc:
    strings: list[str]
    names: list[str] | None = None
    source_format: str = "plain"

    def to_stringset(self, alphabet: Alphabet = DNA) -> StringSet:
        return encode_strings(self.strings, alphabet)


def _check(strings: list[str], alphabet: Alphabet) -> None:
    if not strings:
        raise InstanceError("instance contains no strings")
    length = len(strings[0])
    for k, s in enumerate(strings):
        if not s:
            raise InstanceError(f"string {k + 1} is empty")
        if len(s) != length:
            raise InstanceError(f"string {k + 1} has length {len(s)}, expected {length}")
        bad = set(s) - set(alphabet.symbols)
        if bad:
            raise InstanceError(f"string {k + 1} has symbols {''.join(sorted(bad))} "
                                f"outside alphabet {alphabet.symbols}")


def parse_instance(text: str, fmt: str | None = None, alphabet: Alphabet = DNA) -> InstanceDoc:
    """Parse a plain (one string per line) or FASTA instance.

    With ``fmt=None`` the format is FASTA if the first meaningful line starts
    with ``>``. Symbols are upper-cased; wildcards are rejected.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    if fmt is None:
        first = next((ln for ln in lines if ln and not ln.startswith("#")), "")
        fmt = "fasta" if first.startswith(">") else "plain"
    if fmt == "plain":
        strings = [ln.upper() for ln in lines if ln and not ln.startswith("#")]
        names = None
    elif fmt == "fasta":
        names, chunks = [], []
        for ln in lines:
            if not ln or ln.startswith(";"):
                continue
            if ln.startswith(">"):
                names.append(ln[1:].strip())
                chunks.append([])
            elif not chunks:
                raise InstanceError("FASTA sequence data before first '>' header")
            else:
                chunks[-1].append(ln.upper())
        strings = ["".join(c) for c in chunks]
    else:
        raise ValueError(f"unknown instance format {fmt!r}")
    _check(strings, alphabet)
    return InstanceDoc(strings, names, fmt)


def format_instance(doc: InstanceDoc, fmt: str | None = None, width: int = 60) -> str:
    fmt = fmt or doc.source_format
    if fmt == "plain":
        return "".join(s + "\n" for s in doc.strings)
    names = doc.names or [f"s{k + 1}" for k in range(len(doc.strings))]
    out = []
    for name, s in zip(names, doc.strings):
        out.append(f">{name}\n")
        for i in range(0, len(s), width):
            out.append(s[i:i + width] + "\n")
    return "".join(out)


def read_instance(path, fmt: str | None = None, alphabet: Alphabet = DNA) -> InstanceDoc:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read(), fmt, alphabet)


def generate_instance(n: int, length: int, alphabet: Alphabet = DNA,
                      seed: int | None = 0) -> InstanceDoc:
    """N strings of i.i.d. uniform symbols from a seeded generator."""
    if n < 1 or length < 1:
        raise ValueError("need n >= 1 and length >= 1")
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, len(alphabet), size=(n, length))
    strings = ["".join(alphabet.symbols[c] for c in row) for row in codes]
    return InstanceDoc(strings, [f"r{k + 1}" for k in range(n)], "plain")


def random_stringset(n: int, length: int, seed: int | None = 0,
                     alphabet: Alphabet = DNA) -> StringSet:
    return generate_instance(n, length, alphabet, seed).to_stringset(alphabet)


@dataclass
class BenchRow:
    instance_id: str
    n: int
    length: int
    seed: int
    heuristic: str
    mode: str
    best_d: int | None
    nodes: int
    wall_time: float
    incumbent_times: list[float] = field(default_factory=list)


BENCH_COLUMNS = [f.name for f in fields(BenchRow)]
TIMING_COLUMNS = ("wall_time", "incumbent_times")


def write_bench_csv(rows: list[BenchRow], timing: bool = True) -> str:
    """CSV text with a header row; ``timing=False`` drops wall-clock columns."""
    cols = [c for c in BENCH_COLUMNS if timing or c not in TIMING_COLUMNS]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        rec = []
        for c in cols:
            v = getattr(r, c)
            if c == "incumbent_times":
                v = ";".join(f"{t:.6f}" for t in v)
            elif c == "wall_time":
                v = f"{v:.6f}"
            elif v is None:
                v = ""
            rec.append(v)
        w.writerow(rec)
    return buf.getvalue()


def read_bench_csv(text: str) -> list[BenchRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        times = rec.get("incumbent_times", "")
        rows.append(BenchRow(
            instance_id=rec["instance_id"],
            n=int(rec["n"]),
            length=int(rec["length"]),
            seed=int(rec["seed"]),
            heuristic=rec["heuristic"],
            mode=rec["mode"],
            best_d=int(rec["best_d"]) if rec["best_d"] else None,
            nodes=int(rec["nodes"]),
            wall_time=float(rec.get("wall_time") or 0.0),
            incumbent_times=[float(t) for t in times.split(";")] if times else [],
        ))
    return rows
