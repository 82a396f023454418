"""Shared distance bounds kept in an append-only text file.

Each line is ``LOW <d> <timestamp>`` (every distance below ``d`` is ruled
out) or ``HIGH <d> <witness> <timestamp>`` (``witness`` is within ``d`` of
all strings). Readers take the largest LOW and smallest HIGH, so the
effective bounds only ever move inwards no matter how writers interleave.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class BoardState:
    d_low: int | None = None
    d_high: int | None = None
    witness: str | None = None

    @property
    def closed(self) -> bool:
        return self.d_low is not None and self.d_high is not None and self.d_low >= self.d_high


class BoundBoard:
    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self.path.touch(exist_ok=True)

    def _append(self, line: str) -> None:
        # one write() on an O_APPEND descriptor: lines never interleave
        fd = os.open(self.path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
        try:
            os.write(fd, (line + "\n").encode())
        finally:
            os.close(fd)

    def entries(self) -> list[tuple]:
        try:
            text = self.path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return []
        out = []
        for line in text.split("\n")[:-1]:  # a torn last line has no newline yet
            parts = line.split()
            if len(parts) == 3 and parts[0] == "LOW":
                out.append(("LOW", int(parts[1]), None, float(parts[2])))
            elif len(parts) == 4 and parts[0] == "HIGH":
                out.append(("HIGH", int(parts[1]), parts[2], float(parts[3])))
        return out

    def read(self) -> BoardState:
        low = high = witness = None
        for kind, d, w, _ in self.entries():
            if kind == "LOW":
                low = d if low is None else max(low, d)
            elif high is None or d < high:
                high, witness = d, w
        return BoardState(low, high, witness)

    def post_low(self, d: int) -> bool:
        cur = self.read()
        if cur.d_low is not None and d <= cur.d_low:
            return False
        self._append(f"LOW {d} {time.time():.6f}")
        return True

    def post_high(self, d: int, witness: str) -> bool:
        cur = self.read()
        if cur.d_high is not None and d >= cur.d_high:
            return False
        self._append(f"HIGH {d} {witness} {time.time():.6f}")
        return True

    def poll(self):
        s = self.read()
        return s.d_low, s.d_high, False
