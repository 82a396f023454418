"""Directory-backed FIFO of subproblem files.

Layout under the queue root::

    pending/   <seq>__<id>.sub          waiting work, FIFO by sequence number
    claimed/   <seq>__<id>.sub@<worker> work owned by a worker (its checkpoint)
    results/   <id>__<segment>.res      one file per result segment
    ids/       <id>                     enqueue markers, make enqueue idempotent
    bounds.log                          the BoundBoard file
    STOP                                present once the run should halt

Claims are atomic renames, every write goes through a temp file and
``os.replace``, so any process may die at any point without leaving a
half-written file behind.
"""

from __future__ import annotations

import os
import socket
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock

from .board import BoundBoard
from .subproblem import Subproblem, SubproblemError, instance_hash, parse_subproblem, \
    serialize_subproblem

RESULT_STATUSES = ("partial", "split", "solved", "unsat", "cancelled")


def default_worker_name() -> str:
    return f"{socket.gethostname()}-{os.getpid()}"


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class ResultRecord:
    """One result segment of a subproblem run."""

    id: str
    segment: int
    status: str
    mode: str
    fixed_d: int | None
    best_d: int | None = None
    nodes: int = 0
    witnesses: list[str] = field(default_factory=list)
    children: list[str] = field(default_factory=list)
    header: dict = field(default_factory=dict)

    @property
    def final(self) -> bool:
        return self.status != "partial"


def format_result(sub: Subproblem, rec: ResultRecord) -> str:
    head = {
        "version": 1,
        "id": sub.id,
        "mode": sub.mode,
        "d_low": sub.bounds.d_low,
        "d_high": sub.bounds.d_high,
        "fixed_d": "-" if sub.fixed_d is None else sub.fixed_d,
        "heuristic": sub.heuristic,
        "tie_break": "index" if sub.tie_seed is None else f"random:{sub.tie_seed}",
        "instance_hash": instance_hash(sub.strings),
        "segment": rec.segment,
        "status": rec.status,
        "best_d": "-" if rec.best_d is None else rec.best_d,
        "witness_count": len(rec.witnesses),
        "nodes": rec.nodes,
        "children": ",".join(rec.children),
    }
    lines = [f"{k}: {v}" for k, v in head.items()]
    lines.append("WITNESSES")
    lines.extend(rec.witnesses)
    lines.append("END")
    return "\n".join(lines) + "\n"


def parse_result(text: str) -> ResultRecord:
    head, witnesses, in_body, ended = {}, [], False, False
    for line in text.split("\n"):
        if line == "WITNESSES":
            in_body = True
        elif line == "END":
            ended = True
            break
        elif in_body:
            if line:
                witnesses.append(line)
        elif line:
            key, _, val = line.partition(":")
            head[key.strip()] = val.strip()
    if not ended:
        raise SubproblemError("result file truncated")
    try:
        if int(head["witness_count"]) != len(witnesses):
            raise SubproblemError("witness count does not match WITNESSES section")
        status = head["status"]
        if status not in RESULT_STATUSES:
            raise SubproblemError(f"unknown result status {status!r}")
        return ResultRecord(
            id=head["id"],
            segment=int(head["segment"]),
            status=status,
            mode=head["mode"],
            fixed_d=None if head["fixed_d"] == "-" else int(head["fixed_d"]),
            best_d=None if head["best_d"] == "-" else int(head["best_d"]),
            nodes=int(head["nodes"]),
            witnesses=witnesses,
            children=[c for c in head.get("children", "").split(",") if c],
            header=head,
        )
    except (KeyError, ValueError) as exc:
        raise SubproblemError(f"malformed result file: {exc}") from exc


class WorkQueue:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        for sub in ("pending", "claimed", "results", "ids"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self.bounds_path = self.root / "bounds.log"
        self.board = BoundBoard(self.bounds_path)
        self._lock = FileLock(str(self.root / ".seq.lock"))

    # -- control ------------------------------------------------------------

    @property
    def stop_path(self) -> Path:
        return self.root / "STOP"

    def request_stop(self) -> None:
        self.stop_path.touch()

    def clear_stop(self) -> None:
        self.stop_path.unlink(missing_ok=True)

    def stopped(self) -> bool:
        return self.stop_path.exists()

    # -- work items -----------------------------------------------------------

    def _next_seq(self) -> int:
        counter = self.root / ".seq"
        with self._lock:
            n = int(counter.read_text()) + 1 if counter.exists() else 1
            counter.write_text(str(n))
        return n

    def enqueue(self, sub: Subproblem) -> bool:
        """Add ``sub`` unless a subproblem with the same id was ever enqueued."""
        try:
            fd = os.open(self.root / "ids" / sub.id, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            return False
        os.close(fd)
        name = f"{self._next_seq():012d}__{sub.id}.sub"
        _atomic_write(self.root / "pending" / name, serialize_subproblem(sub))
        return True

    def pending(self) -> list[Path]:
        return sorted(p for p in (self.root / "pending").iterdir() if p.suffix == ".sub")

    def claimed(self) -> list[Path]:
        return sorted((self.root / "claimed").iterdir())

    def claim(self, worker: str | None = None) -> Path | None:
        worker = worker or default_worker_name()
        for path in self.pending():
            target = self.root / "claimed" / f"{path.name}@{worker}"
            try:
                os.rename(path, target)
            except FileNotFoundError:
                continue  # another worker won the race
            return target
        return None

    def load(self, claim: Path) -> Subproblem:
        return parse_subproblem(claim.read_text(encoding="utf-8"), self.root)

    def checkpoint(self, claim: Path, sub: Subproblem) -> None:
        _atomic_write(claim, serialize_subproblem(sub))

    def complete(self, claim: Path) -> None:
        try:
            os.unlink(claim)
        except FileNotFoundError:
            pass

    def release(self, claim: Path) -> Path:
        """Put a claimed file back at its original place in the queue."""
        name = claim.name.rsplit("@", 1)[0]
        target = self.root / "pending" / name
        os.rename(claim, target)
        return target

    def recover(self, alive=None) -> list[Path]:
        """Re-enqueue work held by dead workers.

        ``alive(worker_name)`` decides liveness; by default a worker named
        ``<host>-<pid>`` on this host is alive while that pid exists.
        """
        alive = alive or _pid_alive
        moved = []
        for claim in self.claimed():
            worker = claim.name.rsplit("@", 1)[-1]
            if not alive(worker):
                moved.append(self.release(claim))
        return moved

    # -- results --------------------------------------------------------------

    def write_result(self, sub: Subproblem, rec: ResultRecord) -> Path:
        path = self.root / "results" / f"{sub.id}__{rec.segment:06d}.res"
        _atomic_write(path, format_result(sub, rec))
        return path

    def result_paths(self) -> list[Path]:
        return sorted(p for p in (self.root / "results").iterdir() if p.suffix == ".res")

    def read_results(self, skip: set | None = None) -> list[ResultRecord]:
        out = []
        for path in self.result_paths():
            if skip is not None and path.name in skip:
                continue
            out.append(parse_result(path.read_text(encoding="utf-8")))
            if skip is not None:
                skip.add(path.name)
        return out


def _pid_alive(worker: str) -> bool:
    host, _, pid = worker.rpartition("-")
    pid = pid.split(".", 1)[0]  # thread workers append ".<n>"
    if host != socket.gethostname() or not pid.isdigit():
        return True  # cannot judge remote or foreign workers
    try:
        os.kill(int(pid), 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True
