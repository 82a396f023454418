import io
import subprocess
import sys

import pytest

from closestring.cli import QUEUE_ENV, run_cli
from closestring.distributed import WorkQueue, root_subproblem
from closestring.io import read_bench_csv
from closestring import encode_strings


def cli(*argv):
    out = io.StringIO()
    code = run_cli([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.fixture
def pair(tmp_path):
    p = tmp_path / "pair.txt"
    p.write_text("AAA\nTTT\n")
    return p


def test_solve_pair(pair, capsys):
    code, out = cli("solve", pair)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "d=2"
    w = lines[1].split("=", 1)[1]
    assert max(sum(a != b for a, b in zip(w, s)) for s in ("AAA", "TTT")) <= 2
    trace = capsys.readouterr().err.splitlines()
    ds = [int(t.split(",")[1]) for t in trace]
    assert ds[-1] == 2 and all(a > b for a, b in zip(ds, ds[1:]))
    assert all(float(t.split(",")[0]) >= 0 for t in trace)


def test_solve_trace_file(pair, tmp_path):
    trace = tmp_path / "trace.csv"
    assert cli("solve", pair, "--trace", trace)[0] == 0
    assert trace.read_text().splitlines()[-1].endswith(",2")


def test_decide_exit_codes(pair):
    assert cli("decide", "--d", 1, pair) == (1, "unsat\nnodes=0\n")
    code, out = cli("decide", "--d", 2, pair)
    assert code == 0 and out.startswith("sat\nwitness=")


def test_enumerate_counts(pair):
    code, out = cli("enumerate", "--d", 2, "--unrestricted", pair)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "18" and len(lines) == 19
    assert cli("enumerate", "--d", 2, pair)[1].splitlines()[0] == "6"


def test_gen_and_read_back(tmp_path):
    code, out = cli("gen", "--n", 4, "--l", 9, "--seed", 3, "--format", "fasta")
    assert code == 0 and out.count(">") == 4
    p = tmp_path / "g.fa"
    p.write_text(out)
    assert cli("solve", p)[0] == 0


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["decide", "x.txt"], ["gen", "--n", "0", "--l", "3"],
    ["solve", "x.txt", "--node-limit", "-1"], ["bench", "--heuristics", "dfs"],
    ["worker"], ["coordinate", "x.txt", "--k", "1"],
])
def test_usage_errors(argv, monkeypatch):
    monkeypatch.delenv(QUEUE_ENV, raising=False)
    assert cli(*argv)[0] == 2


def test_d_beyond_length(pair):
    assert cli("decide", "--d", 4, pair)[0] == 2


def test_input_errors(tmp_path):
    assert cli("solve", tmp_path / "missing.txt")[0] == 4
    bad = tmp_path / "bad.txt"
    bad.write_text("ACG\nTT\n")
    assert cli("solve", bad)[0] == 4
    bad.write_text(">s\nACNG\n")
    assert cli("solve", bad)[0] == 4


def test_resource_limit(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("ACGTACGTAC\nTTGCAGTCAA\nGGCATCAGTT\nCATGCATGCA\n")
    code, out = cli("solve", p, "--node-limit", 1)
    assert code == 3 and "status=resource-limit" in out


def test_bench_small(tmp_path):
    code, out = cli("bench", "--n", "3", "--l", "6", "--seeds", 2)
    rows = read_bench_csv(out)
    assert code == 0 and len(rows) == 2 * 2 * 2
    assert {r.mode for r in rows} == {"opt", "cert"}
    assert all(r.nodes >= 1 for r in rows)
    target = tmp_path / "b.csv"
    assert cli("bench", "--n", "3", "--l", "6", "--seeds", 1, "--out", target)[1] == ""
    assert len(read_bench_csv(target.read_text())) == 4


def test_bench_jobs_match_serial():
    args = ("bench", "--n", "3,4", "--l", "6", "--seeds", 2, "--no-timing")
    assert cli(*args) == cli(*args, "--jobs", 2)


def test_coordinate_cli(pair, tmp_path):
    code, out = cli("coordinate", pair, "--t-max", 0, "--workers", 0,
                    "--queue", tmp_path / "q")
    assert code == 0 and out.splitlines()[0] == "d=2"


def test_worker_uses_env_queue(tmp_path, monkeypatch):
    q = WorkQueue(tmp_path / "q")
    q.enqueue(root_subproblem(encode_strings(["AAA", "TTT"]), "enumerate", 2))
    monkeypatch.setenv(QUEUE_ENV, str(tmp_path / "q"))
    code, out = cli("worker", "--idle-exit")
    assert (code, out) == (0, "units=1\n")
    recs = q.read_results()
    assert sorted(w for r in recs for w in r.witnesses) == \
        ["AAT", "ATA", "ATT", "TAA", "TAT", "TTA"]


def test_module_entry_point(pair):
    proc = subprocess.run([sys.executable, "-m", "closestring", "decide", "--d", "1",
                           str(pair)], capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stdout.startswith("unsat")


DETERMINISM_CASES = [
    ("solve", "{inst}"),
    ("solve", "{inst}", "--heuristic", "sdf", "--tie-seed", "4"),
    ("decide", "--d", "5", "{inst}"),
    ("enumerate", "--d", "6", "--unrestricted", "{inst}"),
    ("gen", "--n", "5", "--l", "25", "--seed", "42"),
    ("bench", "--n", "3", "--l", "8", "--seeds", "2", "--no-timing"),
    ("coordinate", "{inst}", "--t-max", "0", "--workers", "0", "--unit-nodes", "25",
     "--queue", "{queue}"),
]


@pytest.mark.parametrize("argv", DETERMINISM_CASES, ids=lambda a: a[0])
def test_byte_identical_reruns(argv, tmp_path):
    inst = tmp_path / "inst.txt"
    inst.write_text("ACGTACGTAC\nTTGCAGTCAA\nGGCATCAGTT\nCATGCATGCA\n")
    outs = []
    for run in range(2):
        args = [a.format(inst=inst, queue=tmp_path / f"q{run}") for a in argv]
        outs.append(cli(*args))
    assert outs[0] == outs[1]
