import io
import json
import subprocess
import sys

import pytest

from segcalc.cli import run

CONFIG = "q=2\nell=7\nm=6\nn_tors_max=6\nshift_max=2\nk_max=3\nu_max=1\nlevels=0,1/2,1\n"


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "grid.cfg"
    path.write_text(CONFIG)
    return str(path)


def test_invariants_example():
    code, out = call("invariants", "--q", "2", "--ell", "7", "--n", "3", "--s", "1", "--k", "1", "--a", "3")
    assert code == 0
    assert out.splitlines() == ["eps=3", "omega=1", "w=3", "t=2", "c=7"]


def test_invariants_inconsistent_and_bad_input(tmp_path):
    code, out = call("invariants", "--q", "2", "--ell", "7", "--n", "3", "--k", "7")
    assert code == 1 and "t=inconsistent" in out
    assert call("invariants", "--q", "2", "--ell", "7")[0] == 2
    assert call("invariants", "--q", "2", "--ell", "7", "--n", "3", "--a", "2")[0] == 2
    cfg = tmp_path / "one.cfg"
    cfg.write_text("q=2\nell=7\nn=3\na=3\n")
    assert call("invariants", "--config", str(cfg))[1].splitlines()[0] == "eps=3"


def test_hasse():
    code, out = call("hasse", "3")
    assert code == 0
    assert out.splitlines() == ["(1,1,1) -> (2,1)", "(2,1) -> (3)"]
    assert call("hasse", "-1")[0] == 2


def test_verify_suite_with_options():
    code, out = call("verify", "mackey", "--bmax", "3", "--nmax", "6")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert rows and all(r["pass"] for r in rows) and all(r["check"] == "mackey" for r in rows)


@pytest.mark.parametrize("argv", [
    ("frobnicate",),
    ("verify", "nosuch"),
    ("verify", "mackey", "--seed", "1"),
    ("verify", "all", "--nmax", "3"),
    ("hasse", "x"),
    (),
])
def test_usage_errors(argv):
    assert call(*argv)[0] == 2


def test_bad_thread_count(monkeypatch):
    monkeypatch.setenv("SEGCALC_THREADS", "zero")
    assert call("verify", "reduction")[0] == 2
    monkeypatch.setenv("SEGCALC_THREADS", "0")
    assert call("verify", "reduction")[0] == 2


def test_enumerate_census_transfer(config_file, tmp_path):
    code, jsonl = call("enumerate", "--config", config_file)
    assert code == 0 and jsonl
    rows = [json.loads(line) for line in jsonl.splitlines()]
    assert all({"w", "t", "c", "omega"} <= set(r) for r in rows)
    code, census = call("census", "--config", config_file)
    assert code == 0
    assert all(json.loads(line)["pass"] for line in census.splitlines())
    universe = tmp_path / "u.jsonl"
    universe.write_text(jsonl)
    code, from_file = call("transfer", "--universe", str(universe))
    assert code == 0
    assert from_file == call("transfer", "--config", config_file)[1]
    assert len(from_file.splitlines()) == len(rows)


def test_transfer_bad_universe(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{oops\n")
    assert call("transfer", "--universe", str(bad))[0] == 2
    assert call("transfer", "--universe", str(tmp_path / "missing"))[0] == 2


def test_config_flags_override_file(config_file):
    full = call("enumerate", "--config", config_file)[1]
    narrow = call("enumerate", "--config", config_file, "--n-tors-max", "3")[1]
    assert 0 < len(narrow.splitlines()) < len(full.splitlines())
    assert call("enumerate", "--config", config_file, "--q", "7")[0] == 2
    assert call("enumerate", "--config", config_file + ".missing")[0] == 2


def test_output_is_deterministic(config_file, monkeypatch):
    first = call("enumerate", "--config", config_file)[1]
    monkeypatch.setenv("SEGCALC_THREADS", "4")
    assert call("enumerate", "--config", config_file)[1] == first
    a = call("verify", "y_count", "--emax", "6", "--smax", "6", "--kmax", "12")[1]
    b = call("verify", "y_count", "--emax", "6", "--smax", "6", "--kmax", "12")[1]
    assert a == b


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "segcalc", "hasse", "2"], capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "(1,1) -> (2)\n"
