from __future__ import annotations

import csv
import io
import subprocess
import sys

import pytest

from klac.cli import main
from klac.gf2 import parse_matrix
from klac.universal import build_case2


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bounds(capsys):
    assert run(capsys, "bounds", "--T", "4", "--n", "15", "--k", "2") == (0, "5\n", "")


def test_bounds_range_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--T", "6", "--n-expr", "2^T-1", "--k-min", "3", "--k-max", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["lb"] for r in rows] == ["7", "7", "7"]


def test_construct_identity(capsys):
    code, out, _ = run(capsys, "construct", "--T", "2", "--k", "2", "--n", "3")
    assert code == 0 and out == "10\n01\n"


def test_construct_case2(capsys):
    code, out, _ = run(capsys, "construct", "--T", "8", "--k", "3", "--n", "1000")
    assert code == 0 and parse_matrix(out) == build_case2(8, 3).P and len(out.splitlines()) == 17


def test_construct_graph_scheme_from_file(tmp_path, capsys, fig7):
    src = tmp_path / "d.txt"
    src.write_text("".join(r + "\n" for r in fig7.to_strings()))
    assignment = tmp_path / "a.csv"
    code, out, _ = run(capsys, "construct", "--k", "2", "--scheme", "branch-search",
                       "--input", str(src), "--assignment", str(assignment))
    assert code == 0 and len(out.splitlines()) == 6
    rows = list(csv.DictReader(assignment.open()))
    assert len(rows) == 9 and all(int(r["row_count"]) <= 2 for r in rows)


def test_construct_trace(tmp_path, capsys, fig7):
    src = tmp_path / "d.txt"
    src.write_text("\n".join(fig7.to_strings()))
    code, _, err = run(capsys, "construct", "--k", "2", "--scheme", "scr", "--input", str(src), "--trace")
    assert code == 0 and "circuit" in err


def test_infeasible_exit_code(tmp_path, capsys, fig7):
    src = tmp_path / "d.txt"
    src.write_text("\n".join(fig7.to_strings()))
    code, _, err = run(capsys, "construct", "--k", "2", "--scheme", "nested", "--input", str(src))
    assert code == 3 and err.startswith("infeasible")
    code, _, _ = run(capsys, "construct", "--k", "2", "--scheme", "branch-search",
                     "--input", str(src), "--size-cap", "5")
    assert code == 3


@pytest.mark.parametrize("argv", [
    ["bounds", "--T", "4", "--k", "2"],
    ["bounds", "--T", "4", "--n", "15", "--k", "9"],
    ["construct", "--T", "20", "--n", "15", "--k", "10"],
    ["privacy", "--m", "3", "--T", "5", "--k", "1"],
    ["construct", "--k", "2", "--input", "/nonexistent/file"],
    ["bounds", "--T", "4", "--n-expr", "T^3", "--k", "2"],
])
def test_input_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err.startswith("error:") and err.count("\n") == 1


def test_privacy_csv(capsys):
    code, out, _ = run(capsys, "privacy", "--m", "100", "--T", "10", "--k", "2", "--s", "5")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2 and rows[0][0] == "m" and rows[1][:4] == ["100", "10", "2", "5"]


def test_simulate_random(capsys):
    code, out, _ = run(capsys, "simulate", "--T", "8", "--n", "20", "--m", "40", "--k", "3", "--seed", "3")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 22
    assert all(line.endswith(",1") for line in lines[1:-1])
    assert "T_k=17" in lines[-1]


def test_simulate_instance_file(tmp_path, capsys, fig1_instance):
    from klac.instance import format_instance
    f = tmp_path / "inst.txt"
    f.write_text(format_instance(fig1_instance))
    code, out, _ = run(capsys, "simulate", "--input", str(f), "--k", "2", "--F", "16")
    assert code == 0 and "C=" in out.splitlines()[-1]


def test_sweep_reproducible(capsys):
    argv = ["sweep", "fig9", "--n", "8,20", "--instances", "3", "--seed", "11"]
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a == b and a[0] == 0
    assert a[1].splitlines()[0] == "experiment,T,k,n,scheme,stat,value,seed,instances"


def test_sweep_fig4_output_file(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    code, _, _ = run(capsys, "sweep", "fig4", "--T", "8", "--output", str(out))
    rows = list(csv.DictReader(out.open()))
    s1 = {int(r["k"]): int(r["value"]) for r in rows if r["scheme"] == "scheme1"}
    assert code == 0 and s1[8] == 8 and all(s1[k] == 9 for k in range(4, 8))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "klac", "bounds", "--T", "4", "--n", "15", "--k", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "5\n"
