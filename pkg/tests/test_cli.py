import csv
import io
import json
import subprocess
import sys

import pytest

from hameig.cli import dumps_json, main
from hameig.presets import preset_text
from hameig.problem import load_problem


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_preset(capsys):
    code, out, _ = run(capsys, "verify", "--problem", "example1", "--R", "1")
    assert code == 0
    assert "verdict TRUE" in out
    assert "2/21" in out


def test_unknown_problem_is_input_error(capsys):
    code, _, err = run(capsys, "verify", "--problem", "nosuch")
    assert code == 2 and "nosuch" in err


@pytest.mark.parametrize("args", [["--grid-n", "7"], ["--R", "-1"], ["--R", "abc"]])
def test_bad_arguments(capsys, args):
    code, _, _ = run(capsys, "solve", "--problem", "example1", *args)
    assert code == 2


def test_false_verdict_exit_code(capsys, tmp_path):
    text = preset_text("example1").replace('name = "example1"', 'name = "zero"')
    lines = [line if not line.startswith("F = ") else 'F = "0"' for line in text.splitlines()]
    path = tmp_path / "zero.toml"
    path.write_text("\n".join(lines).replace('const = "1/3"', 'const = "0"').replace('const = "1/5"', 'const = "0"'))
    code, out, _ = run(capsys, "verify", "--problem", str(path))
    assert code == 1 and "verdict FALSE" in out


def test_problem_file_matches_preset(capsys, tmp_path):
    path = tmp_path / "ex2.toml"
    path.write_text(preset_text("example2"))
    _, by_name, _ = run(capsys, "verify", "--problem", "example2", "--format", "json")
    code, by_file, _ = run(capsys, "verify", "--problem", str(path), "--format", "json")
    assert code == 0 and by_file == by_name


def test_malformed_problem_file(capsys, tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[component.1]\nbeta = = 2\n")
    code, _, err = run(capsys, "solve", "--problem", str(path))
    assert code == 2 and "line 2" in err


def test_solve_json_is_canonical(capsys):
    argv = ("solve", "--problem", "example1", "--grid-n", "60", "--format", "json")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    doc = json.loads(first)
    assert dumps_json(doc) == first
    assert doc["grid_n"] == 60 and len(doc["u1"]) == 61
    assert doc["R"] == 1.0


def test_solve_text_and_csv(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "example3", "--grid-n", "60")
    assert code == 0 and out.startswith("lambda = ")
    code, out, _ = run(capsys, "solve", "--problem", "example3", "--grid-n", "60", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "u1", "u2"] and len(rows) == 62


def test_sweep_csv(capsys, tmp_path):
    target = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--problem", "example1", "--R", "0.5,1", "2", "--grid-n", "60",
                       "--format", "csv", "--output", str(target))
    assert code == 0 and out == ""
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    assert list(rows[0]) == ["R", "lambda", "iterations", "integral_residual", "ode_residual", "cone_ok"]
    assert [float(r["R"]) for r in rows] == [0.5, 1.0, 2.0]
    assert all(float(r["lambda"]) > 0 for r in rows)


def test_sweep_accepts_fractions(capsys):
    code, out, _ = run(capsys, "sweep", "--problem", "example1", "--R", "1/2", "--grid-n", "60", "--format", "json")
    assert code == 0 and json.loads(out)[0]["R"] == 0.5


def test_examples_roundtrip(capsys):
    code, out, _ = run(capsys, "examples", "--format", "json")
    assert code == 0
    docs = json.loads(out)
    assert set(docs) == {"example1", "example2", "example3"}
    for text in docs.values():
        load_problem(text)


def test_examples_text(capsys):
    code, out, _ = run(capsys, "examples", "--problem", "example2")
    assert code == 0 and "2/21" not in out and "neumann0" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hameig", "verify", "--problem", "example3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert "verdict TRUE" in proc.stdout
