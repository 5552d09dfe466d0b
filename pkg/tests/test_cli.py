import json
import subprocess
import sys

import pytest

from fairdiv.cli import main

E1 = {"n": 2, "m": 4, "valuations": [{"kind": "additive", "values": [10, 6, 1, 1]},
                                     {"kind": "additive", "values": [10, 1, 3, 2]}]}


@pytest.fixture
def e1_file(tmp_path):
    path = tmp_path / "e1.json"
    path.write_text(json.dumps(E1))
    return str(path)


def test_solve(e1_file, capsys):
    code = main(["solve", "--instance", e1_file, "--p", "0", "--oracle",
                 "--report-p", "-inf", "-1/2", "0", "1"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["allocation"]["bundles"] == [[1, 2, 3], [0]]
    assert out["values"] == [8, 10]
    assert set(out["ratio"]) == {"-inf", "-1/2", "0", "1"}
    assert out["engine"]["extensions"] == 2


def test_solve_charity_and_weights(e1_file, tmp_path, capsys):
    w = tmp_path / "w.json"
    w.write_text("[1, \"1/2\"]")
    code = main(["solve", "--instance", e1_file, "--p", "-inf", "--mode", "charity",
                 "--epsilon", "1/10", "--weights", str(w), "--oracle"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0 and out["mode"] == "charity" and out["epsilon"] == "1/10"


def test_check(e1_file, tmp_path, capsys):
    a = tmp_path / "a.json"
    a.write_text('{"bundles": [[0], [1, 2, 3]], "pool": []}')
    assert main(["check", "--instance", e1_file, "--allocation", str(a)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ef1"] and rep["exact_efx"]
    a.write_text('{"bundles": [[], [0, 1, 2, 3]], "pool": []}')
    assert main(["check", "--instance", e1_file, "--allocation", str(a), "--alpha", "1/2"]) == 2


def test_oracle(e1_file, capsys):
    assert main(["oracle", "--instance", e1_file, "--p", "0", "-inf"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out[0]["allocation"]["bundles"] == [[1, 3], [0, 2]]
    assert out[0]["values"] == [7, 13]
    assert out[1]["p"] == "-inf"


def test_bench(capsys):
    code = main(["bench", "--family", "xos", "coverage", "--n", "2", "--m", "4",
                 "--trials", "2", "--p-list", "-inf", "0", "1"])
    cap = capsys.readouterr()
    lines = [json.loads(l) for l in cap.out.splitlines()]
    assert code == 0
    assert sum(1 for l in lines if "aggregate" not in l) == 2 * 2 * 3 * 2
    assert "family" in cap.err.splitlines()[0]


@pytest.mark.parametrize("argv", [
    ["solve", "--instance", "/nonexistent.json", "--p", "0"],
    ["solve", "--p", "0"],
    ["solve", "--instance", "x", "--p", "3/2"],
    ["bench", "--family", "xos", "--n", "3", "--m", "2"],
    ["bogus"],
])
def test_input_errors(argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 3


def test_bad_instance_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "m": 1, "valuations": []}')
    assert main(["solve", "--instance", str(bad), "--p", "0"]) == 3
    bad.write_text("{")
    assert main(["oracle", "--instance", str(bad), "--p", "0"]) == 3


def test_module_entry_point(e1_file):
    proc = subprocess.run([sys.executable, "-m", "fairdiv", "oracle", "--instance", e1_file,
                           "--p", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)[0]["welfare"] == "21/2"  # mean of 10 and 11
