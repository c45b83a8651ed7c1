import json
import subprocess
import sys

import pytest

from bcl.cli import main

C0 = {"theta": "1/4", "ps": ["1", "inf"]}
L2 = {"theta": "1/4", "ps": ["1", "2"]}


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def vector(pairs):
    return {"coords": [{"i": i, "v": v} for i, v in pairs]}


@pytest.fixture
def c0(tmp_path):
    return write(tmp_path, "c0.json", C0)


@pytest.fixture
def l2(tmp_path):
    return write(tmp_path, "l2.json", L2)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_command(c0, tmp_path, capsys):
    v = write(tmp_path, "x.json", vector([(3, 1.0), (10, 1.0)]))
    code, out, _ = run(["norm", c0, v], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["certificate"]["lower"] == pytest.approx(1.0)
    assert obj["manifest"]["command"] == "norm" and obj["manifest"]["version"]
    assert "wall_time" not in obj["certificate"]["stats"]


def test_norm_output_is_byte_identical(c0, tmp_path, capsys):
    v = write(tmp_path, "x.json", vector([(1, 0.5), (2, -1.5), (5, 2.0)]))
    outs = [run(["norm", c0, v], capsys)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_norm_agrees_with_oracle(l2, tmp_path, capsys):
    v = write(tmp_path, "x.json", vector([(1, 1.0), (2, 1.0), (3, -1.0), (4, 0.5)]))
    a = json.loads(run(["norm", l2, v], capsys)[1])["certificate"]["lower"]
    b = json.loads(run(["oracle", l2, v], capsys)[1])["value"]
    assert a == pytest.approx(b, abs=1e-9)


def test_norm_empty_vector(c0, tmp_path, capsys):
    v = write(tmp_path, "x.json", {"coords": []})
    code, out, _ = run(["norm", c0, v], capsys)
    assert code == 0 and json.loads(out)["certificate"]["lower"] == 0.0


def test_norm_budget_exit_code(c0, tmp_path, capsys):
    v = write(tmp_path, "x.json", vector([(i, 1.0) for i in range(1, 30)]))
    code, out, err = run(["norm", c0, v, "--budget", "50"], capsys)
    assert code == 2
    assert json.loads(out)["error"] == "budget exceeded" and "error" in err


def test_malformed_json_reports_location(c0, tmp_path, capsys):
    v = write(tmp_path, "bad.json", '{"coords": [\n  {"i": 1, "v": }]}')
    code, _, err = run(["norm", c0, v], capsys)
    assert code == 1 and "bad.json:2:" in err


def test_invalid_space_and_vector(tmp_path, capsys):
    bad_space = write(tmp_path, "s.json", {"theta": "1/2", "ps": ["1", "inf"]})
    v = write(tmp_path, "x.json", vector([(1, 1.0)]))
    assert run(["norm", bad_space, v], capsys)[0] == 1
    good = write(tmp_path, "c0.json", C0)
    bad_vec = write(tmp_path, "y.json", vector([(0, 1.0)]))
    assert run(["norm", good, bad_vec], capsys)[0] == 1
    assert run(["norm", str(tmp_path / "missing.json"), v], capsys)[0] == 1


def test_oracle_guard_is_input_error(c0, tmp_path, capsys):
    v = write(tmp_path, "x.json", vector([(i, 1.0) for i in range(1, 12)]))
    assert run(["oracle", c0, v], capsys)[0] == 1


def test_out_flag_writes_file(c0, tmp_path, capsys):
    v = write(tmp_path, "x.json", vector([(2, 1.0)]))
    out = tmp_path / "cert.json"
    code, stdout, _ = run(["norm", c0, v, "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["certificate"]["upper"] == 1.0


def test_estimates_command(l2, capsys):
    code, out, _ = run(["estimates", l2, "--trials", "6", "--m", "3", "--seed", "4"], capsys)
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0] == "trial,m,lower_bound,norm,upper_bound,pass"
    assert len(lines) == 7 and all(l.endswith(",1") for l in lines[1:])
    assert out == run(["estimates", l2, "--trials", "6", "--m", "3", "--seed", "4"], capsys)[1]


def test_estimates_rejects_bad_counts(l2, capsys):
    assert run(["estimates", l2, "--trials", "0"], capsys)[0] == 1


def test_spreading_command(c0, capsys):
    code, out, _ = run(["spreading", c0, "--Ks", "1,2,4"], capsys)
    assert code == 0
    rows = [l.split(",") for l in out.splitlines() if not l.startswith("#")][1:]
    assert [r[0] for r in rows] == ["1", "2", "4"]
    assert float(rows[0][2]) == pytest.approx(0.0, abs=1e-12)


def test_spreading_needs_two_ks(c0, capsys):
    assert run(["spreading", c0, "--Ks", "4"], capsys)[0] == 1
    assert run(["spreading", c0, "--Ks", "4,2"], capsys)[0] == 1
    assert run(["spreading", c0, "--Ks", "a,b"], capsys)[0] == 1


def test_krivine_command(c0, l2, capsys):
    code, out, _ = run(["krivine", c0, "--p", "2"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["constants"]["N"] == 7 and all(c["passed"] for c in obj["checks"])
    code, out, _ = run(["krivine", l2, "--p", "3/2"], capsys)
    assert code == 0 and json.loads(out)["constants"]["N"] == 65


def test_krivine_p_in_f_and_outside(c0, l2, capsys):
    assert run(["krivine", c0, "--p", "1"], capsys)[0] == 3
    code, out, _ = run(["krivine", l2, "--p", "3"], capsys)
    assert code == 0 and json.loads(out)["result"] == "OUTSIDE"
    assert run(["krivine", c0, "--p", "x"], capsys)[0] == 1


def test_console_entry_point(c0, tmp_path):
    v = write(tmp_path, "x.json", vector([(1, 1.0)]))
    proc = subprocess.run([sys.executable, "-m", "bcl.cli", "norm", c0, v],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["certificate"]["lower"] == 1.0
