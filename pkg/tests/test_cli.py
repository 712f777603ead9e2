import json
import subprocess
import sys

import pytest

from homcodes import cli, sim
from homcodes.sim import scaling_model

ROW1 = "abcba(cb)^2abcb,(bac)^6,(bacba)^4"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def hyper30(tmp_path, capsys):
    path = tmp_path / "h30.json"
    assert run(capsys, "build", "hyperbolic", "--r", "5", "--s", "4", "--relators", ROW1, "--out", str(path))[0] == 0
    return path


def test_build_hyperbolic(hyper30):
    data = json.loads(hyper30.read_text())
    assert data["n"] == 30
    assert data["meta"]["run_config"]["relators"] == ROW1
    assert not (hyper30.parent / "h30.json.partial").exists()


def test_params_report(hyper30, capsys):
    code, out, _ = run(capsys, "params", str(hyper30), "--count")
    assert code == 0
    assert out.splitlines()[0] == "n=30 k=5 d_Z=3 N_Z=10 d_X=4 N_X=75"
    code, out, _ = run(capsys, "distance", str(hyper30), "--json")
    rep = json.loads(out)
    assert (rep["d_Z"], rep["d_X"]) == (3, 4)


def test_build_families(tmp_path, capsys):
    t4 = tmp_path / "t4.json"
    run(capsys, "build", "toric4d", "--L", "2", "--out", str(t4))
    assert json.loads(t4.read_text())["n"] == 96
    tess = tmp_path / "tess.json"
    run(capsys, "build", "tesseract", "--L", "2", "--out", str(tess))
    _, out, _ = run(capsys, "params", str(tess))
    assert "k=1" in out.split()
    _, out, _ = run(capsys, "distance", str(tess))
    assert "d_Z=4" in out.split()
    tor = tmp_path / "tor.json"
    run(capsys, "build", "toric2d", "--L", "4", "--out", str(tor))
    _, out, _ = run(capsys, "distance", str(tor))
    assert "d_Z=4 d_X=4" in out
    dual = tmp_path / "dual.json"
    run(capsys, "build", "dual", "--in", str(tor), "--out", str(dual))
    a, b = json.loads(tor.read_text()), json.loads(dual.read_text())
    assert (a["n"], a["levels"]) == (b["n"], b["levels"])


def test_build_to_stdout_and_errors(capsys):
    code, out, err = run(capsys, "build", "rotated", "--L", "4")
    assert code == 0 and json.loads(out)["n"] == 16 and "k=2" in err
    code, _, err = run(capsys, "build", "toric2d", "--L", "1")
    assert code == 1 and err
    code, _, err = run(capsys, "build", "hyperbolic", "--r", "5", "--s", "4", "--relators", "(r")
    assert code == 1 and err
    code, _, err = run(capsys, "params", "/nonexistent/file.json")
    assert code == 1


def test_simulate_is_deterministic(tmp_path, capsys):
    tor = tmp_path / "tor.json"
    run(capsys, "build", "toric2d", "--L", "4", "--out", str(tor))
    outs = []
    path = tmp_path / "a.csv"
    for _ in range(2):
        code, _, _ = run(capsys, "simulate", "--mode", "2d-perfect", "--code", str(tor),
                         "--p", "0.05,0.1", "--trials", "400", "--seed", "3", "--workers", "1",
                         "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    config, rows = sim.read_csv(outs[0].decode())
    assert config["seed"] == 3
    assert [r["p"] for r in rows] == ["0.05", "0.1"]


def test_simulate_rejects_empty_p(tmp_path, capsys):
    tor = tmp_path / "tor.json"
    run(capsys, "build", "toric2d", "--L", "3", "--out", str(tor))
    code, _, err = run(capsys, "simulate", "--mode", "2d-perfect", "--code", str(tor), "--p", "",
                       "--trials", "10")
    assert code == 1 and err


def test_simulate_memory_and_noisy(tmp_path, capsys):
    path = tmp_path / "m.csv"
    code, _, _ = run(capsys, "simulate", "--mode", "4d-memory", "--L", "3", "--p", "0.0",
                     "--trials", "64", "--max-cycles", "5", "--words", "1", "--workers", "1",
                     "--out", str(path))
    assert code == 0
    _, rows = sim.read_csv(path.read_text())
    assert rows[0]["mean_T"] == "5" and rows[0]["censored"] == "64"
    tor = tmp_path / "tor.json"
    run(capsys, "build", "toric2d", "--L", "3", "--out", str(tor))
    code, out, _ = run(capsys, "simulate", "--mode", "2d-noisy", "--code", str(tor), "--p", "0.01",
                       "--trials", "50", "--workers", "1")
    _, rows = sim.read_csv(out)
    assert rows[0]["T_rounds"] == "3"


def _write_synthetic(path):
    rows = []
    for L in (4, 6, 8):
        for p in (0.015, 0.0175, 0.02, 0.0225, 0.025):
            y = float(scaling_model(p, L, 0.02, 1.0, [0.3, 1.5, 2.0]))
            rows.append({c: 0 for c in sim.SIM_COLUMNS} | {"n": L, "p": p, "p_bar": y, "trials": 10**12})
    sim.write_csv(rows, sim.SIM_COLUMNS, {}, out=path)


def test_crossings_and_fit(tmp_path, capsys):
    path = tmp_path / "syn.csv"
    _write_synthetic(path)
    code, out, _ = run(capsys, "crossings", str(path))
    assert code == 0
    hull = out.splitlines()[-1]
    lo, hi = (float(x) for x in hull[len("hull ["):-1].split(", "))
    assert lo == pytest.approx(0.02, abs=1e-9) and hi == pytest.approx(0.02, abs=1e-9)
    code, out, _ = run(capsys, "fit", str(path))
    fields = dict(kv.split("=") for kv in out.split() if "=" in kv)
    assert float(fields["p_c"]) == pytest.approx(0.02, abs=1e-6)
    assert float(fields["nu"]) == pytest.approx(1.0, abs=1e-5)


def test_bounds_and_approx(capsys):
    _, out, _ = run(capsys, "bounds", "--r", "5", "--s", "5", "--c", "1.21")
    assert out.strip() == "perfect 0.30% noisy 0.025%"
    _, out, _ = run(capsys, "approx", "--nd", "10", "--d", "3", "--p", "0.001", "--T", "1")
    assert float(out) == pytest.approx(3e-5)
    code, _, _ = run(capsys, "approx", "--nd", "10", "--d", "3")
    assert code == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "homcodes", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("homcodes ")
