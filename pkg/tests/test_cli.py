import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from blowup_lab.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines() if l.startswith("{")]
    return code, lines


def test_besselfn(capsys):
    code, out = run(capsys, "besselfn", "--kind", "i", "--nu", 0.5, "--x", 1.0)
    assert code == 0
    assert out[0]["value"] == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-13)
    code, out = run(capsys, "besselfn", "--kind", "k", "--nu", 0.5, "--x", 800)
    assert out[0]["value"] is None or out[0]["value"] < 1e-300
    assert out[0]["log_value"] == pytest.approx(0.5 * math.log(math.pi / 1600) - 800, rel=1e-14)


def test_compare_writes_table(capsys, tmp_path):
    out_csv = tmp_path / "cmp.csv"
    code, out = run(capsys, "compare", "--config", CONFIGS / "standard.cfg", "--t-end", 20,
                    "--dt", 0.5, "--out", out_csv)
    assert code == 0 and out[0]["t0"] == 0.5
    rows = list(csv.DictReader(out_csv.open()))
    assert list(rows[0]) == ["t", "J", "A", "F0_ode"]
    for r in rows:
        t, J, A = float(r["t"]), float(r["J"]), float(r["A"])
        assert J > 0
        if t >= out[0]["T1"]:
            assert A <= J


def test_kato_check(capsys):
    code = main(["kato-check", "--config", str(CONFIGS / "kato_example.cfg"), "--oracle"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rep["bound"] > 0 and rep["oracle"]["blow_up"]
    assert rep["oracle"]["t_hi"] <= rep["bound"]


def test_lifespan_eps_bar(capsys):
    code, out = run(capsys, "lifespan", "--config", CONFIGS / "delta_zero.cfg", "--eps-bar", 1e-6)
    assert code == 0
    assert out[0]["zeta"] == pytest.approx(math.log(1e6) ** 2 / 4, rel=1e-12)
    assert out[0]["asymptote"] == pytest.approx(out[0]["zeta"], rel=1e-12)


def test_lifespan_flags_override_config(capsys):
    code, out = run(capsys, "lifespan", "--config", CONFIGS / "standard.cfg", "--eps", 0.01)
    assert code == 0 and out[0]["eps"] == 0.01
    assert out[0]["bound"] == pytest.approx(3 * out[0]["zeta"])
    assert 0 < out[0]["eps_bar"] < 1


def test_simulate(capsys, tmp_path):
    out_csv = tmp_path / "run.csv"
    code, out = run(capsys, "simulate", "--config", CONFIGS / "standard.cfg", "--dr", 0.02,
                    "--t-max", 30, "--out", out_csv)
    assert code == 0 and out[0]["blow_up"]
    assert 5.0 < out[0]["t_lo"] < out[0]["t_hi"] < 6.0
    assert Path(out[0]["sidecar"]).exists()


def test_sweep_and_fit(capsys, tmp_path):
    out_csv = tmp_path / "sweep.csv"
    code, out = run(capsys, "sweep", "--config", CONFIGS / "standard.cfg", "--eps-start", 0.5,
                    "--eps-stop", 0.05, "--eps-count", 3, "--t-max", 40, "--dr", 0.02,
                    "--workers", 1, "--out", out_csv)
    assert code == 0 and out[-1]["consistent"]
    assert [r["status"] for r in out[:-1]] == ["ok"] * 3
    code, fit = run(capsys, "fit", "--in", out_csv)
    assert code == 0 and fit[0]["points_used"] == 3 and fit[0]["exponent_fixed"] == 2.0


def test_fit_needs_alpha(capsys, tmp_path):
    p = tmp_path / "rows.csv"
    p.write_text("eps,t_blow_lo,t_blow_hi,zeta,bound_3zeta,asymptote,status\n"
                 "0.1,1,1,1,1,1,ok\n0.01,2,2,1,1,1,ok\n0.001,3,3,1,1,1,ok\n")
    assert main(["fit", "--in", str(p)]) == 2
    assert main(["fit", "--in", str(p), "--alpha", "0"]) == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "blowup_lab", "besselfn", "--kind", "k",
                          "--nu", "0", "--x", "1"], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["value"] == pytest.approx(0.42102443824070834, rel=1e-14)
