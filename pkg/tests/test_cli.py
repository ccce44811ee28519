import csv
import json
import os
from pathlib import Path

import pytest

from mushybench import cli
from mushybench.material import VT3_1

DATA = Path(__file__).resolve().parents[1] / "data" / "vt3-1.json"
SMALL = ["--nodes", "100", "--tau", "0.5", "--t-end", "20"]


def _material(tmp_path, name="m.json", **changes):
    data = VT3_1.to_dict()
    data.update(changes)
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_linearize(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["linearize", "--material", str(DATA), "--out", str(out)]) == cli.EXIT_OK
    data = json.loads((out / "linearization.json").read_text())
    assert data["alpha_sl"] == pytest.approx(2.26891e-7, rel=5e-4)
    assert data["eutectic_experimental"] is False
    assert (out / "linearization_scan.csv").exists()
    assert "alpha_sl" in capsys.readouterr().out


def test_linearize_eutectic_flagged(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["linearize", "--material", _material(tmp_path, lambda0=0.3), "--out", str(out)]) == 0
    assert json.loads((out / "linearization.json").read_text())["eutectic_experimental"] is True


def test_bad_ordering_exits_1_without_files(tmp_path, capsys):
    out = tmp_path / "out"
    path = _material(tmp_path, T_s=1620.0, T_l=1620.0)
    assert cli.main(["linearize", "--material", path, "--out", str(out)]) == cli.EXIT_INPUT
    assert "T_s < T_l" in capsys.readouterr().err
    assert not out.exists()


def test_missing_material_file(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["compare", "--material", str(tmp_path / "nope.json"), "--out", str(out)]) == 1
    assert not out.exists()


def test_root_not_found_exit_2_with_scan(tmp_path, capsys):
    out = tmp_path / "out"
    # C_l << C_s makes 1 + pT change sign inside the mush: no admissible diffusivity
    path = _material(tmp_path, C_l=300.0)
    assert cli.main(["linearize", "--material", path, "--out", str(out)]) == cli.EXIT_SOLVER
    assert "solver failure" in capsys.readouterr().err
    rows = list(csv.reader(open(out / "root_scan.csv")))
    assert rows[0] == ["argument", "residual"] and len(rows) > 100


def test_exact(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["exact", "--material", str(DATA), "--out", str(out)]) == 0
    data = json.loads((out / "exact.json").read_text())
    assert data["k_s"] == pytest.approx(0.00134109, rel=1e-3)
    assert data["k_l"] == pytest.approx(0.00206009, rel=1e-3)
    for name in ("exact_profile_t020.0s.csv", "exact_profile_t500.0s.csv"):
        rows = list(csv.reader(open(out / name)))
        assert len(rows) == 502 and rows[1][3] == "800.0"


@pytest.mark.parametrize("samples", ["0,20", "-5"])
def test_exact_rejects_nonpositive_sample(tmp_path, samples):
    out = tmp_path / "out"
    assert cli.main(["exact", "--material", str(DATA), "--out", str(out), "--samples", samples]) == 1
    assert not out.exists()


@pytest.mark.parametrize("tau", ["0", "-0.1"])
def test_fdm_rejects_bad_tau(tmp_path, tau):
    out = tmp_path / "out"
    assert cli.main(["fdm", "--material", str(DATA), "--out", str(out), "--tau", tau]) == 1
    assert not out.exists()


def test_fdm_defaults(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["fdm", "--material", str(DATA), "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "front_trace.csv")))
    assert rows[0] == ["t_s", "Xs_m", "Xl_m"]
    assert float(rows[-1][0]) == pytest.approx(500.0)
    assert (out / "profile_t020.0s.csv").exists() and (out / "profile_t500.0s.csv").exists()


def test_coarse_grid_has_larger_errors(tmp_path):
    fine, coarse = tmp_path / "fine", tmp_path / "coarse"
    base = ["compare", "--material", str(DATA), "--t-end", "100", "--levels", "1"]
    cli.main(base + ["--out", str(fine)])
    assert cli.main(base + ["--out", str(coarse), "--nodes", "10"]) in (0, 3)
    f = json.loads((fine / "summary.json").read_text())
    c = json.loads((coarse / "summary.json").read_text())
    assert c["max_abs_eps_T_pct_t100"] > f["max_abs_eps_T_pct_t100"]
    assert c["max_abs_eps_xs_pct"] > f["max_abs_eps_xs_pct"]


def test_env_output_fallback(tmp_path, monkeypatch):
    out = tmp_path / "from_env"
    monkeypatch.setenv(cli.ENV_OUT, str(out))
    assert cli.main(["linearize", "--material", str(DATA)]) == 0
    assert (out / "linearization.json").exists()


def test_default_output_dir(tmp_path, monkeypatch):
    monkeypatch.delenv(cli.ENV_OUT, raising=False)
    monkeypatch.chdir(tmp_path)
    assert cli.main(["linearize", "--material", str(DATA)]) == 0
    assert (tmp_path / cli.DEFAULT_OUT / "linearization.json").exists()


def test_impossible_tolerance_exit_3_with_report(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["compare", "--material", str(DATA), "--out", str(out), "--tolerance", "0"] + SMALL)
    assert code == cli.EXIT_ACCEPTANCE
    assert "acceptance failed" in capsys.readouterr().err
    summary = json.loads((out / "summary.json").read_text())
    assert summary["acceptance_passed"] is False
    assert (out / "front_errors.csv").exists() and (out / "convergence.csv").exists()


def test_negative_tolerance_rejected(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["compare", "--material", str(DATA), "--out", str(out), "--tolerance", "-1"]) == 1
    assert not out.exists()


def test_bad_samples_argument(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["fdm", "--material", str(DATA), "--samples", "a,b"])


def test_repeated_runs_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        cli.main(["compare", "--material", str(DATA), "--out", str(out)] + SMALL)
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    env = dict(os.environ, PYTHONWARNINGS="ignore")
    proc = subprocess.run(
        [sys.executable, "-m", "mushybench", "linearize", "--material", str(DATA), "--out", str(tmp_path)],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0, proc.stderr


@pytest.mark.slow
def test_compare_defaults_pass_acceptance(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["compare", "--material", str(DATA), "--out", str(out)])
    names = {p.name for p in out.iterdir()}
    assert {"summary.json", "front_errors.csv", "front_trace.csv", "convergence.csv", "fraction_curve.csv",
            "temp_errors_t020.0s.csv", "temp_errors_t500.0s.csv", "linearization_scan.csv"} <= names
    assert code == cli.EXIT_OK
