"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints at the
end of the run.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from mushybench import cli, fdm, harness, similarity as sim
from mushybench.linearization import integrate_fraction_ode, solve_mushy_diffusivity
from mushybench.material import closed_form_fraction
from propgen import random_property_sets

DATA = Path(__file__).resolve().parents[1] / "data" / "vt3-1.json"


def record(cid, text, passed, detail):
    ACCEPTANCE_LINES.append((cid, text, bool(passed), detail))
    assert passed, f"criterion {cid} ({text}) failed: {detail}"


def test_c01_golden_mushy_diffusivity(tmp_path):
    t0 = time.perf_counter()
    code = cli.main(["linearize", "--material", str(DATA), "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    alpha = json.loads((tmp_path / "linearization.json").read_text())["alpha_sl"]
    rel = abs(alpha - 2.26891e-7) / 2.26891e-7
    record(1, "golden alpha_sl", code == 0 and rel <= 5e-4 and elapsed < 1.0,
           f"alpha_sl={alpha:.6e} rel={rel:.2e} time={elapsed:.2f}s")


def test_c02_golden_front_coefficients(vt31):
    t0 = time.perf_counter()
    sol = sim.solve_exact(vt31, 800.0, 1650.0)
    elapsed = time.perf_counter() - t0
    R = sol.roots
    rel_s = abs(R.k_s - 0.00134109) / 0.00134109
    rel_l = abs(R.k_l - 0.00206009) / 0.00206009
    ok = rel_s <= 1e-3 and rel_l <= 1e-3 and R.relative_residual_s <= 1e-9 and R.relative_residual_l <= 1e-9
    record(2, "golden k_s, k_l", ok and elapsed < 1.0,
           f"k_s={R.k_s:.6g} ({rel_s:.1e}) k_l={R.k_l:.6g} ({rel_l:.1e}) "
           f"res={R.relative_residual_s:.1e}/{R.relative_residual_l:.1e} time={elapsed:.2f}s")


def test_c03_golden_enthalpies(sol):
    B = sol.boundaries
    golden = {"H_out": 2.16e9, "H_init": 10.5057e9, "H_s": 4.185e9, "H_l": 10.3455e9}
    computed = {"H_out": B.H_out, "H_init": B.H_init, "H_s": B.H_s, "H_l": B.H_l}
    bad = {k: computed[k] for k in golden if float(f"{computed[k]:.6g}") != golden[k]}
    detail = ", ".join(f"{k}={computed[k]:.6g}" for k in golden)
    if bad:
        detail += "; mismatched: " + ", ".join(f"{k} {v:.6g} vs {golden[k]:.6g}" for k, v in bad.items())
    record(3, "golden enthalpies", not bad, detail)


def test_c04_closed_form_vs_ode(vt31, lin):
    worst = 0.0
    for props in [vt31] + random_property_sets(50):
        res = lin if props is vt31 else solve_mushy_diffusivity(props)
        table = integrate_fraction_ode(props, res.alpha_sl, 9990)[::10]
        assert table.shape[0] == 1000
        diff = np.max(np.abs(closed_form_fraction(res.model, table[:, 0]) - table[:, 1]))
        worst = max(worst, float(diff))
    record(4, "closed form vs RK4 (VT3-1 + 50 random sets)", worst <= 1e-8, f"max abs diff {worst:.2e}")


def test_c05_similarity_invariance(sol):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        x, t, c = rng.uniform(0.0, 0.1), rng.uniform(1.0, 200.0), rng.uniform(0.2, 5.0)
        diff = abs(sim.enthalpy_field(sol, x, t) - sim.enthalpy_field(sol, c * x, c * c * t))
        worst = max(worst, diff / sol.boundaries.H_init)
    record(5, "similarity invariance", worst <= 1e-9, f"max |dH|/H_init {worst:.2e}")


def _region_samples(sol, rng, which, n=30):
    t = rng.uniform(5.0, 500.0, n)
    X_s, X_l = sol.roots.k_s * np.sqrt(t), sol.roots.k_l * np.sqrt(t)
    u = rng.uniform(0.05, 0.95, n)
    ell = np.sqrt(sol.diffusivities.alpha_l * t)
    if which == "solid":
        return u * X_s, t, 1e-4 * X_s
    if which == "mush":
        return X_s + u * (X_l - X_s), t, 1e-4 * (X_l - X_s)
    return X_l + 3 * u * ell, t, 1e-4 * ell


def test_c06_derivative_oracles(sol):
    rng = np.random.default_rng(6)
    worst_x = worst_t = 0.0
    for which in ("solid", "mush", "liquid"):
        x, t, h = _region_samples(sol, rng, which)
        fd_x = (sim.temperature_field(sol, x + h, t) - sim.temperature_field(sol, x - h, t)) / (2 * h)
        g = sim.temperature_gradient(sol, x, t)
        worst_x = max(worst_x, float(np.max(np.abs(g - fd_x) / np.abs(g))))
        dt = 1e-3
        fd_t = (sim.temperature_field(sol, x, t + dt) - sim.temperature_field(sol, x, t - dt)) / (2 * dt)
        r = sim.cooling_rate(sol, x, t)
        worst_t = max(worst_t, float(np.max(np.abs(r - fd_t) / np.abs(r))))
    record(6, "derivative oracles", worst_x <= 1e-5 and worst_t <= 1e-5,
           f"max rel dT/dx {worst_x:.1e}, dT/dt {worst_t:.1e}")


def test_c07_scaling_laws(sol):
    t = np.array([1.0, 10.0, 100.0])
    rate_t = sim.liquidus_cooling_rate(sol, t) * t
    G_rt = sim.liquidus_gradient(sol, t) * np.sqrt(t)
    spread = max(np.ptp(rate_t) / abs(rate_t[0]), np.ptp(G_rt) / abs(G_rt[0]))
    slope = np.polyfit(np.log(t), np.log(sim.primary_spacing_proxy(sol, t)), 1)[0]
    record(7, "scaling laws", spread <= 1e-12 and abs(slope - 0.375) <= 1e-6,
           f"rel spread {spread:.1e}, spacing slope {slope:.9f}")


def test_c08_benchmark_agreement(vt31, sol):
    grid = fdm.GridSpec(0.5, 500, 0.1, 500.0, (20.0, 500.0))
    t0 = time.perf_counter()
    run = fdm.run(vt31, sol.model, grid, 800.0, 1650.0)
    elapsed = time.perf_counter() - t0
    report = harness.compare(run, sol, (20.0, 500.0))
    front = report.front
    window = (front.t >= 50.0) & (front.t <= 500.0)
    max_s = float(np.nanmax(np.abs(front.eps_s[window])))
    max_l = float(np.nanmax(np.abs(front.eps_l[window])))
    eT20 = report.summary["max_abs_eps_T_pct_t20"]
    eT500 = report.summary["max_abs_eps_T_pct_t500"]
    ok = max_s <= 2.0 and max_l <= 2.0 and eT20 <= 1.0 and eT500 <= 1.0 and elapsed <= 30.0
    record(8, "benchmark agreement on the N=500, tau=0.1 grid", ok,
           f"|eps_x| solidus {max_s:.2f}% liquidus {max_l:.2f}% (<=2); "
           f"|eps_T| t=20 {eT20:.2f}% t=500 {eT500:.3f}% (<=1); run {elapsed:.1f}s")


def test_c09_convergence(vt31, sol):
    scenario = harness.Scenario(vt31, grid=fdm.GridSpec(0.5, 500, 0.1, 500.0, (500.0,)),
                                thresholds=harness.Thresholds(temp_times=(500.0,)))
    t0 = time.perf_counter()
    rows = harness.convergence_study(scenario, 2, sol=sol)
    elapsed = time.perf_counter() - t0
    factor = rows[0].max_eps_x_pct / rows[1].max_eps_x_pct
    record(9, "convergence under (h, tau) halving", factor >= 1.2 and elapsed <= 300.0,
           f"max|eps_x| {rows[0].max_eps_x_pct:.3f}% -> {rows[1].max_eps_x_pct:.3f}% "
           f"(factor {factor:.2f}), {elapsed:.1f}s")


def test_c10_determinism(tmp_path):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        cli.main(["compare", "--material", str(DATA), "--out", str(out)])
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    same = outputs[0] == outputs[1]
    n = sum(1 for k in outputs[0] if k.endswith((".csv", ".json")))
    record(10, "determinism of compare outputs", same and n > 0, f"{n} files compared, identical={same}")
