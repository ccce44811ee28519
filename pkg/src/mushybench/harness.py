"""End-to-end benchmark: linearize, solve exactly, run the FDM, compare.

Error metrics are signed percentages relative to the exact value:
``eps_x = (X_num - X_exact) / X_exact * 100`` for each front and
``eps_T = (T_num - T_exact) / T_exact * 100`` for a profile. Samples at
t = 0 (exact front at the origin) and samples where a numeric front was not
found are skipped and counted. Samples with ``t < 10 tau`` stay in the
series but are left out of the summary statistics while the numeric front
forms.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import fdm, material, similarity
from .errors import ConfigurationError, PartialResultsError, ReportError
from .fdm import FrontTrace, GridSpec, RunResult
from .linearization import LinearizationResult, solve_mushy_diffusivity, write_scan_csv
from .material import MaterialProperties
from .similarity import ExactSolution, StefanRoots

TRANSIENT_STEPS = 10


@dataclass(frozen=True)
class Thresholds:
    """Acceptance bounds of the benchmark comparison (percent)."""

    front_pct: float = 2.0
    temp_pct: float = 1.0
    window: Tuple[float, float] = (50.0, 500.0)
    temp_times: Tuple[float, ...] = (20.0, 500.0)
    convergence_factor: float = 1.2


@dataclass(frozen=True)
class Scenario:
    props: MaterialProperties
    T_out: float = 800.0
    T_init: float = 1650.0
    grid: GridSpec = field(default_factory=GridSpec)
    thresholds: Thresholds = field(default_factory=Thresholds)
    out_dir: Optional[Path] = None

    def __post_init__(self):
        p = self.props
        if not self.T_out < p.T_s < p.T_l < self.T_init:
            raise ConfigurationError(
                f"need T_out < T_s < T_l < T_init, got {self.T_out!r}, {p.T_s!r}, {p.T_l!r}, {self.T_init!r}"
            )
        if self.T_out < 0:
            raise ConfigurationError("T_out must be >= 0 C")
        missing = [t for t in self.thresholds.temp_times if t not in self.grid.sample_times]
        if missing:
            raise ConfigurationError(f"temperature-error times {missing} are not sample times")


@dataclass
class FrontErrorSeries:
    t: np.ndarray
    eps_s: np.ndarray
    eps_l: np.ndarray
    skipped_s: int
    skipped_l: int

    def summary(self, tau: float) -> Dict[str, float]:
        keep = self.t >= TRANSIENT_STEPS * tau
        out = {}
        for name, eps in (("xs", self.eps_s), ("xl", self.eps_l)):
            vals = np.abs(eps[keep & np.isfinite(eps)])
            out[f"max_abs_eps_{name}_pct"] = float(vals.max()) if vals.size else math.nan
            out[f"mean_abs_eps_{name}_pct"] = float(vals.mean()) if vals.size else math.nan
        return out

    def window_max(self, lo: float, hi: float) -> float:
        m = (self.t >= lo) & (self.t <= hi)
        vals = np.abs(np.concatenate([self.eps_s[m], self.eps_l[m]]))
        vals = vals[np.isfinite(vals)]
        return float(vals.max()) if vals.size else math.nan


def front_error_series(trace: FrontTrace, roots: StefanRoots) -> FrontErrorSeries:
    """Percentage front-position errors for every trace entry."""
    if len(trace) == 0:
        raise ReportError("front trace is empty")
    t, xs, xl = trace.arrays()
    found_s = np.array(trace.found_s) & (t > 0)
    found_l = np.array(trace.found_l) & (t > 0)
    root_t = np.sqrt(t)
    eps_s = np.full(t.shape, math.nan)
    eps_l = np.full(t.shape, math.nan)
    exact_s = roots.k_s * root_t[found_s]
    exact_l = roots.k_l * root_t[found_l]
    eps_s[found_s] = (xs[found_s] - exact_s) / exact_s * 100.0
    eps_l[found_l] = (xl[found_l] - exact_l) / exact_l * 100.0
    return FrontErrorSeries(
        t=t, eps_s=eps_s, eps_l=eps_l,
        skipped_s=int((~found_s).sum()), skipped_l=int((~found_l).sum()),
    )


def temperature_error_profile(x, T_num, sol: ExactSolution, t: float) -> np.ndarray:
    """Per-node percentage error of a numeric profile against the exact field."""
    x = np.asarray(x, dtype=float)
    T_num = np.asarray(T_num, dtype=float)
    T_exact = np.atleast_1d(similarity.temperature_field(sol, x, t))
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = (T_num - T_exact) / T_exact * 100.0
    return np.where(T_exact != 0.0, eps, math.nan)


@dataclass
class ComparisonReport:
    front: FrontErrorSeries
    temp_errors: Dict[float, Tuple[np.ndarray, np.ndarray]]
    summary: Dict[str, float]


def compare(run: RunResult, sol: ExactSolution, temp_times) -> ComparisonReport:
    front = front_error_series(run.trace, sol.roots)
    temp_errors = {}
    summary = front.summary(run.grid.tau)
    for t in temp_times:
        eps = temperature_error_profile(run.x, run.profiles[t], sol, t)
        temp_errors[t] = (run.x, eps)
        summary[f"max_abs_eps_T_pct_t{t:g}"] = float(np.nanmax(np.abs(eps)))
    return ComparisonReport(front=front, temp_errors=temp_errors, summary=summary)


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    h: float
    tau: float
    max_eps_x_pct: float
    max_eps_T_pct: float


Runner = Callable[..., RunResult]


def _final_errors(run: RunResult, sol: ExactSolution) -> Tuple[float, float]:
    t_end = run.grid.t_end
    series = front_error_series(run.trace, sol.roots)
    last = np.flatnonzero(np.isclose(series.t, t_end, rtol=0, atol=0.5 * run.grid.tau))
    if last.size == 0:
        raise ReportError(f"no front sample at t_end={t_end}")
    i = int(last[-1])
    eps_x = max(abs(series.eps_s[i]), abs(series.eps_l[i]))
    eps_T = float(np.nanmax(np.abs(temperature_error_profile(run.x, run.profiles[t_end], sol, t_end))))
    return float(eps_x), eps_T


def convergence_study(
    scenario: Scenario,
    levels: int,
    sol: Optional[ExactSolution] = None,
    runner: Runner = fdm.run,
    base_run: Optional[RunResult] = None,
    wall_budget: Optional[float] = None,
) -> List[ConvergenceRow]:
    """Errors at ``t_end`` while halving ``h`` and ``tau`` together.

    ``runner`` has the signature of :func:`fdm.run`; ``base_run`` reuses an
    existing level-0 run when its grid matches. When ``wall_budget`` seconds
    run out, :class:`PartialResultsError` carries the rows finished so far.
    """
    if levels < 1:
        raise ConfigurationError("levels must be >= 1")
    started = time.monotonic()
    if sol is None:
        sol = similarity.solve_exact(scenario.props, scenario.T_out, scenario.T_init)
    base = scenario.grid
    base = GridSpec(base.d, base.N, base.tau, base.t_end, tuple(sorted(set(base.sample_times) | {base.t_end})))
    rows = []
    for level in range(levels):
        grid = base.refined(2 ** level) if level else base
        if level == 0 and base_run is not None and base_run.grid.N == grid.N and base_run.grid.tau == grid.tau \
                and grid.t_end in base_run.profiles:
            run = base_run
        else:
            remaining = None if wall_budget is None else wall_budget - (time.monotonic() - started)
            if remaining is not None and remaining <= 0:
                raise PartialResultsError(f"convergence budget exhausted before level {level}", rows)
            try:
                run = runner(scenario.props, sol.model, grid, scenario.T_out, scenario.T_init, wall_budget=remaining)
            except PartialResultsError as exc:
                raise PartialResultsError(f"convergence budget exhausted during level {level}", rows) from exc
        eps_x, eps_T = _final_errors(run, sol)
        rows.append(ConvergenceRow(level, grid.h, grid.tau, eps_x, eps_T))
    return rows


def convergence_factors(rows: List[ConvergenceRow]) -> List[float]:
    return [
        rows[i - 1].max_eps_x_pct / rows[i].max_eps_x_pct if rows[i].max_eps_x_pct > 0 else math.inf
        for i in range(1, len(rows))
    ]


def fraction_curve(props: MaterialProperties, model, n: float = 1.5, points: int = 200) -> np.ndarray:
    """Columns: T, closed-form lambda, VT3-1 reference curve, power law with exponent n."""
    T = np.linspace(props.T_s, props.T_l, points)
    return np.column_stack([
        T,
        material.liquid_fraction(model, T),
        material.reference_fraction_vt(props, T),
        material.reference_fraction_power(props, T, n),
    ])


def write_fraction_curve_csv(table: np.ndarray, path) -> None:
    _write_rows(path, ["T_C", "lambda_analytical", "lambda_t", "lambda_n"], table)


def _cell(v):
    v = float(v)
    return repr(v) if math.isfinite(v) else ""


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_front_errors_csv(series: FrontErrorSeries, path) -> None:
    keep = np.isfinite(series.eps_s) | np.isfinite(series.eps_l)
    rows = zip(series.t[keep], series.eps_s[keep], series.eps_l[keep])
    _write_rows(path, ["t_s", "eps_xs_pct", "eps_xl_pct"], rows)


def write_convergence_csv(rows: List[ConvergenceRow], path) -> None:
    _write_rows(
        path, ["level", "h_m", "tau_s", "max_eps_x_pct", "max_eps_T_pct"],
        [(r.level, r.h, r.tau, r.max_eps_x_pct, r.max_eps_T_pct) for r in rows],
    )


def temp_errors_filename(t: float) -> str:
    return f"temp_errors_t{t:05.1f}s.csv"


def exact_profile_filename(t: float) -> str:
    return f"exact_profile_t{t:05.1f}s.csv"


def evaluate_acceptance(report: ComparisonReport, thresholds: Thresholds, convergence=None) -> Dict[str, dict]:
    """Pass/fail verdicts for the benchmark-agreement and convergence bounds."""
    lo, hi = thresholds.window
    front_max = report.front.window_max(lo, hi)
    checks = {
        "front_position": {
            "value_pct": front_max, "limit_pct": thresholds.front_pct,
            "passed": bool(front_max <= thresholds.front_pct),
        }
    }
    for t in thresholds.temp_times:
        val = report.summary[f"max_abs_eps_T_pct_t{t:g}"]
        checks[f"temperature_t{t:g}"] = {
            "value_pct": val, "limit_pct": thresholds.temp_pct, "passed": bool(val <= thresholds.temp_pct),
        }
    if convergence is not None and len(convergence) >= 2:
        factors = convergence_factors(convergence)
        checks["convergence"] = {
            "factors": factors, "limit": thresholds.convergence_factor,
            "passed": bool(all(f >= thresholds.convergence_factor for f in factors)),
        }
    return checks


@dataclass
class BenchmarkResult:
    scenario: Scenario
    linearization: LinearizationResult
    solution: ExactSolution
    run: RunResult
    report: ComparisonReport
    convergence: List[ConvergenceRow]
    acceptance: Dict[str, dict]
    summary: dict

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.acceptance.values())


def solution_summary(lin: LinearizationResult, sol: Optional[ExactSolution] = None) -> dict:
    out = {
        "alpha_s": lin.alpha_s,
        "alpha_sl": lin.alpha_sl,
        "alpha_l": lin.alpha_l,
        "lambda_residual": lin.residual,
        "alpha_sl_bracket": list(lin.bracket),
        "ode_a": lin.model.a,
        "ode_b": lin.model.b,
        "ode_p": lin.model.p,
        "eutectic_experimental": lin.model.lambda0 > 0,
    }
    if sol is not None:
        B, R = sol.boundaries, sol.roots
        out.update({
            "H_out": B.H_out, "H_init": B.H_init, "H_s": B.H_s, "H_l": B.H_l,
            "k_s": R.k_s, "k_l": R.k_l,
            "residual_s": R.residual_s, "residual_l": R.residual_l,
            "relative_residual_s": R.relative_residual_s,
            "relative_residual_l": R.relative_residual_l,
        })
    return out


def dump_json(data, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def run_benchmark(scenario: Scenario, levels: int = 2, write: bool = True) -> BenchmarkResult:
    """Full pipeline; writes every report file into ``scenario.out_dir`` when ``write``."""
    props = scenario.props
    lin = solve_mushy_diffusivity(props)
    sol = similarity.solve_exact(props, scenario.T_out, scenario.T_init, lin)
    run = fdm.run(props, sol.model, scenario.grid, scenario.T_out, scenario.T_init)
    report = compare(run, sol, scenario.thresholds.temp_times)
    convergence = convergence_study(scenario, levels, sol=sol, base_run=run) if levels >= 2 else []
    acceptance = evaluate_acceptance(report, scenario.thresholds, convergence or None)
    summary = solution_summary(lin, sol)
    summary.update(report.summary)
    summary.update({
        "skipped_front_samples_s": report.front.skipped_s,
        "skipped_front_samples_l": report.front.skipped_l,
        "transient_excluded_before_s": TRANSIENT_STEPS * scenario.grid.tau,
        "grid": {"d": scenario.grid.d, "N": scenario.grid.N, "tau": scenario.grid.tau, "t_end": scenario.grid.t_end},
        "T_out": scenario.T_out,
        "T_init": scenario.T_init,
        "acceptance": acceptance,
        "acceptance_passed": all(c["passed"] for c in acceptance.values()),
    })
    summary = _json_safe(summary)
    result = BenchmarkResult(scenario, lin, sol, run, report, convergence, acceptance, summary)
    if write:
        write_outputs(result)
    return result


def write_outputs(result: BenchmarkResult) -> None:
    out = result.scenario.out_dir
    if out is None:
        raise ConfigurationError("scenario has no output directory")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    sol, run = result.solution, result.run
    write_scan_csv(result.linearization, out / "linearization_scan.csv")
    fdm.write_trace_csv(run.trace, out / "front_trace.csv")
    fdm.write_profile_csvs(run, out)
    for t in sorted(run.profiles):
        if t > 0:
            similarity.write_profile_csv(sol, run.x, t, out / exact_profile_filename(t))
    write_front_errors_csv(result.report.front, out / "front_errors.csv")
    for t, (x, eps) in sorted(result.report.temp_errors.items()):
        _write_rows(out / temp_errors_filename(t), ["x_m", "eps_T_pct"], zip(x, eps))
    if result.convergence:
        write_convergence_csv(result.convergence, out / "convergence.csv")
    if result.scenario.props.T_m is not None:
        write_fraction_curve_csv(fraction_curve(result.scenario.props, sol.model), out / "fraction_curve.csv")
    dump_json(result.summary, out / "summary.json")
