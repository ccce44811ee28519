"""Implicit apparent-capacity finite-difference solver.

Each step solves

    tk[i-1/2]/h^2 T[i-1] - (t(k[i-1/2] + k[i+1/2])/h^2 + rho C_i) T[i] + tk[i+1/2]/h^2 T[i+1]
        = -rho C_i T_i^n

with capacity and conductivity frozen at the old time level and harmonic
means at the cell faces. Dirichlet values hold at both ends.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from . import material
from .errors import AssemblyError, ConfigurationError, PartialResultsError, SolverError
from .material import LiquidFractionModel, MaterialProperties


@dataclass(frozen=True)
class GridSpec:
    d: float = 0.5
    N: int = 500
    tau: float = 0.1
    t_end: float = 500.0
    sample_times: Sequence[float] = (20.0, 500.0)

    def __post_init__(self):
        if not (math.isfinite(self.d) and self.d > 0):
            raise ConfigurationError(f"domain length d must be > 0, got {self.d!r}")
        if int(self.N) != self.N or self.N < 10:
            raise ConfigurationError(f"node count N must be an integer >= 10, got {self.N!r}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ConfigurationError(f"time step tau must be > 0, got {self.tau!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= self.tau):
            raise ConfigurationError(f"t_end must be >= tau, got t_end={self.t_end!r}, tau={self.tau!r}")
        for ts in self.sample_times:
            if not 0.0 <= ts <= self.t_end:
                raise ConfigurationError(f"sample time {ts!r} outside [0, t_end]")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "sample_times", tuple(float(s) for s in self.sample_times))

    @property
    def h(self) -> float:
        return self.d / self.N

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.tau))

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.h

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same problem with ``h`` and ``tau`` divided by ``factor``."""
        return GridSpec(self.d, self.N * factor, self.tau / factor, self.t_end, self.sample_times)


@dataclass
class FieldState:
    T: np.ndarray
    t: float = 0.0
    step_index: int = 0


@dataclass(frozen=True)
class TridiagonalSystem:
    """Interior equations ``lower*T[i-1] + diag*T[i] + upper*T[i+1] = rhs``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray


def harmonic_mean(k1, k2):
    return 2.0 * k1 * k2 / (k1 + k2)


def assemble_step(state: FieldState, props: MaterialProperties, model: LiquidFractionModel, grid: GridSpec):
    """Coefficients of the N-1 interior equations at the current time level."""
    T = state.T
    bad = np.flatnonzero(~np.isfinite(T))
    if bad.size:
        node = int(bad[0])
        raise AssemblyError(f"non-finite temperature at node {node}", node=node)
    kappa = np.asarray(material.local_conductivity(props, model, T))
    C = np.asarray(material.apparent_capacity(props, model, T))
    k_face = harmonic_mean(kappa[:-1], kappa[1:])
    r = grid.tau / grid.h ** 2
    lower = r * k_face[:-1]
    upper = r * k_face[1:]
    rho_c = props.rho * C[1:-1]
    diag = -(lower + upper + rho_c)
    rhs = -rho_c * T[1:-1]
    for name, arr in (("lower", lower), ("diag", diag), ("upper", upper), ("rhs", rhs)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            node = int(bad[0]) + 1
            raise AssemblyError(f"non-finite {name} coefficient at node {node}", node=node)
    return TridiagonalSystem(lower=lower, diag=diag, upper=upper, rhs=rhs)


def step(state: FieldState, props: MaterialProperties, model: LiquidFractionModel, grid: GridSpec) -> FieldState:
    """Advance one implicit step of length ``tau``."""
    system = assemble_step(state, props, model, grid)
    off = np.abs(system.lower) + np.abs(system.upper)
    if np.any(np.abs(system.diag) <= off):
        i = int(np.flatnonzero(np.abs(system.diag) <= off)[0]) + 1
        raise SolverError(f"system lost diagonal dominance at node {i}")
    T_old = state.T
    # Solve for the increment: same system, but a uniform or linear field gives
    # an exactly zero right-hand side instead of a cancellation residue.
    rhs = -(system.lower * (T_old[:-2] - T_old[1:-1]) + system.upper * (T_old[2:] - T_old[1:-1]))
    n = rhs.size
    ab = np.zeros((3, n))
    ab[0, 1:] = system.upper[:-1]
    ab[1] = system.diag
    ab[2, :-1] = system.lower[1:]
    try:
        delta = solve_banded((1, 1), ab, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"tri-diagonal elimination failed: {exc}") from exc
    T_new = np.empty_like(T_old)
    T_new[0] = T_old[0]
    T_new[-1] = T_old[-1]
    T_new[1:-1] = T_old[1:-1] + delta
    if not np.all(np.isfinite(T_new)):
        raise SolverError("non-finite temperature after elimination")
    return FieldState(T=T_new, t=(state.step_index + 1) * grid.tau, step_index=state.step_index + 1)


class FrontLocation(NamedTuple):
    x: Optional[float]
    degenerate: bool = False

    @property
    def found(self) -> bool:
        return self.x is not None


def locate_front(T, grid: GridSpec, T_target: float) -> FrontLocation:
    """Position of the isotherm ``T_target`` by linear interpolation.

    Takes the first interval from x = 0 with ``T[i] <= T_target <= T[i+1]``.
    A flat interval sitting exactly on the target returns its midpoint with
    ``degenerate`` set.
    """
    T = np.asarray(T)
    hit = np.flatnonzero((T[:-1] <= T_target) & (T_target <= T[1:]))
    if hit.size == 0:
        return FrontLocation(None)
    i = int(hit[0])
    dT = T[i + 1] - T[i]
    if dT == 0.0:
        return FrontLocation((i + 0.5) * grid.h, True)
    return FrontLocation(float(i * grid.h + grid.h * (T_target - T[i]) / dT))


@dataclass
class FrontTrace:
    t: List[float] = field(default_factory=list)
    X_s: List[float] = field(default_factory=list)
    X_l: List[float] = field(default_factory=list)
    found_s: List[bool] = field(default_factory=list)
    found_l: List[bool] = field(default_factory=list)

    def append(self, t, loc_s: FrontLocation, loc_l: FrontLocation):
        self.t.append(float(t))
        self.X_s.append(loc_s.x if loc_s.found else math.nan)
        self.X_l.append(loc_l.x if loc_l.found else math.nan)
        self.found_s.append(loc_s.found)
        self.found_l.append(loc_l.found)

    def __len__(self):
        return len(self.t)

    def arrays(self):
        return (np.array(self.t), np.array(self.X_s), np.array(self.X_l))


@dataclass
class RunResult:
    grid: GridSpec
    trace: FrontTrace
    profiles: Dict[float, np.ndarray]
    final: FieldState

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


def initial_state(grid: GridSpec, T_out: float, T_init: float) -> FieldState:
    T = np.full(grid.N + 1, float(T_init))
    T[0] = T_out
    return FieldState(T=T)


def run(
    props: MaterialProperties,
    model: LiquidFractionModel,
    grid: GridSpec,
    T_out: float,
    T_init: float,
    wall_budget: Optional[float] = None,
) -> RunResult:
    """March from the quenched initial field to ``t_end``.

    Fronts are located after every step (and at t = 0); profiles are kept
    only at ``grid.sample_times``. Exceeding ``wall_budget`` seconds raises
    :class:`PartialResultsError` carrying the partial :class:`RunResult`.
    """
    if not T_out < props.T_s < props.T_l < T_init:
        raise ConfigurationError("need T_out < T_s < T_l < T_init")
    wanted = {int(round(ts / grid.tau)): ts for ts in grid.sample_times}
    state = initial_state(grid, T_out, T_init)
    trace = FrontTrace()
    profiles: Dict[float, np.ndarray] = {}
    started = time.monotonic()

    def record(st):
        trace.append(st.t, locate_front(st.T, grid, props.T_s), locate_front(st.T, grid, props.T_l))
        if st.step_index in wanted:
            profiles[wanted[st.step_index]] = st.T.copy()

    record(state)
    for _ in range(grid.n_steps):
        state = step(state, props, model, grid)
        record(state)
        if wall_budget is not None and time.monotonic() - started > wall_budget:
            partial = RunResult(grid, trace, profiles, state)
            raise PartialResultsError(
                f"wall-clock budget of {wall_budget} s exceeded at t={state.t}", partial
            )
    return RunResult(grid, trace, profiles, state)


def profile_filename(t: float) -> str:
    return f"profile_t{t:05.1f}s.csv"


def write_trace_csv(trace: FrontTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_s", "Xs_m", "Xl_m"])
        for t, xs, xl in zip(trace.t, trace.X_s, trace.X_l):
            writer.writerow([repr(t), repr(xs) if math.isfinite(xs) else "", repr(xl) if math.isfinite(xl) else ""])


def write_profile_csvs(result: RunResult, out_dir) -> List[Path]:
    out_dir = Path(out_dir)
    paths = []
    x = result.x
    for t in sorted(result.profiles):
        path = out_dir / profile_filename(t)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x_m", "T_C"])
            for xi, Ti in zip(x, result.profiles[t]):
                writer.writerow([repr(float(xi)), repr(float(Ti))])
        paths.append(path)
    return paths
