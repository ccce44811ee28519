"""Exact similarity solution for 1-D solidification of a semi-infinite bar.

With constant diffusivities alpha_s, alpha_sl, alpha_l the enthalpy equation
is linear in each region and the solution depends on ``x / sqrt(t)`` only.
Fronts move as ``X_s = k_s sqrt(t)`` and ``X_l = k_l sqrt(t)``; the two
coefficients follow from flux balance at the fronts.

Field functions broadcast over ``x`` and ``t``. Quantities that jump at a
front (gradients, cooling rates) take ``side="left"`` or ``side="right"``
when evaluated exactly at one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erf, erfcx

from . import material
from .errors import ConfigurationError, DomainError, EvaluationError, FrontAmbiguityError, RootNotFoundError
from .linearization import LinearizationResult, solve_mushy_diffusivity
from .material import LiquidFractionModel, MaterialProperties
from .roots import bisect, unique_bracket

SQRT_PI = math.sqrt(math.pi)

# |x - X| below this fraction of X_l counts as "at the front".
FRONT_ATOL_REL = 1e-12

OUTER_SCAN_POINTS = 64
INNER_SCAN_POINTS = 48


@dataclass(frozen=True)
class BoundaryEnthalpies:
    H_out: float
    H_init: float
    H_s: float
    H_l: float


@dataclass(frozen=True)
class StefanRoots:
    k_s: float
    k_l: float
    residual_s: float = 0.0
    residual_l: float = 0.0
    # magnitude of the leading term of each interface equation at the root
    scale_s: float = 1.0
    scale_l: float = 1.0

    @property
    def relative_residual_s(self) -> float:
        return abs(self.residual_s) / self.scale_s

    @property
    def relative_residual_l(self) -> float:
        return abs(self.residual_l) / self.scale_l


def boundary_enthalpies(props, model, T_out, T_init) -> BoundaryEnthalpies:
    if not T_out < props.T_s:
        raise ConfigurationError(f"T_out < T_s violated: T_out={T_out!r}, T_s={props.T_s!r}")
    if not T_init > props.T_l:
        raise ConfigurationError(f"T_init > T_l violated: T_init={T_init!r}, T_l={props.T_l!r}")
    return BoundaryEnthalpies(
        H_out=material.enthalpy(props, model, T_out),
        H_init=material.enthalpy(props, model, T_init),
        H_s=props.H_s,
        H_l=props.H_l,
    )


@dataclass(frozen=True)
class ExactSolution:
    props: MaterialProperties
    model: LiquidFractionModel
    diffusivities: LinearizationResult
    boundaries: BoundaryEnthalpies
    roots: StefanRoots
    T_out: float
    T_init: float

    def __post_init__(self):
        expected = boundary_enthalpies(self.props, self.model, self.T_out, self.T_init)
        if expected != self.boundaries:
            raise ConfigurationError("boundary enthalpies inconsistent with props and temperatures")

    @property
    def experimental(self) -> bool:
        """Eutectic (lambda0 > 0) solutions are not validated against an independent result."""
        return self.props.is_eutectic


# --- interface equations -------------------------------------------------------


def _gauss_over_erf_gap(z_eval, z_lo, z_hi):
    """``exp(-z_eval**2) / (erf(z_hi) - erf(z_lo))`` without catastrophic underflow."""
    if z_lo < 1.0:
        return math.exp(-z_eval * z_eval) / (erf(z_hi) - erf(z_lo))
    with np.errstate(over="ignore"):
        gap = np.exp(z_eval * z_eval - z_lo * z_lo) * erfcx(z_lo) - np.exp(
            z_eval * z_eval - z_hi * z_hi
        ) * erfcx(z_hi)
    return 1.0 / gap


def interface_terms(props, diffusivities, boundaries, k_s, k_l):
    """Individual terms of the solidus and liquidus flux balances.

    Returns ``(solid, mush_at_solidus, stefan, mush_at_liquidus, liquid)`` so that
    ``r_s = solid - mush_at_solidus - stefan`` and
    ``r_l = mush_at_liquidus - liquid``.
    """
    a_s, a_sl, a_l = diffusivities.alpha_s, diffusivities.alpha_sl, diffusivities.alpha_l
    B = boundaries
    z_s = k_s / (2.0 * math.sqrt(a_s))
    zs_m = k_s / (2.0 * math.sqrt(a_sl))
    zl_m = k_l / (2.0 * math.sqrt(a_sl))
    z_l = k_l / (2.0 * math.sqrt(a_l))
    with np.errstate(all="ignore"):
        solid = math.sqrt(a_s) * (B.H_s - B.H_out) * math.exp(-z_s * z_s) / erf(z_s)
        mush_s = math.sqrt(a_sl) * (B.H_l - B.H_s) * _gauss_over_erf_gap(zs_m, zs_m, zl_m)
        mush_l = math.sqrt(a_sl) * (B.H_l - B.H_s) * _gauss_over_erf_gap(zl_m, zs_m, zl_m)
        liquid = math.sqrt(a_l) * (B.H_init - B.H_l) / erfcx(z_l)
    stefan = 0.5 * SQRT_PI * props.rho * props.lambda0 * props.L * k_s
    return float(solid), float(mush_s), stefan, float(mush_l), float(liquid)


def interface_residuals(props, diffusivities, boundaries, k_s, k_l):
    """Residuals ``(r_s, r_l)`` of the two front conditions.

    ``r_s`` is LHS - RHS of the solidus balance including the eutectic Stefan
    term (zero when lambda0 = 0); ``r_l`` is the LHS of the liquidus balance.
    """
    if not 0.0 < k_s < k_l:
        raise DomainError(f"need 0 < k_s < k_l, got k_s={k_s!r}, k_l={k_l!r}")
    solid, mush_s, stefan, mush_l, liquid = interface_terms(props, diffusivities, boundaries, k_s, k_l)
    r_s = solid - mush_s - stefan
    r_l = mush_l - liquid
    if not (math.isfinite(r_s) and math.isfinite(r_l)):
        raise EvaluationError(f"non-finite interface residual at k_s={k_s!r}, k_l={k_l!r}")
    return r_s, r_l


def _liquidus_residual(props, diffusivities, boundaries, k_s, k_l):
    try:
        return interface_residuals(props, diffusivities, boundaries, k_s, k_l)[1]
    except (EvaluationError, DomainError):
        return math.nan


def _k_max(diffusivities):
    return 6.0 * math.sqrt(max(diffusivities.alpha_s, diffusivities.alpha_sl, diffusivities.alpha_l))


def _solve_liquidus_coefficient(props, diffusivities, boundaries, k_s, k_max):
    grid = [float(k) for k in np.geomspace(k_s * (1.0 + 1e-9), k_max, INNER_SCAN_POINTS)]
    values = [_liquidus_residual(props, diffusivities, boundaries, k_s, k) for k in grid]
    lo, hi = unique_bracket(grid, values, "liquidus")
    return bisect(
        lambda k: _liquidus_residual(props, diffusivities, boundaries, k_s, k),
        lo, hi, f_lo=values[grid.index(lo)],
    )


def _solidus_residual_on_curve(props, diffusivities, boundaries, k_s, k_max):
    try:
        k_l = _solve_liquidus_coefficient(props, diffusivities, boundaries, k_s, k_max)
        return interface_residuals(props, diffusivities, boundaries, k_s, k_l)[0]
    except (RootNotFoundError, EvaluationError, DomainError):
        return math.nan


def solve_front_coefficients(props, diffusivities, boundaries, k_max=None) -> StefanRoots:
    """Solve the two interface equations for ``(k_s, k_l)``.

    Nested bisection: for a trial ``k_s`` the liquidus equation fixes ``k_l``
    on ``(k_s, k_max]``; the solidus residual along that curve is scanned
    over ``(0, k_max)`` and its unique sign change bisected.
    """
    if k_max is None:
        k_max = _k_max(diffusivities)
    grid = [float(k) for k in np.geomspace(k_max * 1e-5, k_max * (1.0 - 1e-6), OUTER_SCAN_POINTS)]
    values = [_solidus_residual_on_curve(props, diffusivities, boundaries, k, k_max) for k in grid]
    lo, hi = unique_bracket(grid, values, "solidus")
    k_s = bisect(
        lambda k: _solidus_residual_on_curve(props, diffusivities, boundaries, k, k_max),
        lo, hi, f_lo=values[grid.index(lo)],
    )
    k_l = _solve_liquidus_coefficient(props, diffusivities, boundaries, k_s, k_max)
    r_s, r_l = interface_residuals(props, diffusivities, boundaries, k_s, k_l)
    solid, _, _, mush_l, _ = interface_terms(props, diffusivities, boundaries, k_s, k_l)
    return StefanRoots(
        k_s=k_s, k_l=k_l, residual_s=r_s, residual_l=r_l,
        scale_s=abs(solid), scale_l=abs(mush_l),
    )


def solve_exact(
    props: MaterialProperties,
    T_out: float,
    T_init: float,
    linearization: Optional[LinearizationResult] = None,
) -> ExactSolution:
    """Linearize (unless given) and solve for the front coefficients."""
    if linearization is None:
        linearization = solve_mushy_diffusivity(props)
    model = linearization.model
    boundaries = boundary_enthalpies(props, model, T_out, T_init)
    roots = solve_front_coefficients(props, linearization, boundaries)
    return ExactSolution(
        props=props, model=model, diffusivities=linearization,
        boundaries=boundaries, roots=roots, T_out=T_out, T_init=T_init,
    )


# --- kinematics -------------------------------------------------------------------


def front_position(roots: StefanRoots, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("time must be >= 0")
    s = np.sqrt(t_arr)
    if t_arr.ndim == 0:
        return roots.k_s * float(s), roots.k_l * float(s)
    return roots.k_s * s, roots.k_l * s


def front_velocity(roots: StefanRoots, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("time must be > 0")
    d = 2.0 * np.sqrt(t_arr)
    if t_arr.ndim == 0:
        d = float(d)
    return roots.k_s / d, roots.k_l / d


def front_arrival_times(roots: StefanRoots, x):
    """Times at which the solidus and the liquidus reach ``x``."""
    x = np.asarray(x, dtype=float)
    return (x / roots.k_s) ** 2, (x / roots.k_l) ** 2


def local_solidification_time(roots: StefanRoots, x):
    """Time a point at ``x`` spends between liquidus and solidus passage."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be >= 0")
    out = (1.0 / roots.k_s ** 2 - 1.0 / roots.k_l ** 2) * x ** 2
    return float(out) if out.ndim == 0 else out


# --- fields -----------------------------------------------------------------------


def _prepare(sol, x, t):
    x_arr, t_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if np.any(x_arr < 0) or np.any(~np.isfinite(x_arr)):
        raise DomainError("x must be finite and >= 0")
    if np.any(t_arr <= 0) or np.any(~np.isfinite(t_arr)):
        raise DomainError("t must be finite and > 0")
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr).astype(float)
    t_arr = np.atleast_1d(t_arr).astype(float)
    root_t = np.sqrt(t_arr)
    X_s = sol.roots.k_s * root_t
    X_l = sol.roots.k_l * root_t
    return x_arr, t_arr, X_s, X_l, scalar


def _out(arr, scalar):
    return float(arr[0]) if scalar else arr


def _regions(x, X_s, X_l, side):
    """Boolean masks (solid, mush, liquid) honouring one-sided evaluation."""
    eps = FRONT_ATOL_REL * X_l
    at_s = np.abs(x - X_s) <= eps
    at_l = np.abs(x - X_l) <= eps
    if side is None:
        solid = x < X_s
        liquid = x > X_l
    elif side == "left":
        solid = (x < X_s) & ~at_s
        liquid = (x > X_l) & ~at_l
        solid |= at_s
    elif side == "right":
        solid = (x < X_s) & ~at_s
        liquid = ((x > X_l) & ~at_l) | at_l
    else:
        raise ValueError(f"side must be None, 'left' or 'right', got {side!r}")
    mush = ~(solid | liquid)
    return solid, mush, liquid, at_s | at_l


def region(sol: ExactSolution, x, t):
    """Region label ('solid', 'mush', 'liquid') per point; fronts belong to the mush."""
    x_arr, t_arr, X_s, X_l, scalar = _prepare(sol, x, t)
    labels = np.where(x_arr < X_s, "solid", np.where(x_arr > X_l, "liquid", "mush"))
    return str(labels[0]) if scalar else labels


def _arg(x, alpha, t):
    return x / (2.0 * np.sqrt(alpha * t))


def _erf_gap(sol):
    a_sl = sol.diffusivities.alpha_sl
    zs = sol.roots.k_s / (2.0 * math.sqrt(a_sl))
    zl = sol.roots.k_l / (2.0 * math.sqrt(a_sl))
    return zs, zl, float(erf(zl) - erf(zs))


def enthalpy_field(sol: ExactSolution, x, t):
    """Exact enthalpy in J/m^3."""
    x, t, X_s, X_l, scalar = _prepare(sol, x, t)
    B = sol.boundaries
    D = sol.diffusivities
    H = np.empty_like(x)
    solid = x < X_s
    liquid = x > X_l
    mush = ~(solid | liquid)

    z_s = sol.roots.k_s / (2.0 * math.sqrt(D.alpha_s))
    H[solid] = B.H_out + (B.H_s - B.H_out) * erf(_arg(x[solid], D.alpha_s, t[solid])) / erf(z_s)

    zs, zl, gap = _erf_gap(sol)
    xi = _arg(x[mush], D.alpha_sl, t[mush])
    # anchored rearrangement of the three-term numerator: exact at both fronts
    H[mush] = B.H_s + (B.H_l - B.H_s) * (erf(xi) - erf(zs)) / gap

    z_l = sol.roots.k_l / (2.0 * math.sqrt(D.alpha_l))
    xi = _arg(x[liquid], D.alpha_l, t[liquid])
    with np.errstate(under="ignore"):
        ratio = np.exp(z_l * z_l - xi * xi) * erfcx(xi) / erfcx(z_l)
    H[liquid] = B.H_init - (B.H_init - B.H_l) * ratio
    return _out(H, scalar)


def temperature_field(sol: ExactSolution, x, t):
    """Exact temperature in C; the mush is inverted from the enthalpy field."""
    x, t, X_s, X_l, scalar = _prepare(sol, x, t)
    props = sol.props
    H = np.asarray(enthalpy_field(sol, x, t))
    T = np.where(
        x < X_s,
        H / (props.rho * props.C_s),
        H / (props.rho * props.C_l) - props.L / props.C_l,
    )
    mush = (x >= X_s) & (x <= X_l)
    if np.any(mush):
        T[mush] = material.temperature_from_enthalpy(props, sol.model, H[mush])
    return _out(T, scalar)


def _enthalpy_gradient_parts(sol, x, t, solid, mush, liquid):
    """``dH/dx`` per region as printed, with stable liquid-side scaling."""
    B = sol.boundaries
    D = sol.diffusivities
    g = np.empty_like(x)
    z_s = sol.roots.k_s / (2.0 * math.sqrt(D.alpha_s))
    xs, ts = x[solid], t[solid]
    g[solid] = (B.H_s - B.H_out) / erf(z_s) * np.exp(-xs ** 2 / (4 * D.alpha_s * ts)) / np.sqrt(
        math.pi * D.alpha_s * ts
    )
    _, _, gap = _erf_gap(sol)
    xm, tm = x[mush], t[mush]
    g[mush] = (B.H_l - B.H_s) / gap * np.exp(-xm ** 2 / (4 * D.alpha_sl * tm)) / np.sqrt(
        math.pi * D.alpha_sl * tm
    )
    z_l = sol.roots.k_l / (2.0 * math.sqrt(D.alpha_l))
    xl, tl = x[liquid], t[liquid]
    xi = _arg(xl, D.alpha_l, tl)
    with np.errstate(under="ignore"):
        g[liquid] = (B.H_init - B.H_l) / erfcx(z_l) * np.exp(z_l * z_l - xi * xi) / np.sqrt(
            math.pi * D.alpha_l * tl
        )
    return g


def _check_side(at_front, side):
    if side is None and np.any(at_front):
        raise FrontAmbiguityError("point lies on a front; pass side='left' or side='right'")


def _mush_capacity(sol, x, t, mush_mask):
    """Apparent capacity at the exact mushy temperature of the masked points."""
    props = sol.props
    T = np.asarray(temperature_field(sol, x[mush_mask], t[mush_mask]))
    T = np.clip(T, props.T_s, props.T_l)
    return np.asarray(material.apparent_capacity(props, sol.model, T))


def enthalpy_gradient(sol: ExactSolution, x, t, side: Optional[str] = None):
    """``dH/dx`` in J/m^4."""
    x, t, X_s, X_l, scalar = _prepare(sol, x, t)
    solid, mush, liquid, at_front = _regions(x, X_s, X_l, side)
    _check_side(at_front, side)
    return _out(_enthalpy_gradient_parts(sol, x, t, solid, mush, liquid), scalar)


def temperature_gradient(sol: ExactSolution, x, t, side: Optional[str] = None):
    """``dT/dx`` in K/m: ``(dT/dH) dH/dx`` region by region."""
    x, t, X_s, X_l, scalar = _prepare(sol, x, t)
    solid, mush, liquid, at_front = _regions(x, X_s, X_l, side)
    _check_side(at_front, side)
    props = sol.props
    dHdx = _enthalpy_gradient_parts(sol, x, t, solid, mush, liquid)
    C = np.where(solid, props.C_s, props.C_l).astype(float)
    if np.any(mush):
        C[mush] = _mush_capacity(sol, x, t, mush)
    return _out(dHdx / (props.rho * C), scalar)


def cooling_rate(sol: ExactSolution, x, t, side: Optional[str] = None):
    """``dT/dt`` in K/s."""
    x, t, X_s, X_l, scalar = _prepare(sol, x, t)
    solid, mush, liquid, at_front = _regions(x, X_s, X_l, side)
    _check_side(at_front, side)
    props = sol.props
    B = sol.boundaries
    D = sol.diffusivities
    rate = np.empty_like(x)

    def kernel(xx, tt, alpha):
        return alpha * xx * np.exp(-xx ** 2 / (4 * alpha * tt)) / (2 * SQRT_PI * (alpha * tt) ** 1.5)

    z_s = sol.roots.k_s / (2.0 * math.sqrt(D.alpha_s))
    rate[solid] = -(B.H_s - B.H_out) / erf(z_s) * kernel(x[solid], t[solid], D.alpha_s) / (
        props.rho * props.C_s
    )
    if np.any(mush):
        _, _, gap = _erf_gap(sol)
        C = _mush_capacity(sol, x, t, mush)
        rate[mush] = -(B.H_l - B.H_s) / gap * kernel(x[mush], t[mush], D.alpha_sl) / (props.rho * C)
    z_l = sol.roots.k_l / (2.0 * math.sqrt(D.alpha_l))
    xl, tl = x[liquid], t[liquid]
    xi = _arg(xl, D.alpha_l, tl)
    with np.errstate(under="ignore"):
        scaled = D.alpha_l * xl * np.exp(z_l * z_l - xi * xi) / (2 * SQRT_PI * (D.alpha_l * tl) ** 1.5)
    rate[liquid] = -(B.H_init - B.H_l) / erfcx(z_l) * scaled / (props.rho * props.C_l)
    return _out(rate, scalar)


def _liquid_front_factor(sol):
    """``(H_init - H_l) exp(-z_l^2) / (rho C_l erfc(z_l))`` with z_l = k_l / (2 sqrt(alpha_l))."""
    props = sol.props
    z_l = sol.roots.k_l / (2.0 * math.sqrt(sol.diffusivities.alpha_l))
    return (sol.boundaries.H_init - sol.boundaries.H_l) / (props.rho * props.C_l * float(erfcx(z_l)))


def liquidus_gradient(sol: ExactSolution, t):
    """Liquid-side temperature gradient at the liquidus, G_l(t) in K/m."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t must be > 0")
    G = _liquid_front_factor(sol) / np.sqrt(math.pi * sol.diffusivities.alpha_l * t)
    return float(G) if G.ndim == 0 else G


def liquidus_cooling_rate(sol: ExactSolution, t):
    """Cooling rate just ahead of the liquidus in K/s; scales as 1/t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t must be > 0")
    rate = -_liquid_front_factor(sol) * sol.roots.k_l / (
        2.0 * math.sqrt(math.pi * sol.diffusivities.alpha_l) * t
    )
    return float(rate) if rate.ndim == 0 else rate


def primary_spacing_proxy(sol: ExactSolution, t):
    """``G_l**-0.5 * v_l**-0.25``, the primary dendrite arm spacing scaling group."""
    G = np.asarray(liquidus_gradient(sol, t))
    v_l = np.asarray(front_velocity(sol.roots, t)[1])
    out = G ** -0.5 * v_l ** -0.25
    return float(out) if out.ndim == 0 else out


PROFILE_COLUMNS = ("x_m", "t_s", "H_J_per_m3", "T_C", "dTdx_K_per_m", "dTdt_K_per_s", "region")


def profile_table(sol: ExactSolution, x, t):
    """Rows of the exact profile at time ``t``; front points use their mushy side."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    labels = np.atleast_1d(region(sol, x, t))
    H = np.atleast_1d(enthalpy_field(sol, x, t))
    T = np.atleast_1d(temperature_field(sol, x, t))
    X_s, X_l = front_position(sol.roots, t)
    near_s = np.abs(x - X_s) <= FRONT_ATOL_REL * X_l
    near_l = np.abs(x - X_l) <= FRONT_ATOL_REL * X_l
    dTdx = np.empty_like(x)
    dTdt = np.empty_like(x)
    for mask, side in ((~(near_s | near_l), None), (near_s, "right"), (near_l, "left")):
        if np.any(mask):
            dTdx[mask] = temperature_gradient(sol, x[mask], t, side=side)
            dTdt[mask] = cooling_rate(sol, x[mask], t, side=side)
    return [
        (float(x[i]), float(t), float(H[i]), float(T[i]), float(dTdx[i]), float(dTdt[i]), str(labels[i]))
        for i in range(len(x))
    ]


def write_profile_csv(sol: ExactSolution, x, t, path) -> None:
    rows = profile_table(sol, x, t)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROFILE_COLUMNS)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
