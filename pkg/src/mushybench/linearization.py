"""Constant-diffusivity linearization of the mushy zone.

Requiring ``kappa(T) / (dH/dT)`` to equal a constant ``alpha_sl`` on
[T_s, T_l] turns the lever-rule enthalpy into a linear first-order ODE for
the liquid fraction. Its closed-form solution is anchored at lambda(T_l) = 1;
``alpha_sl`` is then fixed by the second condition lambda(T_s) = lambda0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, IntegrationError
from .material import LiquidFractionModel, MaterialProperties, closed_form_fraction
from .roots import bisect, unique_bracket

SCAN_LO = 1e-9
SCAN_HI = 1e-4
SCAN_POINTS = 200
ROOT_RTOL = 1e-12


@dataclass(frozen=True)
class LinearizationResult:
    alpha_s: float
    alpha_sl: float
    alpha_l: float
    model: LiquidFractionModel
    residual: float
    bracket: Tuple[float, float]
    scan: Tuple[Tuple[float, float], ...] = field(default=(), repr=False)


def phase_diffusivities(props: MaterialProperties):
    """Solid and liquid diffusivities ``kappa / (rho C)`` in m^2/s."""
    return (
        props.kappa_s / (props.rho * props.C_s),
        props.kappa_l / (props.rho * props.C_l),
    )


def ode_coefficients(props: MaterialProperties, alpha_sl: float):
    """Coefficients ``(a, b, p)`` of the liquid-fraction ODE for a trial diffusivity."""
    if not alpha_sl > 0:
        raise ConfigurationError(f"alpha_sl must be > 0, got {alpha_sl!r}")
    denom = alpha_sl * props.rho * props.L
    a = (alpha_sl * props.rho * (props.C_l - props.C_s) - (props.kappa_l - props.kappa_s)) / denom
    b = (alpha_sl * props.rho * props.C_s - props.kappa_s) / denom
    p = (props.C_l - props.C_s) / props.L
    return a, b, p


def fraction_model(props: MaterialProperties, alpha_sl: float, numeric_fallback=False):
    a, b, p = ode_coefficients(props, alpha_sl)
    return LiquidFractionModel(
        a=a, b=b, p=p, T_s=props.T_s, T_l=props.T_l, lambda0=props.lambda0,
        numeric_fallback=numeric_fallback,
    )


def solidus_residual(props: MaterialProperties, alpha_sl: float) -> float:
    """``lambda(T_s; alpha_sl) - lambda0`` from the closed form; NaN if singular."""
    model = fraction_model(props, alpha_sl)
    if model.degenerate:
        return math.nan
    return float(closed_form_fraction(model, props.T_s)) - props.lambda0


def solve_mushy_diffusivity(
    props: MaterialProperties,
    lo: float = SCAN_LO,
    hi: float = SCAN_HI,
    points: int = SCAN_POINTS,
    rtol: float = ROOT_RTOL,
) -> LinearizationResult:
    """Find ``alpha_sl`` such that lambda(T_s) = lambda0.

    The interval ``[lo, hi]`` is scanned on a geometric grid for sign changes
    and the unique bracket is bisected to relative width ``rtol``. Several
    brackets raise :class:`AmbiguousRootError`; none raises
    :class:`RootNotFoundError` carrying the scan table.
    """
    if not 0 < lo < hi:
        raise ConfigurationError("scan bounds must satisfy 0 < lo < hi")
    if points < 2:
        raise ConfigurationError("scan needs at least two points")
    grid = [float(x) for x in np.geomspace(lo, hi, points)]
    values = [solidus_residual(props, x) for x in grid]
    b_lo, b_hi = unique_bracket(grid, values, "solidus liquid-fraction")
    f_lo = values[grid.index(b_lo)]
    root = bisect(lambda x: solidus_residual(props, x), b_lo, b_hi, f_lo=f_lo, rtol=rtol)
    alpha_s, alpha_l = phase_diffusivities(props)
    return LinearizationResult(
        alpha_s=alpha_s,
        alpha_sl=root,
        alpha_l=alpha_l,
        model=fraction_model(props, root),
        residual=abs(solidus_residual(props, root)),
        bracket=(b_lo, b_hi),
        scan=tuple(zip(grid, (v + props.lambda0 for v in values))),
    )


def write_scan_csv(result: LinearizationResult, path) -> None:
    """Root landscape: ``alpha_candidate, lambda_at_Ts`` per scanned point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha_candidate", "lambda_at_Ts"])
        for alpha, lam in result.scan:
            writer.writerow([repr(alpha), repr(lam)])


def rk4_fraction(a, b, p, T_start, lam_start, T_end, n_steps):
    """Classical RK4 march of ``dlambda/dT = -(a lambda + b) / (1 + p T)``.

    Returns lambda at ``T_end``.
    """
    table = _rk4_table(a, b, p, T_start, lam_start, T_end, n_steps)
    return table[-1, 1]


def _rk4_table(a, b, p, T_start, lam_start, T_end, n_steps):
    def rhs(T, lam):
        return -(a * lam + b) / (1.0 + p * T)

    h = (T_end - T_start) / n_steps
    if T_end != T_start and (h == 0.0 or not math.isfinite(h)):
        raise IntegrationError("step underflow in liquid-fraction march")
    out = np.empty((n_steps + 1, 2))
    T, lam = float(T_start), float(lam_start)
    out[0] = T, lam
    for i in range(1, n_steps + 1):
        k1 = rhs(T, lam)
        k2 = rhs(T + 0.5 * h, lam + 0.5 * h * k1)
        k3 = rhs(T + 0.5 * h, lam + 0.5 * h * k2)
        k4 = rhs(T + h, lam + h * k3)
        lam = lam + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        T = T_start + i * h if i < n_steps else float(T_end)
        if not math.isfinite(lam):
            raise IntegrationError(f"non-finite liquid fraction at T={T!r}")
        out[i] = T, lam
    return out


def integrate_fraction_ode(props: MaterialProperties, alpha_sl: float, n_steps: int = 10000):
    """Table of ``(T, lambda)`` marched from ``(T_l, 1)`` down to ``T_s``.

    Independent of the closed form; used to check it.
    """
    if n_steps < 100:
        raise ConfigurationError("n_steps must be >= 100")
    a, b, p = ode_coefficients(props, alpha_sl)
    return _rk4_table(a, b, p, props.T_l, 1.0, props.T_s, n_steps)
