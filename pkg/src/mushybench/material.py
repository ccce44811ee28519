"""Alloy properties and pointwise thermophysical functions.

Temperatures are in degrees Celsius and volumetric enthalpy is referenced to
H(0 C) = 0. The ``1 + p*T`` factor of the liquid-fraction law depends on that
choice, so the Celsius convention is part of the model, not a display unit.

Every function accepts a scalar or a numpy array and returns the same shape.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateCoefficientsError,
    DomainError,
    InversionError,
)

# Closed-form liquid fraction may leave [0, 1] by this much before it is an error.
FRACTION_RANGE_TOL = 1e-3

# Round-trip tolerance of the mushy enthalpy inversion, relative to H_l.
INVERSION_RTOL = 1e-9

# Samples used to reject a non-monotone mushy enthalpy before bisecting.
MONOTONE_PROBE_POINTS = 257

_REQUIRED_KEYS = ("C_s", "C_l", "kappa_s", "kappa_l", "rho", "L", "T_s", "T_l")
_OPTIONAL_KEYS = ("T_m", "lambda0")


@dataclass(frozen=True)
class MaterialProperties:
    """Constant thermophysical properties of a binary alloy.

    Units: specific heats J/(kg K), conductivities W/(m K), density kg/m^3,
    latent heat J/kg, temperatures in C. ``T_m`` (melting point of the pure
    solvent) is only needed by :func:`reference_fraction_vt`.
    """

    C_s: float
    C_l: float
    kappa_s: float
    kappa_l: float
    rho: float
    L: float
    T_s: float
    T_l: float
    T_m: Optional[float] = None
    lambda0: float = 0.0

    def __post_init__(self):
        for name in ("C_s", "C_l", "kappa_s", "kappa_l", "rho", "L"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be finite and > 0, got {value!r}")
        for name in ("T_s", "T_l"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if not self.T_s < self.T_l:
            raise ConfigurationError(
                f"T_s < T_l violated: T_s={self.T_s!r}, T_l={self.T_l!r}"
            )
        if self.T_m is not None and not self.T_m > self.T_l:
            raise ConfigurationError(
                f"T_m > T_l violated: T_m={self.T_m!r}, T_l={self.T_l!r}"
            )
        if not 0.0 <= self.lambda0 < 1.0:
            raise ConfigurationError(f"lambda0 must lie in [0, 1), got {self.lambda0!r}")

    @property
    def is_eutectic(self) -> bool:
        return self.lambda0 > 0.0

    @property
    def H_s(self) -> float:
        """Enthalpy of the solid at the solidus."""
        return self.rho * self.C_s * self.T_s

    @property
    def H_l(self) -> float:
        """Enthalpy of the liquid at the liquidus."""
        return self.rho * (self.C_l * self.T_l + self.L)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in _REQUIRED_KEYS}
        if self.T_m is not None:
            out["T_m"] = self.T_m
        out["lambda0"] = self.lambda0
        return out


#: Ti-6.5Al-2.5Mo-1.5Cr-0.5Fe-0.3Si (VT3-1), noneutectic.
VT3_1 = MaterialProperties(
    C_s=600.0,
    C_l=1200.0,
    kappa_s=10.0,
    kappa_l=35.0,
    rho=4500.0,
    L=3.55e5,
    T_s=1550.0,
    T_l=1620.0,
    T_m=1668.0,
    lambda0=0.0,
)


def material_from_dict(data: dict) -> MaterialProperties:
    """Build properties from a mapping with exactly the documented keys."""
    if not isinstance(data, dict):
        raise ConfigurationError("material document must be a JSON object")
    unknown = sorted(set(data) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown key {unknown[0]!r} in material document")
    values = {}
    for key in _REQUIRED_KEYS + _OPTIONAL_KEYS:
        if key not in data:
            if key in _REQUIRED_KEYS:
                raise ConfigurationError(f"missing key {key!r} in material document")
            continue
        raw = data[key]
        if raw is None and key == "T_m":
            continue
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigurationError(f"key {key!r} must be a number, got {raw!r}")
        values[key] = float(raw)
    return MaterialProperties(**values)


def load_material(path) -> MaterialProperties:
    """Read a material JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read material file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"material file {path} is not valid JSON: {exc}") from exc
    return material_from_dict(data)


@dataclass(frozen=True)
class LiquidFractionModel:
    """Coefficients of ``(1 + p T) dlambda/dT + a lambda + b = 0``, lambda(T_l) = 1.

    ``numeric_fallback`` allows evaluation by Runge-Kutta integration when the
    closed form is singular (a == 0 or p == 0).
    """

    a: float
    b: float
    p: float
    T_s: float
    T_l: float
    lambda0: float = 0.0
    numeric_fallback: bool = False

    @property
    def degenerate(self) -> bool:
        return self.a == 0.0 or self.p == 0.0


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def mixture_conductivity(props: MaterialProperties, lam):
    """Lever-rule conductivity ``(1 - lam) kappa_s + lam kappa_l``."""
    lam_arr, scalar = _as_array(lam)
    if np.any(~np.isfinite(lam_arr)) or np.any((lam_arr < 0.0) | (lam_arr > 1.0)):
        raise DomainError("liquid fraction must lie in [0, 1]")
    return _ret((1.0 - lam_arr) * props.kappa_s + lam_arr * props.kappa_l, scalar)


def _check_mushy(model: LiquidFractionModel, T_arr):
    if np.any(~np.isfinite(T_arr)) or np.any((T_arr < model.T_s) | (T_arr > model.T_l)):
        raise DomainError(
            f"temperature outside the mushy interval [{model.T_s}, {model.T_l}]"
        )


def closed_form_fraction(model: LiquidFractionModel, T):
    """Closed-form liquid fraction without domain or range checks.

    Intended for oracles and root scans where the coefficients are trial
    values and the result may legitimately leave [0, 1].
    """
    T_arr, scalar = _as_array(T)
    a, b, p = model.a, model.b, model.p
    ratio = (1.0 + p * model.T_l) / (1.0 + p * T_arr)
    with np.errstate(over="ignore", invalid="ignore"):
        lam = -b / a + (a + b) / a * ratio ** (a / p)
    return _ret(lam, scalar)


def _numeric_fraction(model: LiquidFractionModel, T_arr, n_steps=2000):
    from .linearization import rk4_fraction

    flat = [
        rk4_fraction(model.a, model.b, model.p, model.T_l, 1.0, float(t), n_steps)
        for t in T_arr.ravel()
    ]
    return np.asarray(flat, dtype=float).reshape(T_arr.shape)


def liquid_fraction(model: LiquidFractionModel, T):
    """Liquid fraction on [T_s, T_l].

    Raises :class:`DomainError` outside the mushy interval and when the value
    leaves [0, 1] by more than ``FRACTION_RANGE_TOL``.
    """
    T_arr, scalar = _as_array(T)
    _check_mushy(model, T_arr)
    if model.degenerate:
        if not model.numeric_fallback:
            raise DegenerateCoefficientsError(
                f"closed form undefined for a={model.a!r}, p={model.p!r}; "
                "construct the model with numeric_fallback=True to integrate the ODE"
            )
        lam = _numeric_fraction(model, T_arr)
    else:
        lam = np.asarray(closed_form_fraction(model, T_arr))
    # anchor exactly; the power term can round to 1 +/- ulp
    lam = np.where(T_arr == model.T_l, 1.0, lam)
    if np.any(~np.isfinite(lam)) or np.any(
        (lam < -FRACTION_RANGE_TOL) | (lam > 1.0 + FRACTION_RANGE_TOL)
    ):
        raise DomainError("liquid fraction left [0, 1]; the model is not converged")
    return _ret(lam, scalar)


def liquid_fraction_derivative(model: LiquidFractionModel, T):
    """``dlambda/dT = -(a lambda + b) / (1 + p T)`` in 1/K."""
    T_arr, scalar = _as_array(T)
    lam = np.asarray(liquid_fraction(model, T_arr))
    return _ret(-(model.a * lam + model.b) / (1.0 + model.p * T_arr), scalar)


def _check_nonnegative(T_arr):
    if np.any(~np.isfinite(T_arr)) or np.any(T_arr < 0.0):
        raise DomainError("temperature must be >= 0 C (enthalpy reference is 0 C)")


def _mushy_mask(props, T_arr):
    return (T_arr >= props.T_s) & (T_arr <= props.T_l)


def enthalpy(props: MaterialProperties, model: LiquidFractionModel, T):
    """Volumetric enthalpy in J/m^3, piecewise over solid, mush and liquid."""
    T_arr, scalar = _as_array(T)
    _check_nonnegative(T_arr)
    H = np.where(
        T_arr < props.T_s,
        props.rho * props.C_s * T_arr,
        props.rho * (props.C_l * T_arr + props.L),
    )
    mush = _mushy_mask(props, T_arr)
    if np.any(mush):
        Tm = T_arr[mush]
        lam = np.asarray(liquid_fraction(model, Tm))
        H = np.array(H, dtype=float)
        H[mush] = props.rho * (props.C_s * Tm + lam * ((props.C_l - props.C_s) * Tm + props.L))
    return _ret(H, scalar)


def apparent_capacity(props: MaterialProperties, model: LiquidFractionModel, T):
    """Apparent specific heat ``(1/rho) dH/dT`` in J/(kg K).

    The closed interval [T_s, T_l] uses the mushy expression, including the
    latent-heat release term.
    """
    T_arr, scalar = _as_array(T)
    _check_nonnegative(T_arr)
    C = np.where(T_arr < props.T_s, props.C_s, props.C_l).astype(float)
    mush = _mushy_mask(props, T_arr)
    if np.any(mush):
        Tm = T_arr[mush]
        lam = np.asarray(liquid_fraction(model, Tm))
        dlam = -(model.a * lam + model.b) / (1.0 + model.p * Tm)
        C = np.array(C)
        C[mush] = (
            (1.0 - lam) * props.C_s
            + lam * props.C_l
            + ((props.C_l - props.C_s) * Tm + props.L) * dlam
        )
    return _ret(C, scalar)


def local_conductivity(props: MaterialProperties, model: LiquidFractionModel, T):
    """Conductivity at temperature T, using the lever rule in the mush."""
    T_arr, scalar = _as_array(T)
    lam = np.where(T_arr > props.T_l, 1.0, 0.0)
    mush = _mushy_mask(props, T_arr)
    if np.any(mush):
        lam[mush] = np.clip(liquid_fraction(model, T_arr[mush]), 0.0, 1.0)
    return _ret(np.asarray(mixture_conductivity(props, lam)), scalar)


def _mushy_enthalpy(props, model, T_arr):
    if model.degenerate:
        lam = np.asarray(liquid_fraction(model, T_arr))
    else:
        lam = np.asarray(closed_form_fraction(model, T_arr))
    return props.rho * (props.C_s * T_arr + lam * ((props.C_l - props.C_s) * T_arr + props.L))


def temperature_from_enthalpy(props: MaterialProperties, model: LiquidFractionModel, H):
    """Invert :func:`enthalpy`.

    Solid and liquid branches are explicit. In the mush the root is bracketed
    on [T_s, T_l] and bisected until the bracket collapses to adjacent floats.
    Enthalpy between ``H_s`` and the mushy value at ``T_s`` (the eutectic
    plateau, or rounding of the solidus root) maps to ``T_s``.
    """
    H_arr, scalar = _as_array(H)
    if np.any(~np.isfinite(H_arr)) or np.any(H_arr < 0.0):
        raise DomainError("enthalpy must be finite and >= 0")
    H_s, H_l = props.H_s, props.H_l
    T = np.where(H_arr < H_s, H_arr / (props.rho * props.C_s), (H_arr / props.rho - props.L) / props.C_l)
    mush = (H_arr >= H_s) & (H_arr <= H_l)
    if np.any(mush):
        T = np.array(T, dtype=float)
        T[mush] = _invert_mushy(props, model, H_arr[mush])
    return _ret(T, scalar)


def _invert_mushy(props, model, target):
    tol = INVERSION_RTOL * props.H_l
    lo = np.full(target.shape, float(model.T_s))
    hi = np.full(target.shape, float(model.T_l))
    g_hi = _mushy_enthalpy(props, model, hi) - target
    if np.any(g_hi < -tol):
        raise InversionError("enthalpy above the mushy value at T_l; bracket failed")
    probe = _mushy_enthalpy(props, model, np.linspace(model.T_s, model.T_l, MONOTONE_PROBE_POINTS))
    if np.any(np.diff(probe) < -tol):
        raise InversionError("mushy enthalpy is not monotone in T; bracket is not unique")
    plateau = _mushy_enthalpy(props, model, lo) - target >= 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi)
        if np.all(done | plateau):
            break
        below = _mushy_enthalpy(props, model, mid) - target < 0.0
        lo = np.where(below & ~done, mid, lo)
        hi = np.where(~below & ~done, mid, hi)
    T = np.where(plateau, float(model.T_s), 0.5 * (lo + hi))
    resid = np.abs(_mushy_enthalpy(props, model, T) - target)
    if np.any(~plateau & (resid > tol)):
        raise InversionError(
            "mushy enthalpy inversion did not converge; enthalpy is not monotone in T"
        )
    return T


def reference_fraction_vt(props: MaterialProperties, T):
    """Empirical VT3-1 liquid-fraction curve built from T_s, T_l and T_m."""
    if props.T_m is None:
        raise ConfigurationError("T_m is required for the VT3-1 reference fraction")
    T_arr, scalar = _as_array(T)
    if np.any((T_arr < props.T_s) | (T_arr > props.T_l)):
        raise DomainError("temperature outside [T_s, T_l]")
    lam = 1.0 - (props.T_m - props.T_s) / (props.T_l - props.T_s) * (
        (props.T_l - T_arr) / (props.T_m - T_arr)
    )
    return _ret(lam, scalar)


def reference_fraction_power(props: MaterialProperties, T, n: float):
    """Power-law liquid fraction ``((T - T_s) / (T_l - T_s)) ** n``."""
    if not n > 0:
        raise DomainError(f"exponent must be > 0, got {n!r}")
    T_arr, scalar = _as_array(T)
    if np.any((T_arr < props.T_s) | (T_arr > props.T_l)):
        raise DomainError("temperature outside [T_s, T_l]")
    return _ret(((T_arr - props.T_s) / (props.T_l - props.T_s)) ** n, scalar)
