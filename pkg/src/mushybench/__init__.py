"""Exact-solution benchmark for binary-alloy solidification with a mushy zone."""

from .material import VT3_1, LiquidFractionModel, MaterialProperties, load_material
from .linearization import LinearizationResult, solve_mushy_diffusivity
from .similarity import ExactSolution, StefanRoots, solve_exact

__version__ = "0.1.0"

__all__ = [
    "VT3_1",
    "LiquidFractionModel",
    "MaterialProperties",
    "load_material",
    "LinearizationResult",
    "solve_mushy_diffusivity",
    "ExactSolution",
    "StefanRoots",
    "solve_exact",
]
