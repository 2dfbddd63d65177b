"""Pseudospectral toolkit for the Landau-Lifshitz-Gilbert equation and its projected form."""

from .littlewood_paley import besov_norm, critical_besov_norm, decompose
from .sphere_maps import LlgParams, inverse_stereographic, stereographic
from .spectral_core import Grid, transform_forward, transform_inverse
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "LlgParams",
    "Trajectory",
    "besov_norm",
    "critical_besov_norm",
    "decompose",
    "inverse_stereographic",
    "stereographic",
    "transform_forward",
    "transform_inverse",
]
