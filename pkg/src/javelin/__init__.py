"""Optimal tapering of a free vibrating beam.

The taper that maximizes the lowest frequency of a free-free beam of fixed
length and volume is computed by shooting along the stable manifold of the
tip similarity solution, and cross-checked with a finite-difference
eigensolver.
"""

from ._backend import BACKEND
from .cylinder import cylinder_lambda, cylinder_mode, improvement_ratio
from .model import BeamProfile, DimensionalBeam
from .shooting import ShootingConfig, solve

__all__ = [
    "BACKEND",
    "BeamProfile",
    "DimensionalBeam",
    "ShootingConfig",
    "cylinder_lambda",
    "cylinder_mode",
    "improvement_ratio",
    "solve",
]
__version__ = "0.1.0"
