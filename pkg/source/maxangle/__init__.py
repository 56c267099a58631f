"""
Angle conditions of d-simplices: the d-dimensional sine, dihedral angles of
subsimplices and Jamet's angle, evaluated on single simplices, along
degenerating families and over face-to-face meshes.
"""

from maxangle.conditions import DEFAULT_THRESHOLDS, AngleReport, Thresholds, angle_report, check_conditions
from maxangle.errors import (
    DegenerateSimplexError,
    FamilyError,
    MaxAngleError,
    MeshParseError,
    MeshValidationError,
    ThresholdError,
)
from maxangle.geometry import Simplex

__all__ = [
    "AngleReport",
    "DEFAULT_THRESHOLDS",
    "DegenerateSimplexError",
    "FamilyError",
    "MaxAngleError",
    "MeshParseError",
    "MeshValidationError",
    "Simplex",
    "ThresholdError",
    "Thresholds",
    "angle_report",
    "check_conditions",
]
