"""Bisectors and fan decompositions in quaternionic hyperbolic space.

Exact rational and float backends share one API. The main entry points are
re-exported here; submodules hold the full surface.
"""

__version__ = "0.1.0"

from .bisector import Bisector, Slice, bisector, hermitian_triple, same_bisector
from .fan import Blade, FanDecomposition, blade_containing, complex_span_3pts, fan_blade, starlike_check
from .isometry import Isometry, Reflection, left_mult, reflection_in_complex_type, reflection_in_quaternionic
from .model import BallPoint, ProjectivePoint, TotallyGeodesicSubmanifold, ball, delta, dist, origin
from .qlinalg import FieldTag, HVector, QMatrix, Subspace, herm, vec
from .quaternion import I, J, K, ONE, Quaternion, q

__all__ = [
    "BallPoint", "Bisector", "Blade", "FanDecomposition", "FieldTag", "HVector", "I", "Isometry",
    "J", "K", "ONE", "ProjectivePoint", "QMatrix", "Quaternion", "Reflection", "Slice", "Subspace",
    "TotallyGeodesicSubmanifold", "ball", "bisector", "blade_containing", "complex_span_3pts",
    "delta", "dist", "fan_blade", "herm", "hermitian_triple", "left_mult", "origin", "q",
    "reflection_in_complex_type", "reflection_in_quaternionic", "same_bisector", "starlike_check",
    "vec", "__version__",
]
