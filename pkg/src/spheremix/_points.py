"""Conversions between typed manifold points and raw coordinate arrays."""

from __future__ import annotations

import numpy as np

from .grassmann import GrassmannPoint
from .sphere import SpherePoint

SPHERE = "sphere"
GRASSMANN = "grassmann"


def point_vector(p) -> np.ndarray:
    """Coordinate array of a SpherePoint, GrassmannPoint, or array-like."""
    if isinstance(p, SpherePoint):
        return p.coords
    if isinstance(p, GrassmannPoint):
        return p.rep
    return np.asarray(p, dtype=np.float64)


def make_point(vec, space: str):
    if space == GRASSMANN:
        return GrassmannPoint(vec)
    return SpherePoint(vec)


def infer_space(p) -> str:
    return GRASSMANN if isinstance(p, GrassmannPoint) else SPHERE


def stack_points(points) -> np.ndarray:
    """(n, d) float64 matrix from an array or a sequence of points."""
    if isinstance(points, np.ndarray) and points.ndim == 2:
        return np.ascontiguousarray(points, dtype=np.float64)
    return np.ascontiguousarray([point_vector(p) for p in points], dtype=np.float64)
