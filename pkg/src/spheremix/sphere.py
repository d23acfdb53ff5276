"""Geometry primitives on the unit hypersphere S^N.

Classifier probability vectors enter the sphere through the square-root
embedding p -> sqrt(p), which lands in the positive quadrant; all distances
are arc lengths, all interpolation runs along great circles.

The injectivity radius convention: learned steps and log maps are restricted
to lengths < pi (the sphere's cut locus). A stricter pi/2 convention exists
in parts of the literature; square-root-embedded data lives in the positive
quadrant where every pairwise distance is <= pi/2, so both conventions agree
on real inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AntipodalPoints,
    NegativeProbability,
    NotNormalized,
    StepTooLarge,
)

_UNIT_TOL = 1e-12
_TANGENT_TOL = 1e-10


@dataclass(frozen=True)
class SpherePoint:
    """A unit vector on S^N, renormalized on construction."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        nrm = np.linalg.norm(c)
        if not np.isfinite(nrm) or nrm < _UNIT_TOL:
            raise ValueError("sphere point needs a finite nonzero vector")
        if abs(nrm - 1.0) > 1e-14:
            # renormalize only when actually off: unit inputs stay bit-exact
            c = c / nrm
        else:
            c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, SpherePoint) and np.array_equal(self.coords, other.coords)


@dataclass(frozen=True)
class TangentVector:
    """A vector in the tangent space at ``base``; its norm is the geodesic
    step length in radians. Orthogonality to the base point is checked once
    here, then trusted by the maps below."""

    base: SpherePoint
    direction: np.ndarray = field()

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=np.float64)
        if d.shape != self.base.coords.shape:
            raise ValueError("tangent direction must match base dimension")
        if abs(float(d @ self.base.coords)) > _TANGENT_TOL:
            raise ValueError("tangent direction is not orthogonal to its base point")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "direction", d)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.direction))


def sqrt_embed(p, *, tol: float = 1e-6) -> SpherePoint:
    """Map a probability vector p to sqrt(p) on the positive quadrant of S^{c-1}.

    Entries in [-1e-9, 0) are clamped to zero; anything more negative raises
    NegativeProbability. A total mass off 1 by more than ``tol`` raises
    NotNormalized; smaller drift is renormalized.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < -1e-9):
        bad = int(np.argmin(p))
        raise NegativeProbability(f"probability entry {bad} is {p[bad]:.3g}")
    p = np.maximum(p, 0.0)
    total = float(p.sum())
    if abs(total - 1.0) > tol:
        raise NotNormalized(f"probabilities sum to {total:.8g}, expected 1")
    return SpherePoint(np.sqrt(p / total))


def arc_distance(x: SpherePoint, y: SpherePoint) -> float:
    """Great-circle distance arccos(<x, y>) in [0, pi]."""
    dot = float(x.coords @ y.coords)
    return math.acos(min(1.0, max(-1.0, dot)))


def exp_map(x: SpherePoint, v: TangentVector) -> SpherePoint:
    """Follow the great circle from x along v for arc length ||v||.

    exp_x(v) = cos(||v||) x + sin(||v||) v / ||v||
    """
    if v.base != x:
        raise ValueError("tangent vector is based at a different point")
    nv = v.norm
    if nv >= math.pi:
        raise StepTooLarge(f"step length {nv:.6g} >= pi leaves the injectivity domain")
    if nv < 1e-14:
        return x
    return SpherePoint(math.cos(nv) * x.coords + math.sin(nv) * (v.direction / nv))


def log_map(x: SpherePoint, y: SpherePoint) -> TangentVector:
    """Inverse of exp_map: the tangent at x whose geodesic reaches y.

    log_x(y) = (theta / sin(theta)) (y - x cos(theta)),  theta = d_arc(x, y),
    evaluated as (theta / ||u||) u with u = y - <x,y> x, whose norm IS
    sin(theta); the angle comes from atan2(||u||, <x,y>), which stays fully
    accurate where arccos loses half its digits (theta near 0).
    """
    dot = min(1.0, max(-1.0, float(x.coords @ y.coords)))
    u = y.coords - dot * x.coords
    sin_theta = float(np.linalg.norm(u))
    theta = math.atan2(sin_theta, dot)
    if theta >= math.pi - 1e-8:
        raise AntipodalPoints(f"points at distance {theta:.8g} are (nearly) antipodal")
    if theta < 1e-14 or sin_theta == 0.0:
        return TangentVector(x, np.zeros_like(x.coords))
    direction = (theta / sin_theta) * u
    # re-project: round-off can leave a ~1e-16 normal component
    direction = direction - (direction @ x.coords) * x.coords
    return TangentVector(x, direction)


def geodesic(x: SpherePoint, y: SpherePoint, t: float) -> SpherePoint:
    """Point at parameter t on the shortest great-circle arc from x to y.

    t in [0, 1] interpolates; values outside extrapolate along the same
    circle (and raise StepTooLarge once |t|*d(x, y) reaches pi).
    """
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    v = log_map(x, y)
    return exp_map(x, TangentVector(x, t * v.direction))
