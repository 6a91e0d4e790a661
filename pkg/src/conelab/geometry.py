"""Point-circle duality and lightplank geometry.

A point x = (x', x3) in R^2 x (0, inf) is identified with the circle of
center x' and radius x3.  Throughout, the "cone" is the graph
Gamma_0 = {(x', x3): |x'| = |x3|}, whose upper nappe carries the circle
duality: displacements along a generator of Gamma_0 correspond to
internally tangent circles.

Conventions fixed here once and used everywhere:

* circle distance      d(v, w)  = |v' - w'| + |v3 - w3|
* tangency defect      Delta(v, w) = | |v' - w'| - |v3 - w3| |
* a lightlike basis attached to a planar unit vector e:
      e_s = (-e, -1)/sqrt(2)      (short axis)
      e_m = (rot90(e), 0)         (middle axis, rot90 = CCW quarter turn)
      e_l = (-e, +1)/sqrt(2)      (long axis, increasing height)
  The triple (e_s, e_m, e_l) is orthonormal; e_s is e_l reflected in
  the plane {x3 = 0}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Absolute tolerance for geometric comparisons; coordinates stay below ~1e3.
COORD_TOL = 1e-9

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SpacetimePoint:
    """A point (x, y, h): planar part (x, y), height (= dual circle radius) h."""

    x: float
    y: float
    h: float

    @property
    def planar(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.h])

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.h], dtype=dtype)

    @classmethod
    def from_array(cls, a) -> "SpacetimePoint":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))


def _as_points(p) -> np.ndarray:
    """Coerce a point, array, or batch of points to an (..., 3) float array."""
    if isinstance(p, SpacetimePoint):
        return p.to_array()
    a = np.asarray(p, dtype=float)
    if a.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {a.shape}")
    return a


def dist_d(v, w) -> float | np.ndarray:
    """Circle distance d(v, w) = |v' - w'| + |v3 - w3|.  Broadcasts over batches."""
    dv = _as_points(v) - _as_points(w)
    out = np.hypot(dv[..., 0], dv[..., 1]) + np.abs(dv[..., 2])
    return float(out) if out.ndim == 0 else out


def gap_delta(v, w) -> float | np.ndarray:
    """Tangency defect Delta(v, w) = ||v' - w'| - |v3 - w3||.

    Zero exactly when the displacement v - w is lightlike, i.e. the two
    circles are internally tangent (equal heights give identical circles'
    concentric defect |v' - w'|).
    """
    dv = _as_points(v) - _as_points(w)
    out = np.abs(np.hypot(dv[..., 0], dv[..., 1]) - np.abs(dv[..., 2]))
    return float(out) if out.ndim == 0 else out


def cone_distance(x) -> float | np.ndarray:
    """Euclidean distance from x to the full cone {|x'| = |x3|}.

    Both nappes are considered; the minimum is ||x'| - |x3|| / sqrt(2)
    exactly, since the projection onto the nearer nappe's generator always
    has a nonnegative parameter.
    """
    a = _as_points(x)
    out = np.abs(np.hypot(a[..., 0], a[..., 1]) - np.abs(a[..., 2])) / SQRT2
    return float(out) if out.ndim == 0 else out


def nearest_cone_point(x) -> SpacetimePoint:
    """Nearest point of the upper nappe {|x'| = x3 >= 0} to x.

    For x = (x', x3) with x3 >= 0 and x' != 0 the projection is

        w = ( (|x'| + x3)/2 * x'/|x'|, (|x'| + x3)/2 ).

    Raises ValueError for |x'| = 0 (the planar direction is degenerate)
    or x3 < 0.
    """
    a = _as_points(x)
    if a.ndim != 1:
        raise ValueError("nearest_cone_point takes a single point")
    rho = math.hypot(a[0], a[1])
    if rho <= COORD_TOL:
        raise ValueError("degenerate axis input: |x'| = 0 has no unique nearest cone point")
    if a[2] < -COORD_TOL:
        raise ValueError("nearest_cone_point expects x3 >= 0")
    t = 0.5 * (rho + a[2])
    return SpacetimePoint(t * a[0] / rho, t * a[1] / rho, t)


@dataclass(frozen=True)
class LightlikeBasis:
    """Orthonormal frame (e_s, e_m, e_l) attached to a planar unit vector."""

    ex: float
    ey: float

    def __post_init__(self):
        n = math.hypot(self.ex, self.ey)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"e_planar must be a unit vector, got norm {n}")

    @classmethod
    def from_planar(cls, e) -> "LightlikeBasis":
        e = np.asarray(e, dtype=float)
        n = math.hypot(e[0], e[1])
        if n <= COORD_TOL:
            raise ValueError("zero planar direction")
        return cls(float(e[0] / n), float(e[1] / n))

    @property
    def e_planar(self) -> np.ndarray:
        return np.array([self.ex, self.ey])

    @property
    def e_s(self) -> np.ndarray:
        return np.array([-self.ex, -self.ey, -1.0]) / SQRT2

    @property
    def e_m(self) -> np.ndarray:
        # CCW quarter turn of e_planar, horizontal.
        return np.array([-self.ey, self.ex, 0.0])

    @property
    def e_l(self) -> np.ndarray:
        return np.array([-self.ex, -self.ey, 1.0]) / SQRT2

    def matrix(self) -> np.ndarray:
        """Rows (e_s, e_m, e_l)."""
        return np.vstack([self.e_s, self.e_m, self.e_l])


def basis_change_coefficients(basis: LightlikeBasis, other: LightlikeBasis) -> np.ndarray:
    """Matrix M[i, j] = <other_i, basis_j>, rows and columns ordered (s, m, l).

    With theta the signed angle from basis.e_planar to other.e_planar the
    entries are the closed form

        [ (c+1)/2   -s/sqrt2   (c-1)/2 ]
        [  s/sqrt2      c       s/sqrt2]
        [ (c-1)/2   -s/sqrt2   (c+1)/2 ]

    (c = cos theta, s = sin theta); coefficients on the short axis pick up
    one factor of theta per step away from the diagonal and two on the
    corner, which is what makes dilated planks absorb small rotations.
    """
    return other.matrix() @ basis.matrix().T


def planar_angle(basis: LightlikeBasis, other: LightlikeBasis) -> float:
    """Signed angle from basis.e_planar to other.e_planar, in (-pi, pi]."""
    c = basis.ex * other.ex + basis.ey * other.ey
    s = basis.ex * other.ey - basis.ey * other.ex
    return math.atan2(s, c)


@dataclass(frozen=True)
class Lightplank:
    """Axis-aligned box in a lightlike frame.

    half_dims = (h_s, h_m, h_l) are half edge lengths along (e_s, e_m, e_l);
    canonical planks have ratios (1 : A : A^2) up to the recorded dilation.
    """

    center: SpacetimePoint
    basis: LightlikeBasis
    half_dims: tuple[float, float, float]
    dilation: float = 1.0

    def __post_init__(self):
        hs, hm, hl = self.half_dims
        if not (0 < hs <= hm * (1 + 1e-12) and hm <= hl * (1 + 1e-12)):
            raise ValueError(f"half_dims must be positive and ordered, got {self.half_dims}")

    def local_coords(self, x) -> np.ndarray:
        """Coordinates of x - center in the (e_s, e_m, e_l) frame, shape (..., 3)."""
        d = _as_points(x) - self.center.to_array()
        return d @ self.basis.matrix().T

    def corners(self) -> np.ndarray:
        """The 8 corner points, shape (8, 3)."""
        hs, hm, hl = self.half_dims
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)])
        local = signs * np.array([hs, hm, hl])
        return self.center.to_array() + local @ self.basis.matrix()

    def dilated(self, factor: float) -> "Lightplank":
        hs, hm, hl = self.half_dims
        return Lightplank(self.center, self.basis,
                          (hs * factor, hm * factor, hl * factor),
                          self.dilation * factor)


def plank_membership(plank: Lightplank, x, dilation: float = 1.0):
    """Whether x lies in the dilation-scaled plank (boundary inclusive).

    Accepts a single point or an (..., 3) batch; returns bool or bool array.
    """
    loc = np.abs(plank.local_coords(x))
    lim = np.asarray(plank.half_dims) * dilation + COORD_TOL
    out = np.all(loc <= lim, axis=-1)
    return bool(out) if out.ndim == 0 else out


def membership_dilation(plank: Lightplank, x):
    """Smallest dilation factor at which x belongs to the plank."""
    loc = np.abs(plank.local_coords(x))
    out = np.max(loc / np.asarray(plank.half_dims), axis=-1)
    return float(out) if out.ndim == 0 else out
