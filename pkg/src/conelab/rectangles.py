"""Curved delta,tau-rectangles, their tangency planks, and comparability.

A (delta, tau)-rectangle on the circle dual to a point v is the set

    Omega = { a in R^2 : | |a - v'| - v3 | <= delta, |a - a0| <= tau },

where a0 = v' + v3 * arc_center is the arc midpoint.  Containment is
boundary inclusive and is always decided on the fixed 64 boundary + 16
interior sample points produced by :func:`rect_sample_points`.

The set of circles delta-tangent to Omega is comparable to a lightplank of
half-dims (delta, delta/tau, delta/tau^2) anchored at v with planar
direction arc_center; :func:`tangency_plank` builds it.  At arc length
tau ~ sqrt(delta) the tangent family splits into two planks (curves of
either orientation can hug such a short arc); :func:`tangency_plank_pair`
exposes both components explicitly.

Comparability of two rectangles sharing (delta, tau) is decided through
the plank dictionary: the decision functional is the largest separation of
the cores measured in the mean lightlike frame, normalized axis-by-axis by
the canonical plank half-dims, together with the arc direction angle in
units of tau.  With decision constant C0 = 6 the acceptance threshold is
sep <= A^(C0/2); the bracketed thresholds A^(1/C0) (complete side) and
A^C0 (sound side) are exercised by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import (
    COORD_TOL,
    SQRT2,
    LightlikeBasis,
    Lightplank,
    SpacetimePoint,
    planar_angle,
)

# Comparability decision constant: thresholds A^(1/C0) and A^C0 bracket the
# relation, the decision itself sits at the geometric midpoint A^(C0/2).
C0 = 6
# Margin applied to measured envelope parameters so that independently drawn
# sample points stay inside the witness envelope.
ENVELOPE_MARGIN = 1.05

N_BOUNDARY_SAMPLES = 64
N_INTERIOR_SAMPLES = 16


@dataclass(frozen=True)
class DeltaTauRectangle:
    """A (delta, tau)-rectangle: core point, unit arc direction, parameters."""

    core: SpacetimePoint
    arc_center: tuple[float, float]
    delta: float
    tau: float

    def __post_init__(self):
        ax, ay = self.arc_center
        n = math.hypot(ax, ay)
        if n <= COORD_TOL:
            raise ValueError("arc_center must be a nonzero planar direction")
        object.__setattr__(self, "arc_center", (ax / n, ay / n))
        if not (0 < self.delta < self.core.h):
            raise ValueError(f"need 0 < delta < core height, got delta={self.delta}, h={self.core.h}")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def a0(self) -> np.ndarray:
        """Arc midpoint v' + v3 * arc_center."""
        return self.core.planar + self.core.h * np.asarray(self.arc_center)

    @property
    def arc_angle(self) -> float:
        return math.atan2(self.arc_center[1], self.arc_center[0])


def rect_contains(rect: DeltaTauRectangle, points) -> bool | np.ndarray:
    """Boundary-inclusive membership of planar point(s) in the rectangle."""
    p = np.asarray(points, dtype=float)
    squeeze = p.ndim == 1
    p = np.atleast_2d(p)
    rel = p - rect.core.planar
    band = np.abs(np.hypot(rel[:, 0], rel[:, 1]) - rect.core.h) <= rect.delta + COORD_TOL
    reach = np.hypot(*(p - rect.a0).T) <= rect.tau + COORD_TOL
    out = band & reach
    return bool(out[0]) if squeeze else out


def _half_angle(rect: DeltaTauRectangle, r: np.ndarray) -> np.ndarray:
    """Largest |angle| from the arc midpoint keeping chord distance <= tau at radius r."""
    v3 = rect.core.h
    c = (r * r + v3 * v3 - rect.tau * rect.tau) / (2.0 * r * v3)
    return np.arccos(np.clip(c, -1.0, 1.0))


@lru_cache(maxsize=200_000)
def _sample_points_cached(rect: DeltaTauRectangle) -> np.ndarray:
    v3, delta = rect.core.h, rect.delta
    theta0 = rect.arc_angle

    pts = []
    # 24 + 24 points on the outer and inner band boundary arcs.
    for r in (v3 + delta, v3 - delta):
        psi = float(_half_angle(rect, np.array([r]))[0])
        phi = np.linspace(-psi, psi, 24)
        pts.append(np.column_stack([np.full(24, r), phi]))
    # 8 + 8 points on each end cap, following the chord-limited angle.
    r_cap = np.linspace(v3 - delta, v3 + delta, 8)
    psi_cap = _half_angle(rect, r_cap)
    pts.append(np.column_stack([r_cap, psi_cap]))
    pts.append(np.column_stack([r_cap, -psi_cap]))
    # 16 interior points on a 4x4 (radius x angle-fraction) grid.
    fr = np.array([-0.6, -0.2, 0.2, 0.6])
    r_in = v3 + delta * fr
    psi_in = _half_angle(rect, r_in)
    rr, ff = np.meshgrid(r_in, fr, indexing="ij")
    pp = psi_in[:, None] * ff[None, :]
    pts.append(np.column_stack([rr.ravel(), pp.ravel()]))

    polar = np.vstack(pts)
    ang = theta0 + polar[:, 1]
    out = rect.core.planar + polar[:, [0]] * np.column_stack([np.cos(ang), np.sin(ang)])
    out.setflags(write=False)
    return out


def rect_sample_points(rect: DeltaTauRectangle) -> np.ndarray:
    """The fixed (80, 2) array of 64 boundary + 16 interior sample points."""
    return _sample_points_cached(rect)


class SubResolutionArcError(ValueError):
    """Arc length below the sqrt(delta) plank resolution."""


def tangency_plank(rect: DeltaTauRectangle, lam: float = 1.0) -> Lightplank:
    """Lightplank comparable to the lam*delta-tangent circle family of rect.

    Half-dims are (lam*delta, lam*delta/tau, lam*delta/tau^2) with planar
    direction arc_center, anchored at the core.  Raises
    SubResolutionArcError when tau < sqrt(delta)/2, where the single-plank
    description fails.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    d, t = rect.delta, rect.tau
    if t < 0.5 * math.sqrt(d):
        raise SubResolutionArcError(f"tau={t} below sqrt(delta)/2={0.5 * math.sqrt(d)}")
    basis = LightlikeBasis.from_planar(rect.arc_center)
    return Lightplank(rect.core, basis, (lam * d, lam * d / t, lam * d / t ** 2), dilation=lam)


def tangency_plank_pair(rect: DeltaTauRectangle, lam: float = 1.0) -> tuple[Lightplank, Lightplank]:
    """Both components of the tangent family for a near-critical arc.

    Valid for tau <= 2*sqrt(delta).  The first plank contains the core
    (circles curving with the arc); the second is anchored at the
    reflection of the core through the arc midpoint line (circles curving
    against the arc) with the opposite planar direction.
    """
    d, t = rect.delta, rect.tau
    if t > 2.0 * math.sqrt(d):
        raise ValueError(f"far tangency family empty for tau={t} > 2*sqrt(delta)")
    half = (lam * d, lam * d / t, lam * d / t ** 2)
    u = np.asarray(rect.arc_center)
    near = Lightplank(rect.core, LightlikeBasis.from_planar(u), half, dilation=lam)
    far_center = SpacetimePoint(*(rect.core.planar + 2.0 * rect.core.h * u), rect.core.h)
    far = Lightplank(far_center, LightlikeBasis.from_planar(-u), half, dilation=lam)
    return near, far


def dual_rectangle(plank: Lightplank, delta: float) -> DeltaTauRectangle:
    """Rectangle dual to a canonical plank.

    The core is the plank center; the arc direction points from the core's
    planar part toward a0, the intersection of the long-axis lightray with
    the plane {x3 = 0}, which equals center' + center_h * e_planar.
    tau is recovered from the half-dim ratios (dilation invariant).
    """
    hs, hm, hl = plank.half_dims
    tau1, tau2 = hs / hm, hm / hl
    if abs(tau1 - tau2) > 1e-6 * tau1:
        raise ValueError(f"plank is not canonically shaped: ratios {tau1} vs {tau2}")
    u = plank.basis.e_planar
    return DeltaTauRectangle(plank.center, (float(u[0]), float(u[1])), delta, tau1)


@dataclass(frozen=True)
class ComparabilityWitness:
    """Envelope rectangle containing both members, with its measured level.

    effective_level B means the envelope has parameters (B^2 delta, B tau)
    relative to the members' (delta, tau).
    """

    envelope: DeltaTauRectangle
    members: tuple[DeltaTauRectangle, DeltaTauRectangle]
    effective_level: float


def _check_same_scale(r1: DeltaTauRectangle, r2: DeltaTauRectangle):
    if abs(r1.delta - r2.delta) > 1e-12 * r1.delta or abs(r1.tau - r2.tau) > 1e-12 * r1.tau:
        raise ValueError("rectangles must share (delta, tau)")


def _separation_batch(core: np.ndarray, u: np.ndarray, cores: np.ndarray,
                      us: np.ndarray, delta: float, tau: float) -> np.ndarray:
    """Decision separation of one rectangle against a batch; inf for opposed arcs."""
    dots = us @ u
    cross = u[0] * us[:, 1] - u[1] * us[:, 0]
    sep = np.full(len(cores), np.inf)
    ok = dots > 0.0
    if not np.any(ok):
        return sep
    ub = u + us[ok]
    ub /= np.hypot(ub[:, 0], ub[:, 1])[:, None]
    dv = core - cores[ok]
    s = np.abs(-dv[:, 0] * ub[:, 0] - dv[:, 1] * ub[:, 1] - dv[:, 2]) / SQRT2 / delta
    m = np.abs(-dv[:, 0] * ub[:, 1] + dv[:, 1] * ub[:, 0]) / (delta / tau)
    l = np.abs(-dv[:, 0] * ub[:, 0] - dv[:, 1] * ub[:, 1] + dv[:, 2]) / SQRT2 / (delta / tau ** 2)
    ang = np.abs(np.arctan2(cross[ok], dots[ok])) / tau
    sep[ok] = np.max(np.column_stack([s, m, l, ang]), axis=1)
    return sep


def comparability_separation(r1: DeltaTauRectangle, r2: DeltaTauRectangle) -> float:
    """Symmetric plank-frame separation used by the comparability decision."""
    _check_same_scale(r1, r2)
    u1 = np.asarray(r1.arc_center)
    sep = _separation_batch(r1.core.to_array(), u1,
                            r2.core.to_array()[None, :],
                            np.asarray(r2.arc_center)[None, :],
                            r1.delta, r1.tau)
    return float(sep[0])


def _build_envelope(r1: DeltaTauRectangle, r2: DeltaTauRectangle) -> DeltaTauRectangle:
    """Smallest sampled rectangle on the midpoint core containing both members."""
    c1, c2 = r1.core.to_array(), r2.core.to_array()
    mid = 0.5 * (c1 + c2)
    ub = np.asarray(r1.arc_center) + np.asarray(r2.arc_center)
    ub = ub / math.hypot(ub[0], ub[1])
    pts = np.vstack([rect_sample_points(r1), rect_sample_points(r2)])
    rel = pts - mid[:2]
    band = float(np.max(np.abs(np.hypot(rel[:, 0], rel[:, 1]) - mid[2])))
    a0 = mid[:2] + mid[2] * ub
    reach = float(np.max(np.hypot(*(pts - a0).T)))
    return DeltaTauRectangle(SpacetimePoint(*mid),
                             (float(ub[0]), float(ub[1])),
                             band * ENVELOPE_MARGIN + COORD_TOL,
                             reach * ENVELOPE_MARGIN + COORD_TOL)


def comparable(r1: DeltaTauRectangle, r2: DeltaTauRectangle, A: float) -> ComparabilityWitness | None:
    """Witness of A-comparability, or None.

    Deterministic, symmetric, reflexive.  A witness is returned exactly
    when the decision separation is <= A^(C0/2); its envelope genuinely
    contains both members' sample points and records the effective level
    B = max(sqrt(delta_env/delta), tau_env/tau).
    """
    _check_same_scale(r1, r2)
    if A < 1.0:
        raise ValueError("A must be >= 1")
    if comparability_separation(r1, r2) > A ** (C0 / 2):
        return None
    env = _build_envelope(r1, r2)
    level = max(math.sqrt(env.delta / r1.delta), env.tau / r1.tau)
    return ComparabilityWitness(env, (r1, r2), level)


def greedy_maximal_incomparable(rects: list[DeltaTauRectangle], A: float) -> list[DeltaTauRectangle]:
    """Greedy pairwise-incomparable subfamily, kept in input order.

    A rectangle is kept iff it is not comparable (at level A) to any
    already-kept member, so kept members are pairwise incomparable and
    every input is comparable to some member.  Ties between identical
    inputs resolve to the earlier one; callers wanting order independence
    should pre-sort by (core.x, core.y, core.h, arc angle).
    """
    if not rects:
        return []
    if A < 1.0:
        raise ValueError("A must be >= 1")
    delta, tau = rects[0].delta, rects[0].tau
    for r in rects:
        _check_same_scale(rects[0], r)
    thresh = A ** (C0 / 2)
    cores = np.array([r.core.to_array() for r in rects])
    us = np.array([r.arc_center for r in rects])
    angs = np.array([r.arc_angle for r in rects])

    width = thresh * tau
    nb = max(1, int(math.ceil(2 * math.pi / min(width, 2 * math.pi))))
    buckets: dict[int, list[int]] = {}
    kept: list[int] = []
    for i in range(len(rects)):
        key = int(((angs[i] + math.pi) / (2 * math.pi)) * nb) % nb
        neighbors: list[int] = []
        for k in ((key - 1) % nb, key, (key + 1) % nb) if nb > 2 else range(nb):
            neighbors.extend(buckets.get(k, ()))
        if neighbors:
            idx = np.asarray(sorted(set(neighbors)))
            sep = _separation_batch(cores[i], us[i], cores[idx], us[idx], delta, tau)
            if np.min(sep) <= thresh:
                continue
        kept.append(i)
        buckets.setdefault(key, []).append(i)
    return [rects[i] for i in kept]


def packing_count(envelope: DeltaTauRectangle, rects: list[DeltaTauRectangle], A: float) -> int:
    """Number of greedy-incomparable members whose samples lie in the envelope."""
    inside = [r for r in rects if bool(np.all(rect_contains(envelope, rect_sample_points(r))))]
    return len(greedy_maximal_incomparable(inside, A))


def intersect_angle(v, w) -> float:
    """Intersection angle of two transversally intersecting circles.

    With center distance b and radii r, s the angle at either crossing is
    arccos((r^2 + s^2 - b^2) / (2 r s)); requires |r - s| < b < r + s.
    """
    v = SpacetimePoint.from_array(np.asarray(v, dtype=float))
    w = SpacetimePoint.from_array(np.asarray(w, dtype=float))
    b = float(np.hypot(*(v.planar - w.planar)))
    r, s = v.h, w.h
    if not (abs(r - s) < b < r + s):
        raise ValueError(f"circles do not intersect transversally: b={b}, r={r}, s={s}")
    c = (r * r + s * s - b * b) / (2.0 * r * s)
    return math.acos(max(-1.0, min(1.0, c)))


def annuli_intersection_area(v, w, delta: float, samples: int = 10 ** 6,
                             seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo area of the intersection of two delta-annuli.

    Uniform samples over the bounding square of the first annulus; returns
    (area, standard_error).
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    half = v[2] + delta
    box_area = (2.0 * half) ** 2
    rng = np.random.default_rng(seed)
    pts = v[:2] + rng.uniform(-half, half, size=(samples, 2))
    in_v = np.abs(np.hypot(pts[:, 0] - v[0], pts[:, 1] - v[1]) - v[2]) < delta
    in_w = np.abs(np.hypot(pts[:, 0] - w[0], pts[:, 1] - w[1]) - w[2]) < delta
    hits = int(np.count_nonzero(in_v & in_w))
    p = hits / samples
    return box_area * p, box_area * math.sqrt(max(p * (1.0 - p), 1e-300) / samples)
