"""Tangent circle pairs, their common planks, and incidence counts.

For circles v = (v', v3), w = (w', w3) the separation and tangency defect
are

    d(v, w)     = |v' - w'| + |v3 - w3|,
    Delta(v, w) = | |v' - w'| - |v3 - w3| |,

so d ~ D with Delta ~ 0 means internal or external tangency at distance D.
A pair tangent at resolution delta (Delta <= 2 delta) lies in a common
lightplank of half-dimensions (delta, delta/tau, delta/tau^2) with
tau = sqrt(delta / D): the plank sits on the light cone translated to v,
centered at the cone point nearest to w, and the residual w - w0 points
along the cone normal, i.e. the plank's short axis.

The multiplicity of a delta,tau-rectangle in a configuration X counts the
circles of X whose delta-annulus contains the rectangle (sampled
containment).  `main_geom_check` histograms multiplicities over a grid of
candidate rectangles, extracts maximal pairwise-incomparable subfamilies
per dyadic multiplicity M, and reports the normalized count
M^(3/2) |R_M| tau / |X| that the incidence bound controls up to
logarithmic factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .geometry import (COORD_TOL, Lightplank, LightlikeBasis, SpacetimePoint,
                       membership_dilation, nearest_cone_point)
from .measures import CircleConfig, gamma_tau
from .rectangles import DeltaTauRectangle, greedy_maximal_incomparable, rect_sample_points

TANGENT_SLACK = 2.0  # pairs with Delta <= TANGENT_SLACK * delta count as tangent


@dataclass(frozen=True)
class PairTable:
    """Condensed pair statistics for a configuration (i < j ordering)."""

    i: np.ndarray
    j: np.ndarray
    d: np.ndarray
    delta_defect: np.ndarray
    delta: float

    def tangent_mask(self) -> np.ndarray:
        return self.delta_defect <= TANGENT_SLACK * self.delta

    def band_mask(self, D: float) -> np.ndarray:
        """Pairs with d in [D, 2D)."""
        return (self.d >= D) & (self.d < 2 * D)

    def dyadic_D(self) -> list[float]:
        """Dyadic distances delta * 2^k intersecting the observed range."""
        if len(self.d) == 0:
            return []
        lo = max(int(math.floor(math.log2(max(self.d.min(), self.delta) / self.delta))), 0)
        hi = int(math.floor(math.log2(self.d.max() / self.delta)))
        return [self.delta * 2.0 ** k for k in range(lo, hi + 1)]


def classify_pairs(config: CircleConfig) -> PairTable:
    """All unordered pairs with separation d and tangency defect Delta."""
    c = config.circles
    n = len(c)
    if n < 2:
        empty = np.empty(0)
        return PairTable(empty.astype(int), empty.astype(int), empty, empty, config.delta)
    planar = pdist(c[:, :2])
    radial = pdist(c[:, 2:3])
    i, j = np.triu_indices(n, k=1)
    return PairTable(i, j, planar + radial, np.abs(planar - radial), config.delta)


def tangent_pairs(config: CircleConfig, min_D: float | None = None):
    """Index pairs tangent at resolution delta with d >= min_D (default 8 delta)."""
    table = classify_pairs(config)
    if min_D is None:
        min_D = 8 * config.delta
    mask = table.tangent_mask() & (table.d >= min_D)
    return table.i[mask], table.j[mask], table.d[mask], table.delta_defect[mask]


def common_plank(v, w, delta: float) -> Lightplank:
    """Lightplank witnessing the tangency of circles v and w at resolution delta.

    Half-dimensions (delta, delta/tau, delta/tau^2) with tau = sqrt(delta/D),
    centered at the point of the cone through v nearest to w; both circles
    lie inside the plank at membership dilation <= 2 whenever Delta <= 2 delta.
    Raises ValueError when the pair is not a valid tangency at this scale
    (D < 8 delta, Delta > sqrt(delta), or concentric circles).
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    q = w - v
    planar = math.hypot(q[0], q[1])
    radial = abs(q[2])
    D = planar + radial
    defect = abs(planar - radial)
    if D < 8 * delta:
        raise ValueError(f"pair separation {D:.3g} below 8*delta={8 * delta:.3g}")
    if defect > math.sqrt(delta):
        raise ValueError(f"tangency defect {defect:.3g} above sqrt(delta)={math.sqrt(delta):.3g}")
    if planar <= COORD_TOL:
        raise ValueError("concentric circles admit no tangency plank")
    e = q[:2] / planar
    if q[2] >= 0:
        w0 = v + nearest_cone_point(q).to_array()
        basis = LightlikeBasis.from_planar(-e)
    else:
        reflected = nearest_cone_point(q * np.array([1.0, 1.0, -1.0])).to_array()
        w0 = v + reflected * np.array([1.0, 1.0, -1.0])
        basis = LightlikeBasis.from_planar(e)
    tau = math.sqrt(delta / D)
    return Lightplank(SpacetimePoint.from_array(w0), basis,
                      (delta, delta / tau, delta / tau ** 2))


def pair_count(config: CircleConfig, D: float) -> dict:
    """Tangent pairs at separation ~D against the plank-multiplicity bound.

    ratio = |pairs with d in [D, 2D), Delta <= 2 delta|
            / (gamma^(1/2) (D/delta)^(1/2) |X|)
    with gamma the doubled-plank multiplicity at tau_D = sqrt(delta/D).
    """
    if D < 8 * config.delta:
        raise ValueError("D below 8*delta")
    table = classify_pairs(config)
    count = int(np.sum(table.band_mask(D) & table.tangent_mask()))
    tau_D = math.sqrt(config.delta / D)
    gamma = max(gamma_tau(config, tau_D), 1)
    denom = math.sqrt(gamma) * math.sqrt(D / config.delta) * max(config.count, 1)
    return {
        "D": D,
        "count": count,
        "gamma": gamma,
        "tau_D": tau_D,
        "denominator": denom,
        "ratio": count / denom,
    }


def nu_multiplicity(config: CircleConfig, rect: DeltaTauRectangle) -> int:
    """Number of circles whose delta-annulus contains the whole rectangle.

    Containment is checked on the rectangle's sample points; a circle can
    only qualify if the rectangle's arc point a0 lies in its delta-annulus,
    which prunes the candidate set before the full sampled test.
    """
    c = config.circles
    if len(c) == 0:
        return 0
    delta = rect.delta
    a0 = rect.a0
    band_a0 = np.abs(np.hypot(a0[0] - c[:, 0], a0[1] - c[:, 1]) - c[:, 2])
    survivors = np.nonzero(band_a0 <= delta + COORD_TOL)[0]
    if len(survivors) == 0:
        return 0
    pts = rect_sample_points(rect)
    diff = pts[None, :, :] - c[survivors, None, :2]
    band = np.abs(np.sqrt(np.sum(diff * diff, axis=-1)) - c[survivors, None, 2:3].reshape(-1, 1))
    ok = np.all(band <= delta + 1e-7 * delta + COORD_TOL, axis=1)
    return int(np.sum(ok))


def candidate_rectangles(config: CircleConfig, tau: float) -> list[DeltaTauRectangle]:
    """One delta,tau-rectangle per circle and per arc node at spacing tau."""
    n_arc = max(4, int(math.ceil(2 * math.pi / tau)))
    angles = np.arange(n_arc) * (2 * math.pi / n_arc)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    rects = []
    for a1, a2, r in config.circles:
        core = SpacetimePoint(float(a1), float(a2), float(r))
        for u in dirs:
            rects.append(DeltaTauRectangle(core, (float(u[0]), float(u[1])),
                                           config.delta, tau))
    return rects


def main_geom_check(config: CircleConfig, tau: float | None = None,
                    eps: float = 0.1) -> dict:
    """Multiplicity histogram over candidate rectangles with incidence bounds.

    For each dyadic multiplicity class M (rectangles contained in [M, 2M)
    annuli) a maximal pairwise A-incomparable subfamily R_M is extracted
    with A = delta^(-eps), and the largest normalized count
    M^(3/2) |R_M| tau / |X| is reported raw and divided by the two
    candidate logarithmic normalizations.
    """
    delta = config.delta
    if tau is None:
        tau = math.sqrt(delta)
    if not delta <= tau <= 1:
        raise ValueError("tau must lie in [delta, 1]")
    A = delta ** (-eps)
    rects = candidate_rectangles(config, tau)
    mult = np.array([nu_multiplicity(config, r) for r in rects])
    buckets = []
    worst = 0.0
    m = 1
    while m <= max(int(mult.max(initial=0)), 1):
        members = [r for r, k in zip(rects, mult) if m <= k < 2 * m]
        if members:
            kept = greedy_maximal_incomparable(members, A)
            value = (m ** 1.5) * len(kept) * tau / max(config.count, 1)
            buckets.append({"M": m, "candidates": len(members),
                            "incomparable": len(kept), "value": value})
            worst = max(worst, value)
        m *= 2
    logs = math.log2(1.0 / delta)
    return {
        "delta": delta,
        "tau": tau,
        "A": A,
        "buckets": buckets,
        "max_value": worst,
        "log3_normalized": worst / max(logs, 1.0) ** 3,
        "eps_normalized": worst * delta ** eps,
    }
