"""Cube measures in B_R, circle configurations in Q, and their generators.

A cube measure is a union of unit lattice cubes inside
B_R = [0, R]^2 x [R, 2R]; the measure of a set is the number of cube
centers it contains (one unit of mass per cube).  Rescaling x -> x/R
followed by the similarity of ratio 2*alpha0 per block places the dual
circle configuration inside

    Q = [0, 2*alpha0]^2 x [1 - alpha0, 1 + alpha0],

with unit cubes mapping to resolution delta = 2*alpha0 / R.  Both blocks
are scaled by the same factor so circle distances d and tangency defects
Delta transform by exactly that factor and lightlike displacements stay
lightlike.

Plank mass P(nu) is the largest nu-measure of a 1 x sqrt(R) x R lightplank
(full dimensions).  It is bracketed by scanning a finite plank family:
directions spaced sqrt(1/R)/2, positions on the half-dimension lattice in
plank coordinates; the lower value scans unit planks, the upper scans the
same family with all dimensions doubled, so true P(nu) lies in
[lower, upper] and upper <= 27 P(nu) by splitting a doubled plank into
shifted unit planks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

ALPHA0 = 1.0 / 100.0

# Q box bounds: planar in [0, 2*alpha0]^2, radii in [1 -/+ alpha0].
Q_PLANAR = (0.0, 2 * ALPHA0)
Q_RADII = (1.0 - ALPHA0, 1.0 + ALPHA0)
# Domain for the circular maximal function: annuli of radius ~1 around
# near-origin centers, so rasters on [-1.1, 1.1]^2 contain every annulus;
# the planar box is wide enough for tangencies at separations >> delta.
MAXIMAL_RADII = (0.5, 1.0)
MAXIMAL_PLANAR = (-0.05, 0.05)

_GENERATOR_KINDS = ("light_tube", "vertical_tube", "knapp_pair", "wolff_radii", "random_frostman")


@dataclass
class CubeMeasure:
    """Finitely many unit lattice cubes in B_R; `cubes` holds integer corners."""

    R: int
    cubes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cubes, dtype=np.int64).reshape(-1, 3)
        c = np.unique(c, axis=0)
        if len(c):
            if c[:, 0].min() < 0 or c[:, 0].max() > self.R - 1 \
                    or c[:, 1].min() < 0 or c[:, 1].max() > self.R - 1 \
                    or c[:, 2].min() < self.R or c[:, 2].max() > 2 * self.R - 1:
                raise ValueError("cube corners outside [0,R-1]^2 x [R,2R-1]")
        c.setflags(write=False)
        self.cubes = c
        self._frostman: float | None = None

    @property
    def mass(self) -> int:
        return len(self.cubes)

    @property
    def centers(self) -> np.ndarray:
        return self.cubes + 0.5

    def frostman_constant(self) -> float:
        if self._frostman is None:
            self._frostman = _frostman_value(self.centers, base=1.0)
        return self._frostman


@dataclass
class CircleConfig:
    """Circles (a1, a2, r) at resolution delta, usually inside Q."""

    circles: np.ndarray
    delta: float
    nominal_R: int | None = None
    scale: float | None = None  # multiply cube-scale distances by this to get config scale

    def __post_init__(self):
        c = np.asarray(self.circles, dtype=float).reshape(-1, 3)
        order = np.lexsort((c[:, 2], c[:, 1], c[:, 0]))
        c = c[order]
        c.setflags(write=False)
        self.circles = c
        self._frostman: float | None = None

    @property
    def count(self) -> int:
        return len(self.circles)

    def frostman_constant(self) -> float:
        if self._frostman is None:
            self._frostman = _frostman_value(self.circles, base=self.delta)
        return self._frostman


def _frostman_value(points: np.ndarray, base: float) -> float:
    """max over dyadic r >= base of (points in B(x0, r)) / (r / base).

    Candidate centers are the points themselves plus the (r/2)-grid nodes
    adjacent to them; a ball-covering argument gives
    true sup over all centers and r >= base <= 4 * returned value.
    """
    if len(points) == 0:
        return 0.0
    tree = cKDTree(points)
    diam = float(np.max(points.max(axis=0) - points.min(axis=0))) + base
    levels = int(math.ceil(math.log2(max(2.0 * diam / base, 2.0)))) + 1
    best = 0.0
    ring = np.array([[i, j, k] for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)])
    for k in range(levels):
        r = base * (2.0 ** k)
        step = 0.5 * r
        nodes = np.round(points / step).astype(np.int64)[:, None, :] + ring
        nodes = np.unique(nodes.reshape(-1, 3), axis=0) * step
        cands = np.vstack([points, nodes])
        counts = tree.query_ball_point(cands, r, return_length=True)
        best = max(best, float(np.max(counts)) / (r / base))
    return best


def _plank_frame(theta: float) -> np.ndarray:
    """Rows (e_s, e_m, e_l) for planar direction (cos theta, sin theta)."""
    c, s = math.cos(theta), math.sin(theta)
    rt = 1.0 / math.sqrt(2.0)
    return np.array([[-c * rt, -s * rt, -rt],
                     [-s, c, 0.0],
                     [-c * rt, -s * rt, rt]])


def _max_lattice_plank_count(points: np.ndarray, half_dims, dir_spacing: float,
                             widen: int, weights=None) -> float:
    """Max point count (or weight sum) over planks on the half-dimension lattice.

    widen = 1 scans planks of the given half dims, widen = 2 scans the
    doubled family on the same center lattice.
    """
    if len(points) == 0:
        return 0
    half = np.asarray(half_dims, dtype=float)
    ndir = max(1, int(math.ceil(2 * math.pi / dir_spacing)))
    offsets = np.arange(-widen, widen + 1)
    best = 0.0
    enc = np.int64(1) << 20
    bias = np.int64(1) << 19
    for i in range(ndir):
        coords = points @ _plank_frame(i * dir_spacing).T
        q = coords / half
        base = np.floor(q).astype(np.int64)
        cand = base[:, :, None] + offsets[None, None, :]           # (n, 3, noff)
        valid = np.abs(q[:, :, None] - cand) <= widen + 1e-12
        cand = cand + bias
        keys = ((cand[:, 0, :, None, None] * enc + cand[:, 1, None, :, None]) * enc
                + cand[:, 2, None, None, :])
        mask = (valid[:, 0, :, None, None] & valid[:, 1, None, :, None]
                & valid[:, 2, None, None, :])
        flat = keys[mask]
        if not len(flat):
            continue
        if weights is None:
            _, counts = np.unique(flat, return_counts=True)
            best = max(best, int(counts.max()))
        else:
            w = np.broadcast_to(np.asarray(weights, dtype=float)[:, None, None, None],
                                keys.shape)[mask]
            _, inv = np.unique(flat, return_inverse=True)
            best = max(best, float(np.bincount(inv, weights=w).max()))
    return best


def max_plank_mass(nu: CubeMeasure, weights=None):
    """Bracket [lower, upper] for the largest 1 x sqrt(R) x R plank mass.

    Optional per-cube weights give the weighted plank mass (for measures
    h * nu with a density on the cubes).
    """
    half = (0.5, 0.5 * math.sqrt(nu.R), 0.5 * nu.R)
    spacing = 0.5 / math.sqrt(nu.R)
    lower = _max_lattice_plank_count(nu.centers, half, spacing, 1, weights)
    upper = _max_lattice_plank_count(nu.centers, half, spacing, 2, weights)
    return lower, upper


def gamma_tau_bracket(config: CircleConfig, tau: float) -> tuple[int, int]:
    """Bracket for the largest circle count in a delta x delta/tau x delta/tau^2 plank."""
    d = config.delta
    half = (d, d / tau, d / tau ** 2)
    lower = _max_lattice_plank_count(config.circles, half, 0.5 * tau, widen=1)
    upper = _max_lattice_plank_count(config.circles, half, 0.5 * tau, widen=2)
    return lower, upper


def gamma_tau(config: CircleConfig, tau: float) -> int:
    """Doubled-plank upper value for the plank multiplicity gamma_tau."""
    return gamma_tau_bracket(config, tau)[1]


@lru_cache(maxsize=None)
def _self_energy_table() -> dict:
    try:
        text = resources.files("conelab").joinpath("data/self_energy.json").read_text()
        return {float(k): float(v) for k, v in json.loads(text).items()}
    except (FileNotFoundError, OSError):
        return {}


@lru_cache(maxsize=64)
def cube_self_energy(alpha: float, samples: int = 10 ** 6) -> float:
    """s(alpha) = E |U - V|^(-alpha) for U, V iid uniform on a unit cube.

    Values for common alpha ship as packaged data; otherwise a fixed-seed
    Monte Carlo estimate is computed once per process.
    """
    table = _self_energy_table()
    if alpha in table:
        return table[alpha]
    rng = np.random.default_rng(7)
    u = rng.random((samples, 3))
    v = rng.random((samples, 3))
    r = np.linalg.norm(u - v, axis=1)
    return float(np.mean(r ** (-alpha)))


def energy(nu: CubeMeasure, alpha: float) -> float:
    """alpha-energy: ordered cross pairs by center distance plus mass * s(alpha)."""
    if not 0 < alpha < 3:
        raise ValueError("alpha must lie in (0, 3) for an integrable self term")
    c = nu.centers
    if len(c) == 0:
        return 0.0
    cross = 0.0
    if len(c) > 1:
        cross = 2.0 * float(np.sum(pdist(c) ** (-alpha)))
    return cross + nu.mass * cube_self_energy(alpha)


def rescale_to_Q(nu: CubeMeasure) -> CircleConfig:
    """Map cube centers into Q by x -> x/R followed by the 2*alpha0 similarity.

    (x', x3) -> (2*alpha0*x', 1 - alpha0 + 2*alpha0*(x3 - 1)); both blocks
    carry the same factor 2*alpha0/R from cube scale, recorded in `scale`,
    and one unit cube maps to resolution delta = 2*alpha0/R.
    """
    t = nu.centers / nu.R
    circles = np.column_stack([
        2 * ALPHA0 * t[:, 0],
        2 * ALPHA0 * t[:, 1],
        1.0 - ALPHA0 + 2 * ALPHA0 * (t[:, 2] - 1.0),
    ])
    s = 2 * ALPHA0 / nu.R
    return CircleConfig(circles, delta=s, nominal_R=nu.R, scale=s)


# ---------------------------------------------------------------------------
# generators


def _random_direction_footprint(rng, R: int, gamma: int) -> tuple[float, np.ndarray]:
    for _ in range(256):
        theta = rng.uniform(0.0, 2 * math.pi)
        u = np.array([math.cos(theta), math.sin(theta)])
        span = np.abs(u) * (gamma - 1)
        if np.all(span <= R - 1):
            lo = np.maximum(0, -np.floor(u * (gamma - 1)))
            hi = R - 1 - np.maximum(0, np.ceil(u * (gamma - 1)))
            base = np.array([rng.integers(int(lo[k]), int(hi[k]) + 1) for k in range(2)])
            return theta, base
    raise ValueError(f"no lightlike footprint for gamma={gamma} in R={R}")


def _light_tube(rng, R: int, gamma: int) -> np.ndarray:
    theta, base = _random_direction_footprint(rng, R, gamma)
    k = np.arange(gamma)
    x = base[0] + np.round(k * math.cos(theta)).astype(np.int64)
    y = base[1] + np.round(k * math.sin(theta)).astype(np.int64)
    return np.column_stack([x, y, R + k])


def _vertical_tube(rng, R: int, length: int) -> np.ndarray:
    a = rng.integers(0, R, size=2)
    k = np.arange(length)
    return np.column_stack([np.full(length, a[0]), np.full(length, a[1]), R + k])


def _frostman_cubes(rng, R: int, n: int) -> np.ndarray:
    """Rejection sampling down a dyadic tree of balls with per-node capacity 4r.

    Every accepted point increments the counters of all (r/2)-grid balls
    containing it at each dyadic level r; any true ball B(x, r) sits inside
    some tree ball of radius 2r, giving frostman_constant <= 8.
    """
    levels = [2.0 ** k for k in range(0, int(math.ceil(math.log2(2 * R))) + 2)]
    counters: dict[tuple, int] = {}
    ring = np.array([[i, j, k] for i in range(-2, 3) for j in range(-2, 3) for k in range(-2, 3)])

    def node_keys(p):
        keys = []
        for li, r in enumerate(levels):
            step = 0.5 * r
            base = np.round(p / step).astype(np.int64)
            nodes = base + ring
            d = np.linalg.norm(nodes * step - p, axis=1)
            for node in nodes[d <= r]:
                keys.append((li, int(node[0]), int(node[1]), int(node[2])))
        return keys

    out = []
    seen = set()
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 500 * n:
            raise RuntimeError("frostman sampler failed to place points")
        corner = (int(rng.integers(0, R)), int(rng.integers(0, R)), int(rng.integers(R, 2 * R)))
        if corner in seen:
            continue
        p = np.array(corner, dtype=float) + 0.5
        keys = node_keys(p)
        if any(counters.get(key, 0) + 1 > 4 * levels[key[0]] for key in keys):
            continue
        for key in keys:
            counters[key] = counters.get(key, 0) + 1
        seen.add(corner)
        out.append(corner)
    return np.array(out, dtype=np.int64)


def generate(kind: str, R: int, seed: int = 0, **params) -> CubeMeasure:
    """Seeded test-family generator; every family has frostman_constant <= 8.

    kinds: light_tube(gamma), vertical_tube(length), knapp_pair(gamma),
    wolff_radii(n) (distinct heights), random_frostman(n).
    """
    if kind not in _GENERATOR_KINDS:
        raise ValueError(f"unknown kind {kind!r}, expected one of {_GENERATOR_KINDS}")
    if R < 8:
        raise ValueError("R too small")
    rng = np.random.default_rng(seed)
    if kind == "light_tube":
        gamma = int(params.get("gamma", int(round(math.sqrt(R)))))
        if not 1 <= gamma <= R:
            raise ValueError("gamma must lie in [1, R]")
        return CubeMeasure(R, _light_tube(rng, R, gamma))
    if kind == "vertical_tube":
        length = int(params.get("length", R))
        if not 1 <= length <= R:
            raise ValueError("length must lie in [1, R]")
        return CubeMeasure(R, _vertical_tube(rng, R, length))
    if kind == "knapp_pair":
        gamma = int(params.get("gamma", int(round(math.sqrt(R)))))
        tube = _light_tube(rng, R, gamma)
        for _ in range(64):
            vert = _vertical_tube(rng, R, R - gamma)
            both = np.vstack([tube, vert])
            if len(np.unique(both, axis=0)) == len(both):
                return CubeMeasure(R, both)
        raise RuntimeError("could not place disjoint knapp pair")
    if kind == "wolff_radii":
        n = int(params.get("n", R))
        if not 1 <= n <= R:
            raise ValueError("n must lie in [1, R]")
        heights = rng.choice(np.arange(R, 2 * R), size=n, replace=False)
        xy = rng.integers(0, R, size=(n, 2))
        return CubeMeasure(R, np.column_stack([xy, heights]))
    n = int(params.get("n", R))
    if not 1 <= n <= R:
        raise ValueError("n must lie in [1, R]")
    return CubeMeasure(R, _frostman_cubes(rng, R, n))


def generate_config(kind: str, delta: float, n: int, seed: int = 0,
                    radius_band: tuple[float, float] = Q_RADII,
                    planar_box: tuple[float, float] | None = None) -> CircleConfig:
    """Unit-scale circle configurations of centers and radii.

    Centers default to the Q planar box for the Q radius band and to the
    wider maximal-function box otherwise.  wolff_radii places at most one
    radius per delta-interval of the band (n capped at the band capacity);
    random_frostman rejection-samples against a dyadic ball tree at base
    scale delta (capacity 4 r/delta).
    """
    rng = np.random.default_rng(seed)
    lo, hi = radius_band
    if planar_box is None:
        planar_box = Q_PLANAR if radius_band == Q_RADII else MAXIMAL_PLANAR
    if kind == "wolff_radii":
        capacity = int((hi - lo) / delta)
        if capacity < 1:
            raise ValueError(f"radius band {radius_band} narrower than delta={delta}")
        m = min(n, capacity)
        bins = np.sort(rng.choice(capacity, size=m, replace=False))
        radii = lo + (bins + rng.uniform(0.05, 0.95, size=m)) * delta
        centers = rng.uniform(planar_box[0], planar_box[1], size=(m, 2))
        return CircleConfig(np.column_stack([centers, radii]), delta=delta)
    if kind != "random_frostman":
        raise ValueError(f"unknown config kind {kind!r}")
    span = max(hi - lo, planar_box[1] - planar_box[0])
    levels = [delta * 2.0 ** k for k in
              range(0, int(math.ceil(math.log2(span / delta * 2))) + 2)]
    counters: dict[tuple, int] = {}
    ring = np.array([[i, j, k] for i in range(-2, 3) for j in range(-2, 3) for k in range(-2, 3)])
    out = []
    attempts = 0
    while len(out) < n and attempts < 2000 * n:
        attempts += 1
        p = np.array([rng.uniform(*planar_box), rng.uniform(*planar_box), rng.uniform(lo, hi)])
        keys = []
        bad = False
        for li, r in enumerate(levels):
            step = 0.5 * r
            nodes = np.round(p / step).astype(np.int64) + ring
            d = np.linalg.norm(nodes * step - p, axis=1)
            for node in nodes[d <= r]:
                key = (li, int(node[0]), int(node[1]), int(node[2]))
                keys.append(key)
                if counters.get(key, 0) + 1 > 4 * (r / delta):
                    bad = True
                    break
            if bad:
                break
        if bad:
            continue
        for key in keys:
            counters[key] = counters.get(key, 0) + 1
        out.append(p)
    if len(out) < n:
        raise RuntimeError(f"placed only {len(out)}/{n} circles at delta={delta}")
    return CircleConfig(np.array(out), delta=delta)


# ---------------------------------------------------------------------------
# persistence: header line, then one triple per line


def save_measure(path: str | Path, nu: CubeMeasure) -> None:
    lines = [f"R={nu.R}"]
    lines += [f"{v[0]} {v[1]} {v[2]}" for v in nu.cubes]
    Path(path).write_text("\n".join(lines) + "\n")


def load_measure(path: str | Path) -> CubeMeasure:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("R="):
        raise ValueError(f"{path}: missing R= header")
    R = int(lines[0][2:])
    cubes = np.array([[int(t) for t in ln.split()] for ln in lines[1:]], dtype=np.int64)
    return CubeMeasure(R, cubes.reshape(-1, 3))


def save_config(path: str | Path, config: CircleConfig) -> None:
    lines = [f"delta={config.delta:.17g}"]
    if config.nominal_R is not None:
        lines.append(f"R={config.nominal_R}")
    lines += [f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}" for v in config.circles]
    Path(path).write_text("\n".join(lines) + "\n")


def load_config(path: str | Path) -> CircleConfig:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("delta="):
        raise ValueError(f"{path}: missing delta= header")
    delta = float(lines[0][6:])
    nominal = None
    body = lines[1:]
    if body and body[0].startswith("R="):
        nominal = int(body[0][2:])
        body = body[1:]
    circles = np.array([[float(t) for t in ln.split()] for ln in body])
    scale = delta if nominal is not None else None
    return CircleConfig(circles.reshape(-1, 3), delta=delta, nominal_R=nominal, scale=scale)
