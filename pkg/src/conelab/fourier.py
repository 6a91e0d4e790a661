"""Fourier extension from the truncated cone and decay means of cube measures.

The cone segment is parameterized in polar coordinates xi = (rho e(phi), rho)
with rho in [1, 2] and e(phi) = (cos phi, sin phi); the extension of a
density f against the smooth amplitude a(rho) is

    Ef(x) = integral f(rho, phi) a(rho) exp(2 pi i rho (x' . e(phi) + x3))
            rho drho dphi.

All integrals use a tensor grid: midpoint nodes in rho (the amplitude
vanishes to infinite order at both endpoints) and uniform nodes in phi
(periodic), so quadrature error decays faster than any power once the node
spacing resolves the integrand's bandwidth; callers state the bandwidth and
an oversampling factor.

For radially-times-angularly separable f the phi sum factors through the
radial transform G(u) = sum_rho g a rho drho exp(2 pi i rho u), which is
sampled exactly on a fine u-grid by a zero-padded FFT and then interpolated;
Ef(x) = sum_phi h(phi) dphi G(x' . e(phi) + x3).  The direct and separable
routes agree to the interpolation error and the direct route stays available
as a cross-check.

Cube measures enter through their exact transform: a union of unit cubes
with centers c has nu_hat(xi) = prod_j sinc(xi_j) * sum_c exp(-2 pi i c.xi),
and the decay mean integral(|nu_hat|^2 dsigma) over the segment is
accumulated per phi by a geometric recurrence in rho (one complex
exponential per cube per phi, multiplications elsewhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Lightplank, LightlikeBasis, SpacetimePoint
from .measures import CubeMeasure, max_plank_mass, rescale_to_Q
from .tangency import classify_pairs

BUMP_ORDER = 2  # Gevrey exponent of the amplitude's flatness at rho = 1, 2
MAX_KERNEL_EVALS = 2 * 10 ** 9


def smooth_bump(rho) -> np.ndarray:
    """C-infinity amplitude supported in (1, 2), peaking at 1 mid-segment.

    a(rho) = exp(1 - (1 - t^2)^(-BUMP_ORDER)) with t = 2 rho - 3; the
    squared reciprocal makes the Fourier tail decay like
    exp(-c f^(2/3)), fast enough that the extension is negligible a few
    units away from the light cone.
    """
    rho = np.asarray(rho, dtype=float)
    t = 2.0 * rho - 3.0
    out = np.zeros_like(rho)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(1.0 - (1.0 - t[inside] ** 2) ** (-BUMP_ORDER))
    return out


@dataclass(frozen=True)
class ConeQuadrature:
    """Midpoint-rho x uniform-phi tensor rule with the amplitude tabulated."""

    rho: np.ndarray
    phi: np.ndarray
    drho: float
    dphi: float
    amplitude: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.rho) * len(self.phi)

    @property
    def radial_weight(self) -> np.ndarray:
        """Jacobian weight rho * drho per radial node (amplitude excluded)."""
        return self.rho * self.drho


def make_quadrature(bandwidth_rho: float, bandwidth_phi: float, q: float = 2.0) -> ConeQuadrature:
    """Rule resolving integrands of the stated bandwidths with oversampling q.

    bandwidth_rho bounds |d(phase)/d(rho)| / (2 pi) over the integrand,
    bandwidth_phi the same in phi; node spacings are 1/(q * bandwidth).
    """
    n_rho = max(int(math.ceil(q * max(bandwidth_rho, 8.0))), 16)
    n_phi = max(int(math.ceil(2 * math.pi * q * max(bandwidth_phi, 8.0))), 16)
    drho = 1.0 / n_rho
    rho = 1.0 + (np.arange(n_rho) + 0.5) * drho
    dphi = 2 * math.pi / n_phi
    phi = np.arange(n_phi) * dphi
    return ConeQuadrature(rho, phi, drho, dphi, smooth_bump(rho))


def extension_bandwidths(points) -> tuple[float, float]:
    """Bandwidths of x . xi over the segment for the given evaluation points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    planar = np.hypot(pts[:, 0], pts[:, 1])
    b_rho = float(np.max(planar + np.abs(pts[:, 2]), initial=0.0)) + 16.0
    b_phi = 2.0 * float(np.max(planar, initial=0.0)) + 16.0
    return b_rho, b_phi


def extension_direct(points, quad: ConeQuadrature, f=None,
                     max_evals: int = MAX_KERNEL_EVALS) -> np.ndarray:
    """Ef at each point by the full tensor sum; f maps (rho, phi) grids to values."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) * quad.node_count > max_evals:
        raise ValueError(f"{len(pts)} points x {quad.node_count} nodes exceeds "
                         f"budget {max_evals:.2g}")
    rho = quad.rho
    cw = quad.amplitude * quad.radial_weight  # (n_rho,)
    if f is None:
        fv = np.ones((len(rho), len(quad.phi)))
    else:
        fv = np.asarray(f(rho[:, None], quad.phi[None, :]))
    coeff = fv * cw[:, None] * quad.dphi  # (n_rho, n_phi)
    cph, sph = np.cos(quad.phi), np.sin(quad.phi)
    out = np.empty(len(pts), dtype=complex)
    chunk = max(1, int(2 * 10 ** 6 / max(len(rho), 1)))
    for i, p in enumerate(pts):
        u = p[0] * cph + p[1] * sph + p[2]  # (n_phi,)
        acc = 0.0 + 0.0j
        for s in range(0, len(u), chunk):
            phase = np.exp(2j * math.pi * np.outer(rho, u[s:s + chunk]))
            acc += np.sum(coeff[:, s:s + chunk] * phase)
        out[i] = acc
    return out


@dataclass(frozen=True)
class RadialTable:
    """Samples of G(u) = sum_rho c_rho exp(2 pi i rho u) on a uniform u-grid.

    Sampling is exact (zero-padded FFT); lookups interpolate linearly and
    use G(-u) = conj(G(u)), which requires real radial coefficients.
    """

    du: float
    values: np.ndarray

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        au = np.abs(u) / self.du
        if np.any(au > len(self.values) - 1.001):
            raise ValueError("radial table lookup out of range")
        idx = np.minimum(au.astype(int), len(self.values) - 2)
        frac = au - idx
        vals = self.values[idx] * (1 - frac) + self.values[idx + 1] * frac
        return np.where(u >= 0, vals, np.conj(vals))


def radial_transform_table(quad: ConeQuadrature, g_rho, u_max: float,
                           samples_per_unit: int = 1024) -> RadialTable:
    """Tabulate the radial transform of g * amplitude out to |u| <= u_max."""
    g = np.ones_like(quad.rho) if g_rho is None else np.asarray(g_rho(quad.rho), dtype=float)
    if np.iscomplexobj(g):
        raise ValueError("separable path needs a real radial profile")
    c = g * quad.amplitude * quad.radial_weight
    n_rho = len(quad.rho)
    # G(k du) = exp(2 pi i rho_0 k du) * sum_j c_j exp(2 pi i j k / n_pad)
    # with rho_j = rho_0 + j drho and n_pad = 1 / (drho du): exact DFT samples.
    n_pad = 1 << int(math.ceil(math.log2(samples_per_unit / quad.drho)))
    du = 1.0 / (quad.drho * n_pad)
    n_keep = int(u_max / du) + 2
    if n_keep > n_pad:
        raise ValueError("u_max beyond one DFT period; refine the quadrature")
    inner = np.fft.ifft(np.concatenate([c, np.zeros(n_pad - n_rho)])) * n_pad
    k = np.arange(n_keep)
    values = np.exp(2j * math.pi * quad.rho[0] * k * du) * inner[:n_keep]
    return RadialTable(du, values)


def extension_separable(points, quad: ConeQuadrature, g_rho=None, h_phi=None,
                        samples_per_unit: int = 1024) -> np.ndarray:
    """Ef for f(rho, phi) = g(rho) h(phi) via the tabulated radial transform."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    h = np.ones_like(quad.phi) if h_phi is None else np.asarray(h_phi(quad.phi))
    planar = np.hypot(pts[:, 0], pts[:, 1]) if len(pts) else np.zeros(0)
    u_max = float(np.max(planar + np.abs(pts[:, 2]), initial=0.0)) + 1.0
    table = radial_transform_table(quad, g_rho, u_max, samples_per_unit)
    e1, e2 = np.cos(quad.phi), np.sin(quad.phi)
    out = np.empty(len(pts), dtype=complex)
    chunk = max(1, int(2 * 10 ** 6 / max(len(quad.phi), 1)))
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk]
        u = p[:, 0, None] * e1 + p[:, 1, None] * e2 + p[:, 2, None]
        out[s:s + chunk] = (table(u) * (h * quad.dphi)).sum(axis=1)
    return out


def sigma_check(points, q: float = 3.0) -> np.ndarray:
    """sigma-check = E1: the inverse transform of the cone measure itself."""
    b_rho, b_phi = extension_bandwidths(points)
    quad = make_quadrature(b_rho, b_phi, q)
    return extension_direct(points, quad)


def nu_hat(nu: CubeMeasure, xi) -> np.ndarray:
    """Exact Fourier transform of the cube measure at frequencies xi."""
    x = np.asarray(xi, dtype=float).reshape(-1, 3)
    form = np.sinc(x[:, 0]) * np.sinc(x[:, 1]) * np.sinc(x[:, 2])
    phases = np.exp(-2j * math.pi * (x @ nu.centers.T))
    return form * phases.sum(axis=1)


def decay_mean(nu: CubeMeasure, q: float = 2.0, phi_batch: int = 8) -> float:
    """integral over the segment of |nu_hat|^2 dsigma, dsigma = a rho drho dphi.

    Bandwidths come from the center-difference spread of the measure; the
    rho dependence per cube is a geometric sequence, so each (phi, cube)
    costs two exponentials and n_rho multiplications.
    """
    if nu.mass == 0:
        return 0.0
    centers = nu.centers
    planar_span = math.hypot(
        float(centers[:, 0].max() - centers[:, 0].min()),
        float(centers[:, 1].max() - centers[:, 1].min()))
    k_span = planar_span + float(centers[:, 2].max() - centers[:, 2].min())
    quad = make_quadrature(k_span + 16.0, 2 * planar_span + 16.0, q)
    rho = quad.rho
    w_rho = quad.amplitude * quad.radial_weight
    total = 0.0
    n_rho = len(rho)
    for s in range(0, len(quad.phi), phi_batch):
        phi = quad.phi[s:s + phi_batch]
        k = (centers[:, 0] * np.cos(phi)[:, None]
             + centers[:, 1] * np.sin(phi)[:, None] + centers[:, 2])  # (b, nc)
        z0 = np.exp(-2j * math.pi * rho[0] * k)
        step = np.exp(-2j * math.pi * quad.drho * k)
        arr = np.broadcast_to(step[:, None, :], (len(phi), n_rho, k.shape[1])).copy()
        arr[:, 0, :] = z0
        np.cumprod(arr, axis=1, out=arr)
        s_sum = arr.sum(axis=2)  # (b, n_rho)
        form = (np.sinc(rho[None, :] * np.cos(phi)[:, None])
                * np.sinc(rho[None, :] * np.sin(phi)[:, None])
                * np.sinc(rho)[None, :])
        total += float(np.sum((np.abs(s_sum) ** 2) * (form ** 2) * w_rho[None, :]))
    return total * quad.dphi


def decay_ratio(nu: CubeMeasure, q: float = 2.0) -> dict:
    """Decay mean against the plank-mass bound sqrt(P_lower) * mass."""
    mean = decay_mean(nu, q)
    lower, upper = max_plank_mass(nu)
    denom = math.sqrt(max(lower, 1)) * max(nu.mass, 1)
    return {
        "R": nu.R,
        "mass": nu.mass,
        "decay_mean": mean,
        "plank_lower": lower,
        "plank_upper": upper,
        "ratio": mean / denom,
    }


# ---------------------------------------------------------------------------
# Knapp example: an angular sector concentrates on a dual lightplank


def knapp_sector(gamma: float):
    """Angular indicator of width gamma^(-1/2) centered at phi = 0."""
    width = gamma ** -0.5

    def h(phi):
        wrapped = np.minimum(np.asarray(phi), 2 * math.pi - np.asarray(phi))
        return (np.abs(wrapped) <= width / 2).astype(float)

    return h, width


def knapp_center(R: int) -> np.ndarray:
    """Anchor cube center for the Knapp tube, mid-height in B_R."""
    return np.array([R / 2 - 0.5, R / 2 + 0.5, 1.5 * R + 0.5])


def knapp_plank(R: int, gamma: float) -> Lightplank:
    """Dual plank of the phi = 0 sector, translated into B_R."""
    basis = LightlikeBasis.from_planar(np.array([1.0, 0.0]))
    return Lightplank(SpacetimePoint.from_array(knapp_center(R)), basis,
                      (0.25, 0.25 * math.sqrt(gamma), 0.25 * gamma))


def knapp_tube_measure(R: int, gamma: int, include_rest: bool = True) -> CubeMeasure:
    """Light tube along the plank's long axis, optionally padded to mass R.

    The tube of length gamma has cube centers c0 + k(-1, 0, 1) so the
    modulated sector extension is coherent on it; with include_rest a far
    vertical tube tops the mass up to R where the extension has decayed.
    """
    c0 = knapp_center(R)
    ks = np.arange(gamma) - gamma // 2
    tube = np.column_stack([
        (c0[0] - 0.5 - ks).astype(np.int64),
        np.full(len(ks), int(c0[1] - 0.5)),
        (c0[2] - 0.5 + ks).astype(np.int64),
    ])
    rest = R - gamma if include_rest else 0
    vert = np.column_stack([
        np.full(rest, R - 1), np.full(rest, 0), np.arange(R, R + rest)
    ]) if rest > 0 else np.empty((0, 3), dtype=np.int64)
    return CubeMeasure(R, np.vstack([tube, vert]))


def cube_midpoints(nu: CubeMeasure, m: int) -> np.ndarray:
    """m^3 midpoint samples per cube, flattened to (mass * m^3, 3)."""
    t = (np.arange(m) + 0.5) / m
    offs = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3)
    return (nu.cubes[:, None, :] + offs[None, :, :]).reshape(-1, 3)


def weighted_l2(nu: CubeMeasure, g_rho=None, h_phi=None, shift=None,
                q: float = 2.0, m: int = 4, f=None) -> float:
    """integral |Ef|^2 dnu: per-cube average of m^3 midpoint samples.

    Separable f = g(rho) h(phi) uses the tabulated radial transform; an
    arbitrary f(rho, phi) falls back to the direct sum.  `shift` evaluates
    the modulation exp(-2 pi i shift . xi) f, i.e. Ef translated by shift.
    """
    if m < 2:
        raise ValueError("need at least 2 samples per axis")
    pts = cube_midpoints(nu, m)
    if shift is not None:
        pts = pts - np.asarray(shift, dtype=float)
    quad = make_quadrature(*extension_bandwidths(pts), q)
    if f is not None:
        vals = extension_direct(pts, quad, f=f)
    else:
        vals = extension_separable(pts, quad, g_rho, h_phi)
    return float(np.sum(np.abs(vals) ** 2)) / m ** 3


def knapp_sharpness(R: int, gamma: int, q: float = 2.0, m: int = 4) -> dict:
    """Sharpness ratio of the weighted L^2 bound on the aligned light tube.

    ratio = integral(|Ef|^2 dnu) / (gamma^(1/2) |f|^2_{L2(dsigma)}) for the
    modulated sector f of angular width gamma^(-1/2) and the tube measure of
    mass gamma along the dual plank's long axis; the sharpness computation
    predicts a ratio bounded above and below uniformly in R and gamma.
    """
    if not 1 <= gamma <= R:
        raise ValueError("gamma must lie in [1, R]")
    nu = knapp_tube_measure(R, gamma, include_rest=False)
    h_phi, width = knapp_sector(gamma)
    wl2 = weighted_l2(nu, None, h_phi, shift=knapp_center(R), q=q, m=m)
    quad = make_quadrature(8, 8, q)
    f_norm2 = float(np.sum(quad.amplitude * quad.radial_weight)) * width
    ratio = wl2 / (math.sqrt(gamma) * f_norm2)
    return {
        "R": R,
        "gamma": gamma,
        "weighted_l2": wl2,
        "f_norm2": f_norm2,
        "ratio": ratio,
    }


def stationary_phase_diagnostic(q: float = 8.0, radii=(10, 20, 50, 100, 200),
                                distances=(0, 1, 2, 5, 10, 20)) -> dict:
    """Decay profile of sigma_check on and transverse to the light cone.

    Stationary phase gives |sigma_check(x)| ~ |x|^(-1/2) along the cone
    {|x'| = x3} and decay faster than any power in the distance to the cone
    (the amplitude is Gevrey-smooth).  Samples the on-cone profile with a
    log-log slope fit, the transverse profile starting from |x| = 50 on the
    cone, and repeats everything at doubled quadrature density.
    """
    e_cone = np.array([1.0, 0.0, 1.0]) / math.sqrt(2.0)
    e_perp = np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0)
    radii = np.asarray(radii, dtype=float)
    distances = np.asarray(distances, dtype=float)
    pts = np.vstack([radii[:, None] * e_cone,
                     50.0 * e_cone + distances[:, None] * e_perp])
    vals = np.abs(sigma_check(pts, q=q))
    vals2 = np.abs(sigma_check(pts, q=2.0 * q))
    on, off = vals[:len(radii)], vals[len(radii):]
    slope = float(np.polyfit(np.log(radii), np.log(on), 1)[0])
    return {
        "radii": radii,
        "on_cone": on,
        "slope": slope,
        "distances": distances,
        "transverse": off,
        "transverse_ratio": float(off[-1] / off[0]),
        "doubling_rel": float(np.max(np.abs(vals2 - vals) / vals)),
    }


def _pair_kernel(rho, phi):
    """|unit-cube transform|^2 restricted to the cone segment."""
    s = np.sinc(rho * np.cos(phi)) * np.sinc(rho * np.sin(phi)) * np.sinc(rho)
    return s * s


def _pair_kernel_values(nu: CubeMeasure, q: float):
    """K(0) and K(c_j - c_i) for i < j, K = extension of the cube kernel."""
    c = nu.centers
    i, j = np.triu_indices(len(c), k=1)
    pts = np.vstack([np.zeros((1, 3)), c[j] - c[i]])
    quad = make_quadrature(*extension_bandwidths(pts), q)
    vals = extension_direct(pts, quad, f=_pair_kernel)
    return float(vals[0].real), vals[1:].real


def decay_pair_sum(nu: CubeMeasure, q: float = 2.0) -> float:
    """decay_mean by the kernel route: sum of K(c' - c) over all cube pairs.

    K(x) = integral |cube transform|^2 exp(2 pi i x.xi) dsigma, so summing
    over ordered center pairs reproduces integral |nu_hat|^2 dsigma exactly;
    quadratic in the mass, kept as an independent cross-check.
    """
    k0, off = _pair_kernel_values(nu, q)
    return nu.mass * k0 + 2.0 * float(np.sum(off))


def decay_by_classes(nu: CubeMeasure, q: float = 2.0, eps: float = 0.05) -> dict:
    """Pair-sum route regrouped by separation classes of the rescaled family.

    Off-diagonal pairs split into a near class (cube-scale separation at
    most R^(10 eps)) and dyadic bands [D, 2D) of the rescaled separation;
    the partition is exact, so diag + near + sum of bands equals the plain
    pair sum and the table shows which separations carry the decay mean.
    """
    k0, off = _pair_kernel_values(nu, q)
    contrib = 2.0 * off
    table = classify_pairs(rescale_to_Q(nu))
    near = table.d / table.delta <= nu.R ** (10.0 * eps)
    bands = {}
    for D in table.dyadic_D():
        mask = table.band_mask(D) & ~near
        if np.any(mask):
            bands[D] = float(np.sum(contrib[mask]))
    return {
        "diag": nu.mass * k0,
        "near": float(np.sum(contrib[near])),
        "bands": bands,
        "total": nu.mass * k0 + float(np.sum(contrib)),
    }
