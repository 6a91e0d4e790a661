"""Annulus rasterization, multiplicity fields, and the circular maximal function."""

import math

import numpy as np
import pytest

from conelab.maximal import (
    RasterGrid,
    WeightedFamily,
    annulus_average,
    annulus_mask,
    default_grid,
    load_grid,
    lp_norm,
    maximal_function,
    maximal_stats,
    multiplicity_at,
    multiplicity_field,
    radial_lp,
    radius_grid,
    save_grid,
    weighted_field,
    wolff_duality_check,
    wolff_example_check,
)
from conelab.measures import MAXIMAL_RADII, CircleConfig, generate_config


def reference_mask(circle, delta, grid):
    """Independent dense distance-test raster of one annulus."""
    xs = grid.nodes_1d
    d = np.abs(np.hypot(xs[None, :] - circle[0], xs[:, None] - circle[1]) - circle[2])
    return d <= delta, np.abs(d - delta)


class TestRasterization:
    def test_spans_match_distance_test(self):
        rng = np.random.default_rng(0)
        delta = 2.0 ** -5
        grid = default_grid(delta)
        for _ in range(25):
            circle = (rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                      rng.uniform(0.5, 1.0))
            mask = annulus_mask(circle, delta, grid)
            ref, margin = reference_mask(circle, delta, grid)
            decisive = margin > 1e-9  # away from exact-boundary roundoff
            assert np.array_equal(mask[decisive], ref[decisive])

    def test_multiplicity_field_is_sum_of_masks(self):
        config = generate_config("wolff_radii", 2.0 ** -5, 12, seed=1,
                                 radius_band=MAXIMAL_RADII)
        field, grid = multiplicity_field(config)
        total = np.zeros(field.shape, dtype=int)
        decisive = np.ones(field.shape, dtype=bool)
        for circle in config.circles:
            ref, margin = reference_mask(circle, config.delta, grid)
            total += ref
            decisive &= margin > 1e-9
        assert np.array_equal(field[decisive], total[decisive])

    def test_point_and_field_multiplicities_agree(self):
        config = generate_config("wolff_radii", 2.0 ** -5, 10, seed=2,
                                 radius_band=MAXIMAL_RADII)
        field, grid = multiplicity_field(config)
        xs = grid.nodes_1d
        rows = np.arange(40, len(xs), 97)
        pts = np.column_stack([np.repeat(xs[rows], len(rows)),
                               np.tile(xs[rows], len(rows))])
        at = multiplicity_at(config, pts).reshape(len(rows), len(rows))
        # identical up to cells where the distance test sits on the boundary
        sub = field[np.ix_(rows, rows)]
        margin_ok = np.ones(sub.shape, dtype=bool)
        for circle in config.circles:
            d = np.abs(np.hypot(pts[:, 0] - circle[0], pts[:, 1] - circle[1])
                       - circle[2]).reshape(len(rows), len(rows))
            margin_ok &= np.abs(d - config.delta) > 1e-9
        # note transposed index order: field is [row=y][col=x]
        assert np.array_equal(at.T[margin_ok], sub[margin_ok])

    def test_lam_monotone(self):
        config = generate_config("random_frostman", 2.0 ** -5, 12, seed=3,
                                 radius_band=MAXIMAL_RADII)
        pts = np.random.default_rng(4).uniform(-1, 1, size=(200, 2))
        m1 = multiplicity_at(config, pts, lam=1.0)
        m2 = multiplicity_at(config, pts, lam=2.0)
        assert np.all(m2 >= m1)

    def test_window_guard(self):
        config = CircleConfig(np.array([[0.3, 0.0, 1.0]]), delta=2.0 ** -5)
        with pytest.raises(ValueError):
            multiplicity_field(config)  # reach 1.33 beyond window 1.1

    def test_annulus_area_raster(self):
        delta = 2.0 ** -6
        grid = default_grid(delta)
        mask = annulus_mask((0.0, 0.0, 1.0), delta, grid)
        area = mask.sum() * grid.cell_area
        assert area == pytest.approx(4 * math.pi * delta, rel=0.05)
        for p in (1.0, 1.5, 3.0):
            norm = lp_norm(mask.astype(float), grid, p)
            assert norm == pytest.approx((4 * math.pi * delta) ** (1 / p), rel=0.10)


class TestAverages:
    def test_ones_average_exactly_one(self):
        delta = 2.0 ** -6
        grid = default_grid(delta)
        f = np.ones((len(grid.nodes_1d),) * 2)
        assert annulus_average(f, grid, (0.01, 0.01), 1.0, delta) == 1.0

    def test_half_plane_average(self):
        delta = 2.0 ** -6
        grid = default_grid(delta)
        xs = grid.nodes_1d
        a = (0.01, 0.01)
        f = (xs[None, :] >= a[0]).astype(float) * np.ones((len(xs), 1))
        assert annulus_average(f, grid, a, 1.0, delta) == pytest.approx(0.5, abs=0.05)

    def test_out_of_window_raises(self):
        delta = 2.0 ** -6
        grid = default_grid(delta)
        f = np.ones((len(grid.nodes_1d),) * 2)
        with pytest.raises(ValueError):
            annulus_average(f, grid, (0.5, 0.5), 1.0, delta)

    def test_lp_norm_requires_p_at_least_one(self):
        grid = default_grid(2.0 ** -5)
        with pytest.raises(ValueError):
            lp_norm(np.ones((4, 4)), grid, 0.5)
        with pytest.raises(ValueError):
            radial_lp(np.ones(4), 0.01, 0.5)


class TestMaximalFunction:
    def test_constant_one(self):
        delta = 2.0 ** -6
        grid = default_grid(delta)
        f = np.ones((len(grid.nodes_1d),) * 2)
        out = maximal_function(f, delta, grid)
        assert np.allclose(out["value"], 1.0)
        assert np.all(out["upper"] >= out["value"])

    def test_single_annulus_peak(self):
        delta = 2.0 ** -6
        grid = default_grid(delta)
        r0 = radius_grid(delta)[0]
        # center on the delta/2 scan lattice so the sup is attained there
        a = (delta, delta / 2)
        f = annulus_mask((a[0], a[1], r0), delta, grid).astype(float)
        out = maximal_function(f, delta, grid)
        k = int(np.argmin(np.abs(out["radii"] - r0)))
        assert out["value"][k] >= 0.999  # up to boundary-cell roundoff
        assert np.all(out["value"] <= 1.0 + 1e-12)


class TestWeightedFamily:
    def make_family(self, delta=2.0 ** -8, seed=0):
        rng = np.random.default_rng(seed)
        radii = radius_grid(delta)
        centers = rng.uniform(0.0, 0.02, size=(len(radii), 2))
        weights = rng.uniform(0.0, 2.0, size=len(radii))
        return WeightedFamily(delta, centers, weights)

    def test_validation(self):
        delta = 2.0 ** -8
        n = len(radius_grid(delta))
        with pytest.raises(ValueError):
            WeightedFamily(delta, np.zeros((n - 1, 2)), np.ones(n - 1))
        with pytest.raises(ValueError):
            WeightedFamily(delta, np.zeros((n, 2)), -np.ones(n))
        bad_centers = np.full((n, 2), 0.05)
        with pytest.raises(ValueError):
            WeightedFamily(delta, bad_centers, np.ones(n))

    def test_weighted_field_mass(self):
        family = self.make_family()
        g, grid = weighted_field(family, normalized=True)
        # area-normalized indicators integrate to delta each
        total = float(g.sum()) * grid.cell_area
        assert total == pytest.approx(family.delta * family.weights.sum(), rel=1e-9)

    def test_duality_chain(self):
        family = self.make_family()
        config = generate_config("wolff_radii", family.delta, 6, seed=5)
        grid = default_grid(family.delta)
        f, _ = multiplicity_field(config, grid=grid)
        out = wolff_duality_check(f.astype(float), family, grid)
        assert out["ok"], out
        assert out["rhs"] <= out["rhs_upper"] * (1 + 1e-12)


class TestWolffExample:
    def test_frozen_wolff_ratios(self):
        c5 = generate_config("wolff_radii", 2.0 ** -5, 16, seed=0,
                             radius_band=MAXIMAL_RADII)
        out = wolff_example_check(c5)
        assert out["l32_norm"] == pytest.approx(3.70115096493, rel=1e-9)
        assert out["l32_dyadic"] == pytest.approx(3.30167157509, rel=1e-9)
        assert out["ratio"] == pytest.approx(5.87521093522, rel=1e-9)
        assert out["ratio_dyadic"] == pytest.approx(5.24107693156, rel=1e-9)

        c6 = generate_config("wolff_radii", 2.0 ** -6, 32, seed=0,
                             radius_band=MAXIMAL_RADII)
        assert wolff_example_check(c6)["ratio"] == pytest.approx(6.00174172095, rel=1e-9)
        c6b = generate_config("wolff_radii", 2.0 ** -6, 32, seed=1,
                              radius_band=MAXIMAL_RADII)
        assert wolff_example_check(c6b)["ratio"] == pytest.approx(6.11809914632, rel=1e-9)

    def test_frozen_frostman_ratio(self):
        config = generate_config("random_frostman", 2.0 ** -5, 16, seed=0,
                                 radius_band=MAXIMAL_RADII)
        out = wolff_example_check(config)
        assert out["ratio"] == pytest.approx(5.78482088188, rel=1e-9)
        assert out["ratio_dyadic"] == pytest.approx(5.10324501215, rel=1e-9)

    def test_dyadic_brackets_cell_sum(self):
        for seed in range(3):
            config = generate_config("wolff_radii", 2.0 ** -6, 32, seed=seed,
                                     radius_band=MAXIMAL_RADII)
            out = wolff_example_check(config)
            assert out["l32_dyadic"] <= out["l32_norm"] * (1 + 1e-12)
            assert out["l32_norm"] <= 2.0 * out["l32_dyadic"] * (1 + 1e-12)

    def test_single_circle_ratio(self):
        config = CircleConfig(np.array([[0.0, 0.0, 1.0]]), delta=2.0 ** -6)
        out = wolff_example_check(config)
        assert out["ratio"] == pytest.approx((4 * math.pi) ** (2.0 / 3.0), rel=0.15)

    def test_concentric_disjoint_annuli(self):
        # one radius per 2*delta: annuli pairwise disjoint, multiplicity <= 1
        delta = 2.0 ** -6
        radii = 0.5 + 4 * delta * np.arange(8)
        circles = np.column_stack([np.zeros(8), np.zeros(8), radii])
        config = CircleConfig(circles, delta=delta)
        stats = maximal_stats(config)
        assert stats["sup_multiplicity"] == 1
        assert stats["overlap_ratio"] == pytest.approx(1.0, abs=1e-12)


class TestStats:
    def test_frozen_stats_value(self):
        config = generate_config("wolff_radii", 2.0 ** -8, 128, seed=0,
                                 radius_band=MAXIMAL_RADII)
        stats = maximal_stats(config)
        assert stats["l32_ratio"] == pytest.approx(6.1721, abs=2e-3)

    def test_invariants(self):
        config = generate_config("wolff_radii", 2.0 ** -6, 32, seed=2,
                                 radius_band=MAXIMAL_RADII)
        stats = maximal_stats(config)
        assert stats["support_area"] <= stats["total_area"] + 1e-12
        assert stats["overlap_ratio"] >= 1.0
        assert stats["sup_multiplicity"] >= 1
        assert stats["l2_mass"] >= stats["total_area"]

    def test_grid_refinement_stability(self):
        config = generate_config("wolff_radii", 2.0 ** -5, 16, seed=0,
                                 radius_band=MAXIMAL_RADII)
        coarse = maximal_stats(config)
        fine = maximal_stats(config, grid=RasterGrid(h=config.delta / 8, window=1.1))
        assert fine["l32_ratio"] == pytest.approx(coarse["l32_ratio"], rel=0.05)


class TestGridIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        values = rng.normal(size=(17, 23))
        grid = RasterGrid(h=0.25, window=2.0)
        path = tmp_path / "field.f64"
        save_grid(path, values, grid)
        back, back_grid = load_grid(path)
        assert np.array_equal(back, values)
        assert back_grid.h == grid.h
        assert back_grid.window == grid.window
