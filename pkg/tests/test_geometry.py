import numpy as np
import pytest

from hopflab import (Disk, Grid, LogPowerModulus, Mask, Polygon, PowerModulus,
                     Reflected, TableModulus, build_dini_cap, dini_report,
                     make_annulus, make_ring, make_rings, rasterize)
from hopflab.geometry import convexity_midpoint_check
from hopflab.gridio import read_grid_file, write_grid_file
from hopflab.errors import (BadRadii, ContainmentViolated, GapTooSmall,
                            TableTooCoarse)


# --- Dini moduli ------------------------------------------------------------

def test_dini_power_half_integral():
    rep = dini_report(PowerModulus(0.5), 1.0)
    assert rep.converges
    assert rep.integral == pytest.approx(2.0, abs=1e-6)


def test_dini_log_divergent():
    rep = dini_report(LogPowerModulus(1.0), 0.5)
    assert not rep.converges
    assert not rep.convex_dini


@pytest.mark.parametrize("q,expect", [(0.5, False), (1.0, False),
                                      (1.5, True), (2.0, True)])
def test_dini_dichotomy(q, expect):
    assert dini_report(LogPowerModulus(q), 0.5).converges is expect


@pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.8, 1.0])
def test_power_families_convex_dini(a):
    rep = dini_report(PowerModulus(a), 1.0)
    assert rep.converges and rep.convex_dini


def test_table_modulus_fine_enough():
    ts = np.geomspace(1e-12, 1.0, 400)
    rep = dini_report(TableModulus(ts, ts ** 0.5), 1.0)
    assert rep.converges
    assert rep.integral == pytest.approx(2.0, rel=1e-3)


def test_table_modulus_too_coarse():
    ts = np.geomspace(1e-2, 1.0, 40)
    with pytest.raises(TableTooCoarse):
        dini_report(TableModulus(ts, ts ** 0.5), 1.0)


# --- cap construction -------------------------------------------------------

def test_cap_contains_three_quarter_ball():
    cap = build_dini_cap(0.25, PowerModulus(0.5))
    poly = cap.boundary(4096)
    d = np.hypot(poly[:, 0], poly[:, 1] - 0.25).min()
    assert d > 0.75 * 0.25
    # origin sits on the boundary up to the fillet width
    assert abs(float(cap.level(np.array([0.0, 0.0])))) < 2 * cap.smoothing


def test_cap_containment_violated_for_flat_modulus():
    # a slowly decaying modulus cuts deep into the ball
    with pytest.raises(ContainmentViolated):
        build_dini_cap(0.9, PowerModulus(0.05, t_cap=1.0))


def test_cap_convex_parabolic_cut():
    # eps(t) = t gives the cut y > 2 x^2; intersection with the disk is convex
    cap = build_dini_cap(0.2, PowerModulus(1.0))
    grid = Grid.square(0.25, 129, center=(0.0, 0.2))
    mask, _ = rasterize(cap, grid)
    assert convexity_midpoint_check(mask, grid, rng=np.random.default_rng(3))


def test_cap_normal_at_origin():
    cap = build_dini_cap(0.25, PowerModulus(0.5))
    h = 0.25 / 128
    sd = cap.signed_distance(np.array([[0.0, 2 * h], [h, 2 * h], [-h, 2 * h],
                                       [0.0, 3 * h]]), smoothing=h)
    gx = (sd[1] - sd[2]) / (2 * h)
    gy = (sd[3] - sd[0]) / h
    outward = np.array([gx, gy]) / np.hypot(gx, gy)   # sd grows outward
    angle = np.degrees(np.arccos(np.clip(-outward[1], -1, 1)))
    assert angle < 5.0


def test_cap_convexity_midpoints():
    cap = build_dini_cap(0.25, PowerModulus(0.5))
    grid = Grid.square(0.3, 257, center=(0.0, 0.25))
    mask, _ = rasterize(cap, grid)
    assert convexity_midpoint_check(mask, grid, rng=np.random.default_rng(7))


# --- rings ------------------------------------------------------------------

def test_make_rings_valid():
    cap = build_dini_cap(0.25, PowerModulus(0.5))
    rings = make_rings(cap, 0.25, resolution=257)
    for ring in (rings.inner_ring, rings.outer_ring):
        assert ring.gap >= 2 * ring.grid.h
        assert ring.interior().any()
        assert np.all(ring.ghosts.theta >= 0.15)


def test_make_rings_degenerate_grid():
    cap = build_dini_cap(0.25, PowerModulus(0.5))
    with pytest.raises(GapTooSmall):
        make_rings(cap, 0.25, resolution=9)


def test_reflected_cap_touches_origin():
    cap = build_dini_cap(0.25, PowerModulus(0.5))
    neg = Reflected(cap)
    sd = float(neg.signed_distance(np.array([0.0, 0.0]), smoothing=cap.smoothing))
    assert abs(sd) < 2 * cap.smoothing
    (x0, x1), (y0, y1) = neg.bbox()
    assert y1 <= 1e-12   # sits below the origin


def test_annulus_bad_radii():
    with pytest.raises(BadRadii):
        make_annulus(2.0, 1.0)


def test_annulus_gap_too_small():
    with pytest.raises(GapTooSmall):
        make_annulus(1.0, 1.01, resolution=33)


def test_annulus_masks_nested(annulus129):
    ring = annulus129
    inner_nodes = ring.mask == Mask.INNER_BOUNDARY
    outer_nodes = ring.mask == Mask.OUTER_BOUNDARY
    assert inner_nodes.any() and outer_nodes.any()
    pts = ring.grid.points()
    r = np.hypot(pts[..., 0], pts[..., 1])
    assert np.all(r[inner_nodes] < 1.5)
    assert np.all(r[outer_nodes] > 1.5)


# --- rasterize --------------------------------------------------------------

def test_rasterize_disk_area():
    grid = Grid.square(2.0, 129)
    mask, sd = rasterize(Disk((0.0, 0.0), 1.0), grid)
    area = mask.sum() * grid.h ** 2
    assert area == pytest.approx(np.pi, rel=0.02)


def test_rasterize_disk_center_distance():
    grid = Grid.square(2.0, 65)
    _, sd = rasterize(Disk((0.0, 0.0), 1.0), grid)
    j = i = 32
    assert sd[j, i] == pytest.approx(-1.0, abs=1e-12)


def test_rasterize_grid_too_small():
    from hopflab.errors import GridTooSmall
    grid = Grid.square(0.5, 33)
    with pytest.raises(GridTooSmall):
        rasterize(Disk((0.0, 0.0), 1.0), grid)


def test_rasterize_polygon():
    dx, dy = 0.011, 0.007   # avoid grid-aligned edges
    square = Polygon([(-1 + dx, -1 + dy), (1 + dx, -1 + dy),
                      (1 + dx, 1 + dy), (-1 + dx, 1 + dy)])
    grid = Grid.square(2.0, 129)
    mask, sd = rasterize(square, grid)
    assert mask.sum() * grid.h ** 2 == pytest.approx(4.0, rel=0.02)
    assert convexity_midpoint_check(mask, grid, rng=np.random.default_rng(11))


def test_polygon_rejects_nonconvex():
    with pytest.raises(Exception):
        Polygon([(0, 0), (2, 0), (1, 0.2), (2, 2), (0, 2)])


# --- grid file round trip ---------------------------------------------------

def test_grid_file_roundtrip(tmp_path):
    grid = Grid(-1.0, -0.5, 17, 9, 0.125)
    rng = np.random.default_rng(5)
    values = rng.standard_normal((9, 17))
    mask = rng.integers(0, 4, size=(9, 17)).astype(np.uint8)
    path = tmp_path / "field.grid"
    write_grid_file(path, grid, values, mask)
    g2, v2, m2 = read_grid_file(path)
    assert g2 == grid
    assert np.array_equal(v2, values)
    assert np.array_equal(m2, mask)
