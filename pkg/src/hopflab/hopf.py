"""Boundary growth verification: Hopf constants, the comparison principle,
the outer-ring Lipschitz bound, and the Orlicz Hoelder inequality."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NotNormalized, OutOfRange, PreconditionFail
from .geometry import ConvexRing, Mask, make_annulus
from .orlicz import OrliczFunction, conjugate, orlicz_norm
from .solver import ScalarField, operator_residual, solve_harmonic


@dataclass
class HopfReport:
    boundary_point: tuple
    radii: list
    ratios: list
    c_estimate: float
    passed: bool
    skipped: list = field(default_factory=list)
    u0: float = 0.0

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"hopf point {self.boundary_point[0]!r} {self.boundary_point[1]!r}\n")
        out.write(f"u0 {self.u0!r}\n")
        for r, q in zip(self.radii, self.ratios):
            out.write(f"radius {r!r} ratio {q!r}\n")
        for r in self.skipped:
            out.write(f"skipped_radius {r!r} (below three cells)\n")
        out.write(f"c_estimate {self.c_estimate!r}\n")
        out.write(f"pass {self.passed}\n")
        return out.getvalue()

    def table_rows(self):
        return list(zip(self.radii, self.ratios))


def hopf_constant(u: ScalarField, x0, radii, n_angles: int = 720) -> HopfReport:
    """Growth ratios (max_{B_r cap D} u - u(x0)) / r over shrinking radii.

    The ball max combines interior node values with sub-cell samples of the
    ball rim (bilinear); radii under three cells are skipped and flagged.
    """
    x0 = np.asarray(x0, dtype=float)
    u0 = np.nan
    if u.ring is not None:
        # a point on a ring boundary takes the Dirichlet data exactly
        for dom, key in ((u.ring.inner, "inner_value"),
                         (u.ring.outer, "outer_value")):
            lev = abs(float(dom.level(x0, smoothing=u.grid.h)))
            if lev <= u.grid.h and key in u.meta:
                u0 = float(u.meta[key])
                break
    if not np.isfinite(u0):
        u0 = float(u.interp(x0))
    if not np.isfinite(u0):
        u0 = _partial_corner_value(u, x0)
    if not np.isfinite(u0):
        raise PreconditionFail(f"x0 = {x0!r} is outside the sampled field")
    interior = u.interior_mask()
    vmin = float(u.values[interior].min())
    span = float(u.values[interior].max()) - vmin
    if vmin < u0 - max(1e-8, 1e-3 * span):
        raise PreconditionFail("field drops below its boundary-point value")

    radii = sorted({float(r) for r in radii}, reverse=True)
    h = u.grid.h
    pts = u.grid.points()
    dist = np.hypot(pts[..., 0] - x0[0], pts[..., 1] - x0[1])
    angles = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    used, ratios, skipped = [], [], []
    for r in radii:
        if r < 3 * h:
            skipped.append(r)
            continue
        sel = interior & (dist <= r)
        best = float(u.values[sel].max()) if sel.any() else -np.inf
        rim = u.interp(x0 + r * dirs)
        rim = rim[np.isfinite(rim)]
        if rim.size:
            best = max(best, float(rim.max()))
        if not np.isfinite(best):
            skipped.append(r)
            continue
        used.append(r)
        ratios.append((best - u0) / r)

    c_est = float(min(ratios)) if ratios else 0.0
    scale = max(float(np.max(np.abs(u.values[interior]))), 1e-300)
    positive = bool(used) and c_est * min(used) > 1e-10 * scale
    passed = positive and ratios[-1] >= 0.5 * ratios[0]
    return HopfReport(tuple(x0), used, ratios, c_est, passed, skipped, u0)


def _partial_corner_value(u: ScalarField, x) -> float:
    """Bilinear value from whichever stencil corners carry values (boundary
    points on coarse grids can sit in cells with a missing outside corner)."""
    g = u.grid
    i0 = int(np.clip(np.floor((x[0] - g.x0) / g.h), 0, g.nx - 2))
    j0 = int(np.clip(np.floor((x[1] - g.y0) / g.h), 0, g.ny - 2))
    tx = (x[0] - g.x0) / g.h - i0
    ty = (x[1] - g.y0) / g.h - j0
    corners = [(j0, i0, (1 - tx) * (1 - ty)), (j0, i0 + 1, tx * (1 - ty)),
               (j0 + 1, i0, (1 - tx) * ty), (j0 + 1, i0 + 1, tx * ty)]
    valid = u.valid_mask()
    num = den = 0.0
    for j, i, wgt in corners:
        if valid[j, i]:
            num += wgt * u.values[j, i]
            den += wgt
    return num / den if den > 1e-12 else np.nan


# --------------------------------------------------------------------------
# comparison principle
# --------------------------------------------------------------------------

@lru_cache(maxsize=8)
def discretization_benchmark(resolution: int) -> float:
    """Max error of the harmonic annulus(1, 2) benchmark at this resolution."""
    ring = make_annulus(1.0, 2.0, resolution=resolution)
    w = solve_harmonic(ring)
    pts = ring.grid.points()
    r = np.hypot(pts[..., 0], pts[..., 1])
    exact = np.log(2.0 / np.maximum(r, 1e-12)) / np.log(2.0)
    return float(np.max(np.abs(w.values - exact)[w.interior_mask()]))


@dataclass
class ComparisonReport:
    passed: bool
    max_violation: float
    tol_cmp: float
    location: tuple | None
    sub_residual_ok: bool
    sol_residual_ok: bool
    worst_sub_residual: float
    worst_sol_residual: float

    def to_text(self) -> str:
        return (f"comparison pass {self.passed}\n"
                f"max_violation {self.max_violation!r}\n"
                f"tol_cmp {self.tol_cmp!r}\n"
                f"subsolution_residual_ok {self.sub_residual_ok} "
                f"worst {self.worst_sub_residual!r}\n"
                f"solution_residual_ok {self.sol_residual_ok} "
                f"worst {self.worst_sol_residual!r}\n")


def comparison_check(u: ScalarField, v: ScalarField, of: OrliczFunction,
                     tol_cmp: float | None = None,
                     tol_res: float | None = None) -> ComparisonReport:
    """v <= u inside, given v <= u on the boundary, v a discrete sub-solution
    and u a discrete solution.

    Boundary ordering violations raise PreconditionFail (an input error);
    residual shortfalls are recorded on the report.
    """
    if u.grid is not v.grid and (u.grid != v.grid):
        raise PreconditionFail("fields live on different grids")
    vi = v.meta.get("inner_value", None)
    ui = u.meta.get("inner_value", None)
    vo = v.meta.get("outer_value", None)
    uo = u.meta.get("outer_value", None)
    if vi is None or ui is None or vo is None or uo is None:
        raise PreconditionFail("fields carry no boundary data")
    if vi > ui + 1e-12 or vo > uo + 1e-12:
        raise PreconditionFail(
            f"boundary ordering violated: inner {vi!r} vs {ui!r}, "
            f"outer {vo!r} vs {uo!r}")

    ring = u.ring or v.ring
    depth = ring.interior_depth()
    trusted = (u.mask == Mask.INTERIOR) & (depth >= 2)

    if tol_res is None:
        scale = _flux_scale(u, of, trusted)
        tol_res = 1e-3 * scale
    res_v = operator_residual(v, of).values[trusted]
    res_u = operator_residual(u, of).values[trusted]
    worst_sub = float(res_v.min())
    worst_sol = float(np.max(np.abs(res_u)))
    sub_ok = worst_sub >= -tol_res
    sol_ok = worst_sol <= tol_res

    if tol_cmp is None:
        tol_cmp = 2.0 * discretization_benchmark(max(u.grid.nx, u.grid.ny))
    interior = u.interior_mask()
    diff = v.values - u.values
    diff[~interior] = -np.inf
    k = int(np.argmax(diff))
    max_viol = float(diff.ravel()[k])
    loc = tuple(int(x) for x in np.unravel_index(k, diff.shape))
    passed = sub_ok and sol_ok and max_viol <= tol_cmp
    return ComparisonReport(passed, max_viol, tol_cmp, loc, sub_ok, sol_ok,
                            worst_sub, worst_sol)


def _supersolution_comparison(u: ScalarField, vbar: ScalarField,
                              of: OrliczFunction,
                              tol_cmp: float | None = None) -> ComparisonReport:
    """u <= vbar for a solution u under a super-solution vbar."""
    ui, uo = u.meta["inner_value"], u.meta["outer_value"]
    bi, bo = vbar.meta["inner_value"], vbar.meta["outer_value"]
    if ui > bi + 1e-12 or uo > bo + 1e-12:
        raise PreconditionFail("boundary ordering violated for the upper barrier")
    ring = u.ring or vbar.ring
    depth = ring.interior_depth()
    trusted = (u.mask == Mask.INTERIOR) & (depth >= 2)
    tol_res = 1e-3 * _flux_scale(u, of, trusted)
    worst_super = float(operator_residual(vbar, of).values[trusted].max())
    worst_sol = float(np.max(np.abs(operator_residual(u, of).values[trusted])))
    if tol_cmp is None:
        tol_cmp = 2.0 * discretization_benchmark(max(u.grid.nx, u.grid.ny))
    interior = u.interior_mask()
    diff = u.values - vbar.values
    diff[~interior] = -np.inf
    k = int(np.argmax(diff))
    max_viol = float(diff.ravel()[k])
    loc = tuple(int(x) for x in np.unravel_index(k, diff.shape))
    super_ok = worst_super <= tol_res
    sol_ok = worst_sol <= tol_res
    passed = super_ok and sol_ok and max_viol <= tol_cmp
    return ComparisonReport(passed, max_viol, tol_cmp, loc, super_ok, sol_ok,
                            worst_super, worst_sol)


def _flux_scale(u: ScalarField, of: OrliczFunction, cells) -> float:
    gx = np.gradient(u.values, u.grid.h, axis=1)
    gy = np.gradient(u.values, u.grid.h, axis=0)
    gn = np.hypot(gx, gy)[cells]
    ring = u.ring
    gap = ring.gap if ring is not None else 1.0
    return float(np.median(np.asarray(of.h(np.minimum(gn, of.t_max)), dtype=float))) \
        / max(gap, 1e-12)


# --------------------------------------------------------------------------
# outer-ring Lipschitz bound
# --------------------------------------------------------------------------

@dataclass
class LipschitzReport:
    C: float
    M: float
    passed: bool
    comparison: ComparisonReport | None
    n_cells: int

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"lipschitz C {self.C!r}\n")
        out.write(f"reference_max M {self.M!r}\n")
        out.write(f"pass {self.passed}\n")
        if self.comparison is not None:
            out.write(self.comparison.to_text())
        return out.getvalue()


def outer_lipschitz_check(u: ScalarField, ring: ConvexRing, of: OrliczFunction,
                          y=(0.0, 0.0), r_ref: float | None = None,
                          barrier_profile=None) -> LipschitzReport:
    """Bound u <= C * M * dist(x, K1) near the boundary point y.

    u must vanish on the ring's inner boundary (the obstacle K1) near y. The
    super-solution f(1) - f(w) built from the ring's harmonic potential is
    compared against u, then the constant C is measured directly on cells in
    the reference ball.
    """
    if abs(u.meta.get("inner_value", 0.0)) > 1e-12:
        raise PreconditionFail("u must vanish on the inner boundary")
    if float(u.interior_values().min()) < -1e-10:
        raise PreconditionFail("u must be nonnegative")
    y = np.asarray(y, dtype=float)
    if r_ref is None:
        r_ref = ring.gap

    pts = ring.grid.points()
    dist_y = np.hypot(pts[..., 0] - y[0], pts[..., 1] - y[1])
    near = u.interior_mask() & (dist_y <= r_ref)
    if not near.any():
        raise OutOfRange("reference ball contains no interior cells")
    M = float(u.values[near].max())
    if M <= 0.0:
        return LipschitzReport(0.0, 0.0, True, None, int(near.sum()))

    comparison = None
    if barrier_profile is not None:
        from .barrier import compose_barrier
        w = solve_harmonic(ring)
        fw = compose_barrier(w, barrier_profile)
        vbar = fw.copy_with(barrier_profile.f1 - fw.values, meta={
            "inner_value": barrier_profile.f1 - fw.meta["inner_value"],
            "outer_value": barrier_profile.f1 - fw.meta["outer_value"],
            "delta_final": w.meta.get("delta_final", 1e-6)})
        comparison = _supersolution_comparison(u, vbar, of)

    dist_k = np.maximum(ring.sdf("inner"), 0.0)
    sel = near & (dist_k > 0.5 * ring.grid.h)
    C = float(np.max(u.values[sel] / (M * dist_k[sel]))) if sel.any() else np.inf
    passed = np.isfinite(C) and (comparison is None or comparison.passed)
    return LipschitzReport(C, M, passed, comparison, int(sel.sum()))


# --------------------------------------------------------------------------
# Hoelder inequality in Orlicz norms
# --------------------------------------------------------------------------

@dataclass
class HoelderReport:
    lhs: float
    norm_u: float
    norm_v: float
    passed: bool

    def to_text(self) -> str:
        return (f"hoelder lhs {self.lhs!r}\n"
                f"norm_u {self.norm_u!r}\nnorm_v {self.norm_v!r}\n"
                f"pass {self.passed}\n")


def orlicz_holder_check(u: ScalarField, v: ScalarField,
                        of: OrliczFunction) -> HoelderReport:
    """integral |u v| <= ||u||_F ||v||_F*  (requires the normalization h(1)=1)."""
    h1 = float(of.h(np.array([1.0]))[0])
    if abs(h1 - 1.0) > 1e-8:
        raise NotNormalized(f"h(1) = {h1!r}; normalize the flow law first")
    joint = u.interior_mask() & v.interior_mask()
    if not joint.any():
        raise OutOfRange("no joint mask")
    dA = u.grid.h ** 2
    lhs = float(np.sum(np.abs(u.values[joint] * v.values[joint]))) * dA
    nu = orlicz_norm(np.abs(u.values[joint]), of, cell_area=dA)
    nv = orlicz_norm(np.abs(v.values[joint]), conjugate(of), cell_area=dA)
    rhs = nu * nv
    return HoelderReport(lhs, nu, nv, lhs <= rhs * (1 + 1e-6) + 1e-300)
