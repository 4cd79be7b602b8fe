"""Dini moduli, convex 2-D domains, the boundary cap, and rasterized convex rings.

Everything is two dimensional: points are (x, y) with y playing the role of
the distinguished coordinate of the cap construction. Domains expose an
analytic inside test plus an accurate signed distance through a sampled
boundary polyline; rings carry node masks and the ghost-layer geometry the
solver needs for curved Dirichlet boundaries.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .errors import (BadRadii, ContainmentViolated, GapTooSmall, GridTooSmall,
                     OutOfRange, TableTooCoarse)
from .quadrature import EndpointIntegral, integral_to_zero


class Mask(IntEnum):
    OUTSIDE = 0
    INTERIOR = 1
    INNER_BOUNDARY = 2
    OUTER_BOUNDARY = 3


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform node grid; node (i, j) sits at (x0 + i*h, y0 + j*h)."""
    x0: float
    y0: float
    nx: int
    ny: int
    h: float

    @classmethod
    def square(cls, half_extent: float, n: int, center=(0.0, 0.0)) -> "Grid":
        h = 2.0 * half_extent / (n - 1)
        return cls(center[0] - half_extent, center[1] - half_extent, n, n, h)

    @classmethod
    def from_box(cls, x_lo, x_hi, y_lo, y_hi, n: int) -> "Grid":
        span = max(x_hi - x_lo, y_hi - y_lo)
        h = span / (n - 1)
        nx = int(round((x_hi - x_lo) / h)) + 1
        ny = int(round((y_hi - y_lo) / h)) + 1
        return cls(x_lo, y_lo, nx, ny, h)

    def xs(self):
        return self.x0 + self.h * np.arange(self.nx)

    def ys(self):
        return self.y0 + self.h * np.arange(self.ny)

    def points(self):
        """All node coordinates, shape (ny, nx, 2)."""
        return _grid_points(self)

    def descriptor(self) -> str:
        return (f"grid nx {self.nx} ny {self.ny} origin {self.x0!r} {self.y0!r} "
                f"spacing {self.h!r}")


@lru_cache(maxsize=32)
def _grid_points(grid: Grid):
    X, Y = np.meshgrid(grid.xs(), grid.ys(), indexing="xy")
    return np.stack([X, Y], axis=-1)


# --------------------------------------------------------------------------
# Dini moduli
# --------------------------------------------------------------------------

class DiniModulus:
    """A modulus eps(t), decreasing to 0 as t -> 0, defined on (0, t_cap]."""

    kind = "custom"

    def __init__(self, t_cap: float):
        self.t_cap = float(t_cap)

    def eval(self, t):
        raise NotImplementedError

    def descriptor(self) -> str:
        raise NotImplementedError


class PowerModulus(DiniModulus):
    """eps(t) = t^a with a in (0, 1]; the C^{1,alpha} scale."""

    kind = "power"

    def __init__(self, a: float, t_cap: float = 1.0):
        if not (0 < a <= 1):
            raise OutOfRange("power modulus needs a in (0, 1]")
        super().__init__(t_cap)
        self.a = float(a)

    def eval(self, t):
        return np.asarray(t, dtype=float) ** self.a

    def descriptor(self):
        return f"modulus power a {self.a!r} t_cap {self.t_cap!r}"


class LogPowerModulus(DiniModulus):
    """eps(t) = (log(1/t))^-q; Dini exactly when q > 1."""

    kind = "logpower"

    def __init__(self, q: float, t_cap: float = 0.5):
        if q <= 0:
            raise OutOfRange("log-power modulus needs q > 0")
        if t_cap >= 1.0:
            raise OutOfRange("log-power modulus needs t_cap < 1")
        super().__init__(t_cap)
        self.q = float(q)

    def eval(self, t):
        t = np.minimum(np.asarray(t, dtype=float), self.t_cap)
        return (-np.log(t)) ** (-self.q)

    def descriptor(self):
        return f"modulus logpower q {self.q!r} t_cap {self.t_cap!r}"


class TableModulus(DiniModulus):
    """Sampled modulus with monotone linear interpolation."""

    kind = "table"

    def __init__(self, ts, vals):
        ts = np.asarray(ts, dtype=float)
        vals = np.asarray(vals, dtype=float)
        if np.any(np.diff(ts) <= 0) or ts[0] <= 0:
            raise OutOfRange("table abscissae must be positive and increasing")
        if np.any(np.diff(vals) < 0):
            raise OutOfRange("modulus table must be non-decreasing in t")
        super().__init__(float(ts[-1]))
        self.ts = ts
        self.vals = vals
        self.t_floor = float(ts[0])

    def eval(self, t):
        return np.interp(np.asarray(t, dtype=float), self.ts, self.vals)

    def descriptor(self):
        return f"modulus table n {len(self.ts)} t_cap {self.t_cap!r}"


@dataclass(frozen=True)
class DiniReport:
    integral: float
    converges: bool
    convex_dini: bool
    t1: float
    detail: EndpointIntegral

    def to_text(self) -> str:
        return (f"dini integral {self.integral!r}\n"
                f"converges {self.converges}\n"
                f"convex_dini {self.convex_dini}\n"
                f"t1 {self.t1!r}\n"
                f"classification {self.detail.classification}\n")


def dini_report(eps: DiniModulus, t1: float) -> DiniReport:
    """Integral of eps(t)/t over (0, t1] plus the convexity certificate.

    convex_dini certifies the full definition: the modulus is Dini *and*
    t*eps(t) has nonnegative second differences on a log-spaced grid.
    """
    if not (0 < t1 <= eps.t_cap * (1 + 1e-12)):
        raise OutOfRange("need 0 < t1 <= t_cap")
    floor = getattr(eps, "t_floor", 0.0)
    detail = integral_to_zero(lambda t: eps.eval(t) / t, t1, t_floor=floor)
    if detail.classification == "floored":
        # a stable geometric tail extrapolates reliably past the table end;
        # anything else leaves material unresolved mass
        bad = (not detail.converges or not np.isfinite(detail.tail)
               or detail.tail > 0.05 * max(abs(detail.partial), 1e-300))
        if bad:
            raise TableTooCoarse("modulus table does not resolve the integrand near 0")

    ts = np.geomspace(max(floor, eps.t_cap * 1e-8), eps.t_cap, 200)
    y = ts * eps.eval(ts)
    slopes = np.diff(y) / np.diff(ts)
    convex = bool(np.all(np.diff(slopes) >= -1e-10 * max(1.0, float(np.max(np.abs(slopes))))))
    return DiniReport(detail.value, detail.converges, convex and detail.converges,
                      t1, detail)


# --------------------------------------------------------------------------
# convex domains
# --------------------------------------------------------------------------

def _smooth_max(a, b, s: float):
    """Smooth, convexity-preserving max with transition width s."""
    if s <= 0.0:
        return np.maximum(a, b)
    return 0.5 * (a + b + np.sqrt((a - b) ** 2 + s * s))


class ConvexDomain:
    """Convex region given by a convex level function G (negative inside)."""

    descriptor_kind = "domain"

    def level(self, pts, smoothing: float = 0.0):
        """Convex function, negative inside; not a distance in general."""
        raise NotImplementedError

    def inside(self, pts, smoothing: float = 0.0):
        return self.level(pts, smoothing) < 0.0

    def anchor(self):
        """A point strictly inside."""
        raise NotImplementedError

    def bbox(self):
        raise NotImplementedError

    def boundary(self, n: int = 2048, smoothing: float = 0.0):
        """Boundary polyline by radial bisection from the anchor."""
        cx, cy = self.anchor()
        angles = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        (x0, x1), (y0, y1) = self.bbox()
        r_hi = 2.0 * max(x1 - x0, y1 - y0) + 1.0
        lo = np.zeros(n)
        hi = np.full(n, r_hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            pts = np.array([cx, cy]) + mid[:, None] * dirs
            out = self.level(pts, smoothing) >= 0.0
            hi = np.where(out, mid, hi)
            lo = np.where(out, lo, mid)
        r = 0.5 * (lo + hi)
        return np.array([cx, cy]) + r[:, None] * dirs

    def signed_distance(self, pts, smoothing: float = 0.0, n_boundary: int = 4096):
        """Accurate signed distance via the sampled boundary polyline."""
        poly = self.boundary(n_boundary, smoothing)
        d = _distance_to_polyline(np.asarray(pts, dtype=float), poly)
        sign = np.where(self.inside(pts, smoothing), -1.0, 1.0)
        return sign * d

    def descriptor(self) -> str:
        raise NotImplementedError


def _distance_to_polyline(pts, poly):
    """Min distance from points (..., 2) to the closed polyline poly (m, 2)."""
    shape = pts.shape[:-1]
    p = pts.reshape(-1, 2)
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    ab2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    out = np.full(p.shape[0], np.inf)
    chunk = max(1, int(4e6) // len(a))
    for s in range(0, p.shape[0], chunk):
        q = p[s:s + chunk]
        ap = q[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("kij,ij->ki", ap, ab) / ab2, 0.0, 1.0)
        d2 = np.sum((ap - t[..., None] * ab[None, :, :]) ** 2, axis=-1)
        out[s:s + chunk] = np.sqrt(d2.min(axis=1))
    return out.reshape(shape)


class Disk(ConvexDomain):
    descriptor_kind = "disk"

    def __init__(self, center, radius: float):
        if radius <= 0:
            raise BadRadii("disk radius must be positive")
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)

    def level(self, pts, smoothing: float = 0.0):
        p = np.asarray(pts, dtype=float)
        return np.hypot(p[..., 0] - self.center[0], p[..., 1] - self.center[1]) - self.radius

    def signed_distance(self, pts, smoothing: float = 0.0, n_boundary: int = 0):
        return self.level(pts)

    def anchor(self):
        return self.center

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cx + r), (cy - r, cy + r)

    def boundary(self, n: int = 2048, smoothing: float = 0.0):
        ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return np.stack([self.center[0] + self.radius * np.cos(ang),
                         self.center[1] + self.radius * np.sin(ang)], axis=-1)

    def descriptor(self):
        return (f"domain disk center {self.center[0]!r} {self.center[1]!r} "
                f"radius {self.radius!r}")


class Polygon(ConvexDomain):
    """Convex polygon with counterclockwise vertices."""

    descriptor_kind = "polygon"

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if len(v) < 3:
            raise OutOfRange("polygon needs at least 3 vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross < -1e-12 * np.max(np.abs(v))):
            raise OutOfRange("vertices must describe a convex ccw polygon")
        self.vertices = v
        # outward half-plane normals
        self._normals = np.stack([e[:, 1], -e[:, 0]], axis=-1)
        self._normals /= np.linalg.norm(self._normals, axis=1, keepdims=True)

    def level(self, pts, smoothing: float = 0.0):
        # max over edge half-plane distances; exact for convex polygons
        p = np.asarray(pts, dtype=float)
        d = np.einsum("...k,ik->...i", p, self._normals) - \
            np.einsum("ik,ik->i", self.vertices, self._normals)
        return np.max(d, axis=-1)

    def signed_distance(self, pts, smoothing: float = 0.0, n_boundary: int = 0):
        p = np.asarray(pts, dtype=float)
        lev = self.level(p)
        d_out = _distance_to_polyline(p, self.vertices)
        return np.where(lev < 0, lev, d_out)

    def anchor(self):
        c = self.vertices.mean(axis=0)
        return (float(c[0]), float(c[1]))

    def bbox(self):
        v = self.vertices
        return (float(v[:, 0].min()), float(v[:, 0].max())), \
               (float(v[:, 1].min()), float(v[:, 1].max()))

    def boundary(self, n: int = 2048, smoothing: float = 0.0):
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(e, axis=1)
        per_edge = np.maximum((n * lengths / lengths.sum()).astype(int), 2)
        pts = [v[i] + np.linspace(0, 1, m, endpoint=False)[:, None] * e[i]
               for i, m in enumerate(per_edge)]
        return np.concatenate(pts, axis=0)

    def descriptor(self):
        vs = " ".join(f"{x!r} {y!r}" for x, y in self.vertices)
        return f"domain polygon n {len(self.vertices)} vertices {vs}"


class DiniCap(ConvexDomain):
    """Cap K: the disk B_rd((0, rd)) cut by y > 2|x| eps(|x|).

    The origin lies on the boundary with outward normal (0, -1); the two
    transversal corners where the cut curve meets the circle are rounded by
    a smooth max over one smoothing length (convexity is preserved because
    both level functions are convex when t*eps(t) is convex).
    """

    descriptor_kind = "dini_cap"

    def __init__(self, r_d: float, eps: DiniModulus, smoothing: float = 0.0):
        if r_d <= 0:
            raise BadRadii("cap radius must be positive")
        if r_d > eps.t_cap:
            raise OutOfRange("cap radius exceeds the modulus validity range")
        self.r_d = float(r_d)
        self.eps = eps
        self.smoothing = float(smoothing)

    def level(self, pts, smoothing: float | None = None):
        s = self.smoothing if smoothing in (None, 0.0) else smoothing
        p = np.asarray(pts, dtype=float)
        x = p[..., 0]
        y = p[..., 1]
        disk = np.hypot(x, y - self.r_d) - self.r_d
        t = np.abs(x)
        cut = 2.0 * t * self.eps.eval(np.minimum(t, self.eps.t_cap)) - y
        return _smooth_max(disk, cut, s)

    def anchor(self):
        return (0.0, self.r_d)

    def bbox(self):
        return (-self.r_d, self.r_d), (0.0, 2 * self.r_d)

    def descriptor(self):
        return (f"domain dini_cap r_d {self.r_d!r} smoothing {self.smoothing!r} "
                f"{self.eps.descriptor()}")


class Reflected(ConvexDomain):
    """Point reflection through the origin: -K."""

    descriptor_kind = "reflected"

    def __init__(self, base: ConvexDomain):
        self.base = base

    def level(self, pts, smoothing: float = 0.0):
        return self.base.level(-np.asarray(pts, dtype=float), smoothing)

    def anchor(self):
        ax, ay = self.base.anchor()
        return (-ax, -ay)

    def bbox(self):
        (x0, x1), (y0, y1) = self.base.bbox()
        return (-x1, -x0), (-y1, -y0)

    def boundary(self, n: int = 2048, smoothing: float = 0.0):
        return -self.base.boundary(n, smoothing)

    def descriptor(self):
        return f"domain reflected {self.base.descriptor()}"


def build_dini_cap(r_d: float, eps: DiniModulus, smoothing: float | None = None) -> DiniCap:
    """Construct the cap and verify the 3/4-ball containment.

    smoothing defaults to r_d/256 (about one cell at the grids used here);
    raises ContainmentViolated when r_d is too large for this modulus.
    """
    rep = dini_report(eps, min(r_d, eps.t_cap))
    if not rep.convex_dini:
        raise OutOfRange("cap construction needs a convex-Dini modulus")
    s = r_d / 256.0 if smoothing is None else smoothing
    cap = DiniCap(r_d, eps, smoothing=s)
    poly = cap.boundary(4096)
    dist = np.hypot(poly[:, 0], poly[:, 1] - r_d).min()
    if dist <= 0.75 * r_d * (1 + 1e-9):
        raise ContainmentViolated(
            f"3/4-ball clearance {dist!r} vs needed {0.75 * r_d!r}; reduce r_d")
    return cap


# --------------------------------------------------------------------------
# rings
# --------------------------------------------------------------------------

_STENCIL = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))


@dataclass
class GhostLayer:
    """Per-ghost-node closure geometry for curved Dirichlet boundaries."""
    index: np.ndarray      # flat node index of the ghost
    partner: np.ndarray    # flat node index of the paired interior node
    theta: np.ndarray      # boundary cut fraction along partner -> ghost, in (0, 1]
    side: np.ndarray       # Mask.INNER_BOUNDARY or Mask.OUTER_BOUNDARY


@dataclass
class ConvexRing:
    inner: ConvexDomain
    outer: ConvexDomain
    grid: Grid
    mask: np.ndarray
    ghosts: GhostLayer
    gap: float
    meta: dict = field(default_factory=dict)
    _sdf_cache: dict = field(default_factory=dict, repr=False)

    def interior(self):
        return self.mask == Mask.INTERIOR

    def sdf(self, which: str):
        """Signed distance field to the inner or outer domain boundary."""
        if which not in self._sdf_cache:
            dom = self.inner if which == "inner" else self.outer
            pts = self.grid.points()
            self._sdf_cache[which] = dom.signed_distance(pts, smoothing=self.grid.h)
        return self._sdf_cache[which]

    def interior_depth(self):
        """Chebyshev distance (in cells) from each interior node to the ghost layer."""
        if "depth" not in self._sdf_cache:
            interior = self.interior()
            near = ~interior
            depth = np.zeros(self.mask.shape, dtype=int)
            cur = near
            for d in range(1, 6):
                cur = _dilate8(cur)
                ring = cur & interior & (depth == 0)
                depth[ring] = d
            depth[interior & (depth == 0)] = 6
            depth[~interior] = 0
            self._sdf_cache["depth"] = depth
        return self._sdf_cache["depth"]

    def descriptor(self) -> str:
        out = io.StringIO()
        out.write("ring\n")
        out.write("inner " + self.inner.descriptor() + "\n")
        out.write("outer " + self.outer.descriptor() + "\n")
        out.write(self.grid.descriptor() + "\n")
        out.write(f"gap {self.gap!r}\n")
        return out.getvalue()


def _dilate8(m):
    out = m.copy()
    out[1:, :] |= m[:-1, :]
    out[:-1, :] |= m[1:, :]
    out[:, 1:] |= m[:, :-1]
    out[:, :-1] |= m[:, 1:]
    out[1:, 1:] |= m[:-1, :-1]
    out[:-1, :-1] |= m[1:, 1:]
    out[1:, :-1] |= m[:-1, 1:]
    out[:-1, 1:] |= m[1:, :-1]
    return out


def make_ring(inner: ConvexDomain, outer: ConvexDomain, grid: Grid,
              n_boundary: int = 2048) -> ConvexRing:
    """Classify grid nodes against the ring and build the ghost layer."""
    pts = grid.points()
    s = grid.h
    lev_in = np.asarray(inner.level(pts, smoothing=s), dtype=float)
    lev_out = np.asarray(outer.level(pts, smoothing=s), dtype=float)
    in_inner = lev_in < 0.0
    in_outer = lev_out < 0.0
    if np.any(in_inner & ~in_outer):
        raise GapTooSmall("inner domain not contained in outer domain on this grid")

    b1 = inner.boundary(n_boundary, smoothing=s)
    b2 = outer.boundary(n_boundary, smoothing=s)
    gap = float(_distance_to_polyline(b1, b2).min())
    if gap < 2.0 * grid.h:
        raise GapTooSmall(f"ring gap {gap!r} below two cells ({2 * grid.h!r})")

    # shrink by a level margin so no interior node hugs the boundary; this
    # bounds the ghost extrapolation factor (level functions are Lipschitz
    # with constant near 1, so the margin is close to a true distance)
    margin = 0.25 * s
    interior = (lev_out < -margin) & (lev_in > margin)
    if not interior.any():
        raise GridTooSmall("no interior nodes")
    if int(np.count_nonzero(in_inner)) >= int(np.count_nonzero(in_outer)):
        raise GapTooSmall("masks not strictly nested")

    ny, nx = interior.shape
    ghost = np.zeros_like(interior)
    for dj, di in _STENCIL:
        shifted = np.zeros_like(interior)
        js = slice(max(dj, 0), ny + min(dj, 0))
        jt = slice(max(-dj, 0), ny + min(-dj, 0))
        is_ = slice(max(di, 0), nx + min(di, 0))
        it = slice(max(-di, 0), nx + min(-di, 0))
        shifted[jt, it] = interior[js, is_]
        ghost |= shifted
    ghost &= ~interior

    mask = np.full(interior.shape, int(Mask.OUTSIDE), dtype=np.uint8)
    mask[interior] = int(Mask.INTERIOR)
    near_inner = ghost & (lev_in <= margin)
    mask[near_inner] = int(Mask.INNER_BOUNDARY)
    mask[ghost & ~near_inner] = int(Mask.OUTER_BOUNDARY)

    ghosts = _build_ghost_layer(inner, outer, grid, mask, lev_in, lev_out)
    return ConvexRing(inner, outer, grid, mask, ghosts, gap)


def _build_ghost_layer(inner, outer, grid, mask, lev_in, lev_out) -> GhostLayer:
    """Pair every ghost node with the interior neighbour giving the deepest
    boundary cut, then locate all cut points by vectorized bisection."""
    ny, nx = mask.shape
    interior = mask == Mask.INTERIOR
    pts = grid.points().reshape(-1, 2)

    all_idx, all_partner, all_theta, all_side = [], [], [], []
    for side_code, dom, lev in ((int(Mask.INNER_BOUNDARY), inner, lev_in),
                                (int(Mask.OUTER_BOUNDARY), outer, lev_out)):
        gmask = mask == side_code
        if not gmask.any():
            continue
        gj, gi = np.nonzero(gmask)
        # score candidate partners by how far inside the ring they sit:
        # inner ghosts want max lev_in, outer ghosts want min lev_out
        best_score = np.full(len(gj), -np.inf)
        best_pj = np.full(len(gj), -1)
        best_pi = np.full(len(gj), -1)
        for dj, di in _STENCIL:
            pj, pi = gj + dj, gi + di
            ok = (pj >= 0) & (pj < ny) & (pi >= 0) & (pi < nx)
            okc = ok.copy()
            okc[ok] &= interior[pj[ok], pi[ok]]
            score = np.full(len(gj), -np.inf)
            sign = 1.0 if side_code == int(Mask.INNER_BOUNDARY) else -1.0
            score[okc] = sign * lev[pj[okc], pi[okc]]
            take = score > best_score
            best_score[take] = score[take]
            best_pj[take] = pj[take]
            best_pi[take] = pi[take]
        keep = best_pj >= 0
        gj, gi = gj[keep], gi[keep]
        pj, pi = best_pj[keep], best_pi[keep]
        g_flat = gj * nx + gi
        p_flat = pj * nx + pi
        a = pts[p_flat]
        b = pts[g_flat]
        # the cut may sit beyond the ghost (ghosts can be slightly inside the
        # ring after the margin shrink), so bracket out to 4 segment lengths
        far = 4.0
        f_a = np.asarray(dom.level(a, smoothing=grid.h), dtype=float)
        f_far = np.asarray(dom.level(a + far * (b - a), smoothing=grid.h), dtype=float)
        crossed = f_a * f_far < 0
        lo = np.zeros(len(gj))
        hi = np.full(len(gj), far)
        for _ in range(52):
            mid = 0.5 * (lo + hi)
            fm = np.asarray(dom.level(a + mid[:, None] * (b - a), smoothing=grid.h),
                            dtype=float)
            same = fm * f_a > 0
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        theta = np.where(crossed, 0.5 * (lo + hi), far)
        theta = np.clip(theta, 0.15, far)
        all_idx.append(g_flat)
        all_partner.append(p_flat)
        all_theta.append(theta)
        all_side.append(np.full(len(gj), side_code, dtype=np.uint8))

    return GhostLayer(np.concatenate(all_idx).astype(np.int64),
                      np.concatenate(all_partner).astype(np.int64),
                      np.concatenate(all_theta).astype(float),
                      np.concatenate(all_side))


def make_annulus(r1: float, r2: float, resolution: int = 257,
                 extent: float | None = None) -> ConvexRing:
    """Concentric-disk ring; the canonical benchmark geometry."""
    if not (0 < r1 < r2):
        raise BadRadii(f"need 0 < R1 < R2, got {r1!r}, {r2!r}")
    if extent is None:
        extent = 1.025 * r2
    grid = Grid.square(extent, resolution)
    return make_ring(Disk((0.0, 0.0), r1), Disk((0.0, 0.0), r2), grid)


@dataclass(frozen=True)
class RingPair:
    inner_ring: ConvexRing
    outer_ring: ConvexRing


def make_rings(cap: DiniCap, r_d: float, resolution: int = 257,
               pad_cells: int = 6) -> RingPair:
    """The two barrier rings carried by a cap domain K.

    inner: K minus the half-radius ball at (0, r_d);
    outer: the 3 r_d ball at (0, -r_d) minus the point reflection -K.
    """
    if abs(r_d - cap.r_d) > 1e-12 * max(1.0, r_d):
        raise OutOfRange("r_d must match the cap")

    (x0, x1), (y0, y1) = cap.bbox()
    span = max(x1 - x0, y1 - y0)
    h_est = span / max(resolution - 2 * pad_cells - 1, 1)
    pad = pad_cells * h_est
    grid_in = Grid.from_box(x0 - pad, x1 + pad, y0 - pad, y1 + pad, resolution)
    inner_ring = make_ring(Disk((0.0, r_d), r_d / 2), cap, grid_in)

    ball = Disk((0.0, -r_d), 3.0 * r_d)
    (bx0, bx1), (by0, by1) = ball.bbox()
    h_est = (bx1 - bx0) / max(resolution - 2 * pad_cells - 1, 1)
    pad = pad_cells * h_est
    grid_out = Grid.from_box(bx0 - pad, bx1 + pad, by0 - pad, by1 + pad, resolution)
    outer_ring = make_ring(Reflected(cap), ball, grid_out)
    return RingPair(inner_ring, outer_ring)


def rasterize(dom: ConvexDomain, grid: Grid):
    """Inside mask and signed distance on grid nodes.

    Distance comes from the exact formula for disks and polygons and from a
    4096-point boundary polyline otherwise (error well below a cell diagonal).
    """
    pts = grid.points()
    (x0, x1), (y0, y1) = dom.bbox()
    if x0 < grid.x0 - grid.h or x1 > grid.x0 + (grid.nx - 1) * grid.h + grid.h \
            or y0 < grid.y0 - grid.h or y1 > grid.y0 + (grid.ny - 1) * grid.h + grid.h:
        raise GridTooSmall("grid does not cover the domain")
    mask = dom.inside(pts, smoothing=grid.h)
    sdf = dom.signed_distance(pts, smoothing=grid.h)
    return mask, sdf


def convexity_midpoint_check(inside_mask: np.ndarray, grid: Grid, n_pairs: int = 10_000,
                             rng: np.random.Generator | None = None) -> bool:
    """Random interior point pairs must have interior midpoints (one-cell slack)."""
    rng = rng or np.random.default_rng(0)
    jj, ii = np.nonzero(inside_mask)
    if len(jj) < 2:
        return True
    a = rng.integers(0, len(jj), size=n_pairs)
    b = rng.integers(0, len(jj), size=n_pairs)
    mj = 0.5 * (jj[a] + jj[b])
    mi = 0.5 * (ii[a] + ii[b])
    ok = np.zeros(n_pairs, dtype=bool)
    for dj in (np.floor(mj), np.ceil(mj)):
        for di in (np.floor(mi), np.ceil(mi)):
            ok |= inside_mask[dj.astype(int), di.astype(int)]
    # one-cell tolerance: any corner of the midpoint cell inside
    return bool(np.all(ok))
