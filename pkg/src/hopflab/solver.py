"""Energy-based potentials on convex rings and their differential diagnostics.

Discretization: P1 elements on the criss-cross right-triangle mesh over grid
nodes (each cell split along its SW-NE diagonal), with the discrete energy

    J(v) = sum_T F(sqrt(|grad v|_T^2 + delta^2)) * area_T.

For the quadratic law the stationarity rows reproduce the 5-point Laplacian
exactly. Curved Dirichlet boundaries enter through a ghost layer: each ghost
value is the linear extrapolation of its paired interior node through the
boundary cut point, the classical second-order embedded-boundary closure.
The solver drives the stationarity rows at interior nodes to zero (Newton on
the flux-divergence residual with the ghost closure substituted in), with
continuation over the regularization delta; the energy J is tracked along
accepted iterates.

The residual reported everywhere is that same conservative flux-divergence
form of div(H(|grad u|) grad u), assembled from triangle fluxes and divided
by cell area, so a solved field has residual below the solver tolerance
(relative to the ring's flux scale) at every interior node.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateGradient, LineSearchStall, StagnationPoint
from .geometry import ConvexRing, Grid, Mask
from .orlicz import OrliczFunction

_G_LOWER = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])   # slots (A, B, C)
_G_UPPER = np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0]])   # slots (A, C, D)


@dataclass
class ScalarField:
    """Grid-sampled function; boundary (ghost) nodes hold Dirichlet closures."""
    grid: Grid
    values: np.ndarray
    mask: np.ndarray
    ring: ConvexRing | None = None
    meta: dict = field(default_factory=dict)

    def interior_mask(self):
        return self.mask == Mask.INTERIOR

    def valid_mask(self):
        return self.mask != Mask.OUTSIDE

    def interior_values(self):
        return self.values[self.interior_mask()]

    def copy_with(self, values, meta=None):
        return ScalarField(self.grid, np.asarray(values, dtype=float),
                           self.mask.copy(), self.ring,
                           dict(self.meta if meta is None else meta))

    def interp(self, pts):
        """Bilinear interpolation; NaN where any stencil corner lacks a value."""
        g = self.grid
        p = np.asarray(pts, dtype=float)
        fx = (p[..., 0] - g.x0) / g.h
        fy = (p[..., 1] - g.y0) / g.h
        i0 = np.clip(np.floor(fx).astype(int), 0, g.nx - 2)
        j0 = np.clip(np.floor(fy).astype(int), 0, g.ny - 2)
        tx = fx - i0
        ty = fy - j0
        inside = (fx >= 0) & (fx <= g.nx - 1) & (fy >= 0) & (fy <= g.ny - 1)
        valid = self.valid_mask()
        ok = (valid[j0, i0] & valid[j0, i0 + 1]
              & valid[j0 + 1, i0] & valid[j0 + 1, i0 + 1] & inside)
        v = self.values
        out = ((1 - tx) * (1 - ty) * v[j0, i0] + tx * (1 - ty) * v[j0, i0 + 1]
               + (1 - tx) * ty * v[j0 + 1, i0] + tx * ty * v[j0 + 1, i0 + 1])
        return np.where(ok, out, np.nan)


@dataclass(frozen=True)
class SolveOptions:
    """tol applies to the residual max-norm relative to the ring's flux
    scale (median face flux over the ring gap), so one setting covers both
    mild and strongly degenerate laws."""
    delta_schedule: tuple = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    tol: float = 1e-8
    max_iter: int = 60
    linear_solver: str = "direct"

    def __post_init__(self):
        sched = tuple(self.delta_schedule)
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("delta schedule must decrease strictly")
        if sched[-1] < 1e-8:
            raise ValueError("final delta below 1e-8")
        if self.linear_solver not in ("direct", "cg"):
            raise ValueError("linear_solver must be 'direct' or 'cg'")


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------

class _Assembly:
    """Triangle lists, the ghost closure, and energy/gradient/Hessian kernels."""

    def __init__(self, ring: ConvexRing):
        self.ring = ring
        grid = ring.grid
        self.h = grid.h
        ny, nx = grid.ny, grid.nx
        self.n_nodes = ny * nx
        mask_flat = ring.mask.ravel()
        valid = mask_flat > 0
        interior = mask_flat == Mask.INTERIOR

        idx = np.arange(self.n_nodes).reshape(ny, nx)
        A = idx[:-1, :-1].ravel()
        B = A + 1
        D = A + nx
        C = D + 1
        low_ok = valid[A] & valid[B] & valid[C] & (interior[A] | interior[B] | interior[C])
        up_ok = valid[A] & valid[C] & valid[D] & (interior[A] | interior[C] | interior[D])
        self.tris = (np.stack([A[low_ok], B[low_ok], C[low_ok]], axis=1),
                     np.stack([A[up_ok], C[up_ok], D[up_ok]], axis=1))
        self.gmats = (_G_LOWER / self.h, _G_UPPER / self.h)
        self.area = 0.5 * self.h * self.h

        self.interior_ids = np.flatnonzero(interior)
        self.n_unknown = len(self.interior_ids)
        unk_of = np.full(self.n_nodes, -1, dtype=np.int64)
        unk_of[self.interior_ids] = np.arange(self.n_unknown)

        gh = ring.ghosts
        rows = np.concatenate([self.interior_ids, gh.index])
        cols = np.concatenate([np.arange(self.n_unknown), unk_of[gh.partner]])
        vals = np.concatenate([np.ones(self.n_unknown), 1.0 - 1.0 / gh.theta])
        self.P = sp.csr_matrix((vals, (rows, cols)),
                               shape=(self.n_nodes, self.n_unknown))
        self._ghost_index = gh.index
        self._ghost_side = gh.side
        self._ghost_theta = gh.theta

    def closure_offset(self, inner_value: float, outer_value: float):
        q0 = np.zeros(self.n_nodes)
        data = np.where(self._ghost_side == Mask.INNER_BOUNDARY,
                        inner_value, outer_value)
        q0[self._ghost_index] = data / self._ghost_theta
        return q0

    def full_values(self, u: np.ndarray, q0: np.ndarray):
        return self.P @ u + q0

    def energy(self, v_full, of: OrliczFunction, delta: float) -> float:
        total = 0.0
        for tri, G in zip(self.tris, self.gmats):
            g = v_full[tri] @ G.T
            q = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2 + delta * delta)
            total += float(np.sum(of.F(np.minimum(q, of.t_max)))) * self.area
        return total

    def gradient_full(self, v_full, of: OrliczFunction, delta: float):
        grad = np.zeros(self.n_nodes)
        for tri, G in zip(self.tris, self.gmats):
            g = v_full[tri] @ G.T
            q = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2 + delta * delta)
            qs = np.maximum(q, 1e-30)
            Hq = of.h(np.minimum(qs, of.t_max)) / qs
            contrib = (self.area * Hq)[:, None] * (g @ G)
            np.add.at(grad, tri.ravel(), contrib.ravel())
        return grad

    def _hessian_full(self, v_full, of: OrliczFunction, delta: float):
        rows, cols, vals = [], [], []
        for tri, G in zip(self.tris, self.gmats):
            g = v_full[tri] @ G.T
            q = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2 + delta * delta)
            qs = np.minimum(np.maximum(q, 1e-30), of.t_max)
            hv = of.h(qs)
            hp = of.h_prime(qs)
            Hq = hv / qs
            Dq = (hp * qs - hv) / qs ** 3
            a = g @ G                       # (n, 3): per-slot directional terms
            base = G.T @ G                  # (3, 3)
            e = (self.area * Hq)[:, None, None] * base[None, :, :] \
                + (self.area * Dq)[:, None, None] * a[:, None, :] * a[:, :, None]
            rows.append(np.repeat(tri, 3, axis=1).ravel())
            cols.append(np.tile(tri, (1, 3)).ravel())
            vals.append(e.ravel())
        return sp.coo_matrix((np.concatenate(vals),
                              (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.n_nodes, self.n_nodes)).tocsr()

    def residual_rows(self, v_full, of, delta):
        """Stationarity rows at interior nodes (ghosts already substituted)."""
        return self.gradient_full(v_full, of, delta)[self.interior_ids]

    def flux_scale(self, v_full, of, delta) -> float:
        """Median face flux over the ring gap: the natural residual size."""
        fluxes = []
        for tri, G in zip(self.tris, self.gmats):
            g = v_full[tri] @ G.T
            q = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2 + delta * delta)
            fluxes.append(np.asarray(of.h(np.minimum(q, of.t_max)), dtype=float))
        med = float(np.median(np.concatenate(fluxes)))
        return med / max(self.ring.gap, 1e-12)

    def jacobian_rows(self, v_full, of, delta):
        H_full = self._hessian_full(v_full, of, delta)
        return (H_full[self.interior_ids, :] @ self.P).tocsc()


_POWER2 = None


def _quadratic_law():
    global _POWER2
    if _POWER2 is None:
        from .orlicz import power
        _POWER2 = power(2.0)
    return _POWER2


def _linear_solve(A, rhs, method: str):
    if method == "direct":
        return spla.splu(A).solve(rhs)
    # conjugate-gradient-like path: BiCGstab (rows are mildly nonsymmetric
    # near the boundary closure), diagonal preconditioner, direct fallback
    M = sp.diags(1.0 / A.diagonal())
    x, info = spla.bicgstab(A, rhs, rtol=1e-12, atol=0.0, maxiter=10000, M=M)
    if info != 0:
        return spla.splu(A).solve(rhs)
    return x


# --------------------------------------------------------------------------
# solvers
# --------------------------------------------------------------------------

def solve_harmonic(ring: ConvexRing, opts: SolveOptions | None = None,
                   inner_value: float = 1.0, outer_value: float = 0.0) -> ScalarField:
    """Discrete Laplace solve (5-point rows with the ghost closure, one solve)."""
    opts = opts or SolveOptions()
    asm = _get_assembly(ring)
    of = _quadratic_law()
    q0 = asm.closure_offset(inner_value, outer_value)
    v = asm.full_values(np.zeros(asm.n_unknown), q0)
    A = asm.jacobian_rows(v, of, 0.0)
    G = asm.residual_rows(v, of, 0.0)
    u = _linear_solve(A, -G, opts.linear_solver)
    v = asm.full_values(u, q0)
    res = float(np.max(np.abs(asm.residual_rows(v, of, 0.0)))) / asm.h ** 2
    scale = max(1.0, asm.flux_scale(v, of, 0.0))
    values = v.reshape(ring.grid.ny, ring.grid.nx)
    energy = asm.energy(v, of, 0.0)
    meta = {"converged": res < max(opts.tol, 1e-7) * scale,
            "residual": res,
            "delta_final": 0.0,
            "energy": energy,
            "log": [(0, 0.0, energy, res)],
            "inner_value": inner_value, "outer_value": outer_value,
            "operator": "power2"}
    return ScalarField(ring.grid, values, ring.mask.copy(), ring, meta)


def solve_h_potential(ring: ConvexRing, of: OrliczFunction,
                      opts: SolveOptions | None = None,
                      inner_value: float = 1.0, outer_value: float = 0.0) -> ScalarField:
    """Minimize the ring energy of F with data inner_value/outer_value.

    Continuation over the delta schedule regularizes the degenerate or
    singular gradient law; each stage runs damped Newton on the convex
    discrete energy. Non-convergence is recorded on meta, not raised.
    """
    opts = opts or SolveOptions()
    _coercivity_warning(of)
    asm = _get_assembly(ring)
    q0 = asm.closure_offset(inner_value, outer_value)

    # harmonic warm start
    of2 = _quadratic_law()
    v = asm.full_values(np.zeros(asm.n_unknown), q0)
    A = asm.jacobian_rows(v, of2, 0.0)
    u = _linear_solve(A, -asm.residual_rows(v, of2, 0.0), opts.linear_solver)

    log = []
    converged = True
    it_total = 0
    J = None
    for delta in opts.delta_schedule:
        u, J, stage_ok, stage_log = _newton_stage(asm, of, q0, u, delta, opts)
        for entry in stage_log:
            log.append((it_total, delta) + entry)
            it_total += 1
        if not stage_ok:
            converged = False
            break

    v = asm.full_values(u, q0)
    res = float(np.max(np.abs(asm.residual_rows(v, of, opts.delta_schedule[-1])))) \
        / asm.h ** 2
    meta = {"converged": converged, "residual": res,
            "delta_final": opts.delta_schedule[-1],
            "energy": J, "log": log,
            "inner_value": inner_value, "outer_value": outer_value,
            "operator": f"power{of.p}" if of.kind == "power" else "custom"}
    values = v.reshape(ring.grid.ny, ring.grid.nx)
    return ScalarField(ring.grid, values, ring.mask.copy(), ring, meta)


def _newton_stage(asm, of, q0, u, delta, opts):
    """Damped Newton on the stationarity rows; merit is the squared residual.

    Newton directions are exact-Jacobian directions and hence always merit
    descent directions; a failed backtracking line search therefore means
    the residual assembly has reached its floating-point floor.
    """
    v = asm.full_values(u, q0)
    G = asm.residual_rows(v, of, delta)
    phi = float(G @ G)
    scale = max(1.0, asm.flux_scale(v, of, delta))
    stage_log = []
    for _ in range(opts.max_iter):
        res = float(np.max(np.abs(G))) / asm.h ** 2
        J = asm.energy(v, of, delta)
        stage_log.append((J, res))
        if res < opts.tol * scale:
            return u, J, True, stage_log
        A = asm.jacobian_rows(v, of, delta)
        du = _linear_solve(A, -G, opts.linear_solver)
        step = 1.0
        accepted = False
        for _ in range(40):
            u_try = u + step * du
            v_try = asm.full_values(u_try, q0)
            G_try = asm.residual_rows(v_try, of, delta)
            phi_try = float(G_try @ G_try)
            if phi_try <= (1.0 - 2e-4 * step) * phi:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if res < 100.0 * opts.tol * scale:
                # rounding floor of the flux cancellation, close enough
                return u, J, True, stage_log
            raise LineSearchStall("no residual decrease far from tolerance")
        u, v, G, phi = u_try, v_try, G_try, phi_try
    return u, asm.energy(v, of, delta), False, stage_log


def _coercivity_warning(of: OrliczFunction):
    if of.kind != "custom":
        return
    ts = np.geomspace(of.t_max * 1e-4, of.t_max / 2, 64)
    hs = of.h(ts)
    slope = np.polyfit(np.log(ts), np.log(np.maximum(hs, 1e-300)), 1)[0]
    ratio = hs / ts ** slope
    if float(np.max(ratio) / max(np.min(ratio), 1e-300)) > 10.0:
        warnings.warn("flow law failed a quick coercivity screen; "
                      "the minimization may be ill-posed", stacklevel=3)


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

def operator_residual(fld: ScalarField, of: OrliczFunction,
                      delta: float = 0.0) -> ScalarField:
    """Conservative flux-divergence residual of div(H(|grad u|) grad u).

    Assembled from the same triangle fluxes the solver drives to zero, so a
    solved field has residual below the solver tolerance (relative to the
    ring's flux scale) at every interior node.
    """
    ring = fld.ring
    if ring is None:
        raise ValueError("field carries no ring")
    asm = _get_assembly(ring)
    grad = asm.gradient_full(fld.values.ravel(), of, delta)
    res = np.zeros_like(grad)
    interior = fld.mask.ravel() == Mask.INTERIOR
    res[interior] = -grad[interior] / asm.h ** 2
    return fld.copy_with(res.reshape(fld.values.shape), meta={"kind": "residual"})


_ASSEMBLY_CACHE: dict[int, tuple] = {}


def _get_assembly(ring: ConvexRing) -> _Assembly:
    # the cached tuple keeps the ring alive, so its id cannot be recycled
    entry = _ASSEMBLY_CACHE.get(id(ring))
    if entry is None or entry[0] is not ring:
        if len(_ASSEMBLY_CACHE) > 8:
            _ASSEMBLY_CACHE.clear()
        entry = (ring, _Assembly(ring))
        _ASSEMBLY_CACHE[id(ring)] = entry
    return entry[1]


@dataclass
class LevelDiagnostics:
    grad_x: np.ndarray
    grad_y: np.ndarray
    grad_norm: np.ndarray
    inf_lap: np.ndarray
    curvature: np.ndarray
    laplacian: np.ndarray
    cells: np.ndarray          # nodes where every diagnostic is trustworthy
    vanishing: np.ndarray      # nodes excluded for |grad| below threshold
    vanish_tol: float


def level_diagnostics(fld: ScalarField, vanish_tol: float | None = None) -> LevelDiagnostics:
    """Central-difference gradient, infinity-Laplacian and level-set curvature.

    curvature is positive where superlevel sets are convex; for a harmonic
    field the identity inf_lap = curvature * |grad|^3 (two dimensions) holds
    up to the discrete Laplacian defect.
    """
    v = fld.values
    h = fld.grid.h
    valid = fld.valid_mask()
    interior = fld.interior_mask()

    def shift(arr, dj, di, fill=np.nan):
        out = np.full_like(arr, fill, dtype=float)
        ny, nx = arr.shape
        js = slice(max(dj, 0), ny + min(dj, 0))
        jt = slice(max(-dj, 0), ny + min(-dj, 0))
        is_ = slice(max(di, 0), nx + min(di, 0))
        it = slice(max(-di, 0), nx + min(-di, 0))
        out[jt, it] = arr[js, is_]
        return out

    ok = interior.copy()
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if dj == 0 and di == 0:
                continue
            ok &= shift(valid.astype(float), dj, di, 0.0) > 0.5

    vE, vW = shift(v, 0, 1), shift(v, 0, -1)
    vN, vS = shift(v, 1, 0), shift(v, -1, 0)
    vNE, vSW = shift(v, 1, 1), shift(v, -1, -1)
    vNW, vSE = shift(v, 1, -1), shift(v, -1, 1)

    wx = (vE - vW) / (2 * h)
    wy = (vN - vS) / (2 * h)
    wxx = (vE - 2 * v + vW) / h ** 2
    wyy = (vN - 2 * v + vS) / h ** 2
    wxy = (vNE + vSW - vNW - vSE) / (4 * h ** 2)
    gn = np.hypot(wx, wy)

    if vanish_tol is None:
        vanish_tol = 10.0 * max(fld.meta.get("delta_final", 1e-6), 1e-12)
    vanishing = ok & (gn < vanish_tol)
    cells = ok & ~vanishing

    inf_lap = wx ** 2 * wxx + 2 * wx * wy * wxy + wy ** 2 * wyy
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = -(wxx * wy ** 2 - 2 * wx * wy * wxy + wyy * wx ** 2) / gn ** 3
    lap = wxx + wyy
    return LevelDiagnostics(wx, wy, gn, inf_lap, kappa, lap, cells, vanishing,
                            vanish_tol)


@dataclass(frozen=True)
class GradientBounds:
    c: float
    C: float
    n_core: int
    n_near: int


def gradient_bounds(fld: ScalarField, ring: ConvexRing | None = None) -> GradientBounds:
    """Bounds 0 < c < |grad w| < C from core cells plus one-sided estimates
    at boundary-adjacent cells."""
    ring = ring or fld.ring
    v = fld.values
    h = fld.grid.h
    depth = ring.interior_depth()
    interior = ring.mask == Mask.INTERIOR
    ny, nx = v.shape

    core = depth >= 2
    gx = np.full_like(v, np.nan)
    gy = np.full_like(v, np.nan)
    gx[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
    gy[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * h)
    core_ok = core.copy()
    core_ok[:, 0] = core_ok[:, -1] = False
    core_ok[0, :] = core_ok[-1, :] = False
    gn_core = np.hypot(gx, gy)[core_ok]
    gn_core = gn_core[np.isfinite(gn_core)]

    # one-sided second-order estimates on the first two layers
    near = interior & ~core
    njs, nis = np.nonzero(near)
    vals = []
    for j, i in zip(njs, nis):
        comps = []
        for axis in (0, 1):
            best = None
            if axis == 1:
                cand = [((0, 1), (0, 2), "f"), ((0, -1), (0, -2), "b")]
                cent = ((0, 1), (0, -1))
            else:
                cand = [((1, 0), (2, 0), "f"), ((-1, 0), (-2, 0), "b")]
                cent = ((1, 0), (-1, 0))
            (dj1, di1), (dj2, di2) = cent
            if (0 <= j + dj1 < ny and 0 <= j + dj2 < ny and 0 <= i + di1 < nx
                    and 0 <= i + di2 < nx and interior[j + dj1, i + di1]
                    and interior[j + dj2, i + di2]):
                best = (v[j + dj1, i + di1] - v[j + dj2, i + di2]) / (2 * h)
            else:
                for (dj1, di1), (dj2, di2), kind in cand:
                    j1, i1, j2, i2 = j + dj1, i + di1, j + dj2, i + di2
                    if (0 <= j1 < ny and 0 <= j2 < ny and 0 <= i1 < nx and 0 <= i2 < nx
                            and interior[j1, i1] and interior[j2, i2]):
                        d = (-3 * v[j, i] + 4 * v[j1, i1] - v[j2, i2]) / (2 * h)
                        best = d if kind == "f" else -d
                        break
            if best is None:
                comps = None
                break
            comps.append(best)
        if comps is not None:
            vals.append(np.hypot(comps[0], comps[1]))
    gn_near = np.asarray(vals)

    allg = np.concatenate([gn_core, gn_near]) if len(gn_near) else gn_core
    if allg.size == 0:
        raise DegenerateGradient("no cells with measurable gradient")
    c = float(np.min(allg))
    C = float(np.max(allg))
    if c < max(1e-8, 1e-3 * C):
        raise DegenerateGradient(f"lower gradient bound {c!r} is numerically zero")
    return GradientBounds(c, C, int(gn_core.size), int(gn_near.size))


def trace_flow_line(fld: ScalarField, x0, grad_floor: float | None = None,
                    max_steps: int = 200_000):
    """Gradient flow line through x0 parametrized by the level value.

    Integrates dx/ds = grad w / |grad w|^2 in both directions with midpoint
    steps capped at half a cell, returning monotone (w, |grad w|) samples.
    """
    if grad_floor is None:
        grad_floor = 10.0 * max(fld.meta.get("delta_final", 1e-6), 1e-12)
    gx, gy = _node_gradients(fld)
    gx_f = fld.copy_with(gx)
    gy_f = fld.copy_with(gy)
    h = fld.grid.h

    def sample(x):
        w = float(fld.interp(x))
        cx = float(gx_f.interp(x))
        cy = float(gy_f.interp(x))
        return w, cx, cy

    def trace(direction):
        out = []
        x = np.asarray(x0, dtype=float).copy()
        for _ in range(max_steps):
            w, cx, cy = sample(x)
            if not np.isfinite(w) or not np.isfinite(cx):
                break
            gn = float(np.hypot(cx, cy))
            if gn < grad_floor:
                if 0.05 < w < 0.95:
                    raise StagnationPoint(f"gradient {gn!r} below floor at {x!r}")
                break
            out.append((w, gn))
            if (direction > 0 and w >= 1.0) or (direction < 0 and w <= 0.0):
                break
            dw = direction * min(1e-2, 0.5 * h * gn)
            xm = x + 0.5 * dw * np.array([cx, cy]) / gn ** 2
            wm, mx, my = sample(xm)
            if not np.isfinite(mx):
                x = x + dw * np.array([cx, cy]) / gn ** 2
                continue
            mn = float(np.hypot(mx, my))
            if mn < grad_floor:
                break
            x = x + dw * np.array([mx, my]) / mn ** 2
        return out

    w0, cx0, cy0 = sample(np.asarray(x0, dtype=float))
    if not np.isfinite(w0) or np.hypot(cx0, cy0) < grad_floor:
        raise StagnationPoint(f"no usable gradient at the seed {x0!r}")
    down = trace(-1.0)
    up = trace(+1.0)
    pts = list(reversed(down)) + up
    # enforce strict monotonicity in w (also drops the duplicated seed sample)
    cleaned = []
    last = -np.inf
    for w, gn in pts:
        if w > last:
            cleaned.append((float(w), float(gn)))
            last = w
    return cleaned


def _node_gradients(fld: ScalarField):
    v = fld.values
    h = fld.grid.h
    valid = fld.valid_mask()
    ny, nx = v.shape
    gx = np.full_like(v, np.nan)
    gy = np.full_like(v, np.nan)

    vE = np.full_like(v, np.nan)
    vW = np.full_like(v, np.nan)
    vN = np.full_like(v, np.nan)
    vS = np.full_like(v, np.nan)
    vE[:, :-1] = np.where(valid[:, 1:], v[:, 1:], np.nan)
    vW[:, 1:] = np.where(valid[:, :-1], v[:, :-1], np.nan)
    vN[:-1, :] = np.where(valid[1:, :], v[1:, :], np.nan)
    vS[1:, :] = np.where(valid[:-1, :], v[:-1, :], np.nan)

    central_x = (vE - vW) / (2 * h)
    central_y = (vN - vS) / (2 * h)
    fwd_x = (vE - v) / h
    bwd_x = (v - vW) / h
    fwd_y = (vN - v) / h
    bwd_y = (v - vS) / h
    gx = np.where(np.isfinite(central_x), central_x,
                  np.where(np.isfinite(fwd_x), fwd_x, bwd_x))
    gy = np.where(np.isfinite(central_y), central_y,
                  np.where(np.isfinite(fwd_y), fwd_y, bwd_y))
    gx[~valid] = np.nan
    gy[~valid] = np.nan
    return gx, gy
