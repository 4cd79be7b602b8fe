"""Batch front-end: check -> solve -> verify pipelines driven by a config file.

Exit codes: 0 ok, 1 usage/config/missing artifacts, 2 verification failure,
3 solver non-convergence. All emitted files use full round-trip float
precision and contain no timestamps, so identical configs reproduce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import barrier as barrier_mod
from . import geometry, gridio, hopf, orlicz, solver
from .errors import ConfigError, HopflabError, MissingArtifact, NotIntegrable


@dataclass
class RunConfig:
    function_kind: str = "power"
    p: float = 2.0
    t_max: float | None = None
    table_path: str | None = None
    modulus_kind: str = "power"
    modulus_a: float = 0.5
    modulus_q: float = 1.0
    modulus_t_cap: float | None = None
    geometry_kind: str = "annulus"
    r1: float = 1.0
    r2: float = 2.0
    r_d: float = 0.25
    ring_side: str = "inner"
    resolution: int = 129
    extent: float | None = None
    delta_schedule: tuple = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    tol: float = 1e-8
    max_iter: int = 60
    linear_solver: str = "direct"
    zeta_source: str = "field"
    c_d: float = 1.0
    target: str = "min_inner_u"
    alpha: str = "auto"
    beta: str = "auto"
    hopf_point: tuple | None = None
    hopf_radii: tuple | None = None
    seed: int = 20240817
    raw: dict = field(default_factory=dict)


def parse_config(path, grid_override=None, p_override=None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        g = _Getter(parser)
        cfg.function_kind = g.str("function", "kind", cfg.function_kind)
        cfg.p = g.flt("function", "p", cfg.p)
        cfg.t_max = g.flt("function", "t_max", cfg.t_max)
        cfg.table_path = g.str("function", "table", None)
        cfg.modulus_kind = g.str("modulus", "kind", cfg.modulus_kind)
        cfg.modulus_a = g.flt("modulus", "a", cfg.modulus_a)
        cfg.modulus_q = g.flt("modulus", "q", cfg.modulus_q)
        cfg.modulus_t_cap = g.flt("modulus", "t_cap", None)
        cfg.geometry_kind = g.str("geometry", "kind", cfg.geometry_kind)
        cfg.r1 = g.flt("geometry", "r1", cfg.r1)
        cfg.r2 = g.flt("geometry", "r2", cfg.r2)
        cfg.r_d = g.flt("geometry", "r_d", cfg.r_d)
        cfg.ring_side = g.str("geometry", "ring", cfg.ring_side)
        cfg.resolution = int(g.flt("grid", "resolution", cfg.resolution))
        cfg.extent = g.flt("grid", "extent", None)
        sched = g.str("solver", "delta_schedule", None)
        if sched:
            cfg.delta_schedule = tuple(float(x) for x in sched.split())
        cfg.tol = g.flt("solver", "tol", cfg.tol)
        cfg.max_iter = int(g.flt("solver", "max_iter", cfg.max_iter))
        cfg.linear_solver = g.str("solver", "linear_solver", cfg.linear_solver)
        cfg.zeta_source = g.str("barrier", "zeta", cfg.zeta_source)
        cfg.c_d = g.flt("barrier", "c_d", cfg.c_d)
        cfg.target = g.str("barrier", "target", cfg.target)
        cfg.alpha = g.str("barrier", "alpha", cfg.alpha)
        cfg.beta = g.str("barrier", "beta", cfg.beta)
        pt = g.str("hopf", "point", None)
        if pt:
            cfg.hopf_point = tuple(float(x) for x in pt.split())
        rd = g.str("hopf", "radii", None)
        if rd:
            cfg.hopf_radii = tuple(float(x) for x in rd.split())
        cfg.seed = int(g.flt("run", "seed", cfg.seed))

    if grid_override is not None:
        cfg.resolution = int(grid_override)
    if p_override is not None:
        cfg.p = float(p_override)
    _validate(cfg)
    return cfg


class _Getter:
    def __init__(self, parser):
        self.parser = parser

    def str(self, sec, key, default):
        if self.parser.has_option(sec, key):
            return self.parser.get(sec, key).strip()
        return default

    def flt(self, sec, key, default):
        if self.parser.has_option(sec, key):
            try:
                return float(self.parser.get(sec, key))
            except ValueError as exc:
                raise ConfigError(f"[{sec}] {key}: {exc}") from exc
        return default


def _validate(cfg: RunConfig):
    if cfg.resolution < 33:
        raise ConfigError("grid resolution must be at least 33")
    if cfg.function_kind not in ("power", "custom"):
        raise ConfigError(f"unknown function kind {cfg.function_kind!r}")
    if cfg.function_kind == "custom":
        if not cfg.table_path:
            raise ConfigError("custom function needs a table path")
        if not Path(cfg.table_path).exists():
            raise ConfigError(f"table file {cfg.table_path!r} does not exist")
    if cfg.geometry_kind not in ("annulus", "dini_cap"):
        raise ConfigError(f"unknown geometry {cfg.geometry_kind!r}")
    if cfg.modulus_kind not in ("power", "logpower"):
        raise ConfigError(f"unknown modulus {cfg.modulus_kind!r}")
    if cfg.ring_side not in ("inner", "outer"):
        raise ConfigError(f"ring must be inner or outer, got {cfg.ring_side!r}")
    if any(b >= a for a, b in zip(cfg.delta_schedule, cfg.delta_schedule[1:])):
        raise ConfigError("delta schedule must decrease")


# --------------------------------------------------------------------------
# shared construction
# --------------------------------------------------------------------------

def _build_function(cfg: RunConfig) -> orlicz.OrliczFunction:
    if cfg.function_kind == "power":
        return orlicz.power(cfg.p, t_max=cfg.t_max or 1e6)
    header, rows = gridio.read_table(cfg.table_path)
    ts = np.array([float(r[0]) for r in rows])
    hs = np.array([float(r[1]) for r in rows])
    return orlicz.custom(table=(ts, hs), t_max=cfg.t_max)


def _build_modulus(cfg: RunConfig) -> geometry.DiniModulus:
    if cfg.modulus_kind == "power":
        return geometry.PowerModulus(cfg.modulus_a, t_cap=cfg.modulus_t_cap or 1.0)
    return geometry.LogPowerModulus(cfg.modulus_q, t_cap=cfg.modulus_t_cap or 0.5)


def _build_ring(cfg: RunConfig) -> geometry.ConvexRing:
    if cfg.geometry_kind == "annulus":
        return geometry.make_annulus(cfg.r1, cfg.r2, resolution=cfg.resolution,
                                     extent=cfg.extent)
    eps = _build_modulus(cfg)
    cap = geometry.build_dini_cap(cfg.r_d, eps)
    rings = geometry.make_rings(cap, cfg.r_d, resolution=cfg.resolution)
    return rings.inner_ring if cfg.ring_side == "inner" else rings.outer_ring


def _solve_options(cfg: RunConfig) -> solver.SolveOptions:
    return solver.SolveOptions(delta_schedule=cfg.delta_schedule, tol=cfg.tol,
                               max_iter=cfg.max_iter, linear_solver=cfg.linear_solver)


def _hopf_defaults(cfg: RunConfig):
    if cfg.geometry_kind == "annulus":
        point = cfg.hopf_point or (cfg.r2, 0.0)
        radii = cfg.hopf_radii or (0.2 * cfg.r2, 0.1 * cfg.r2, 0.05 * cfg.r2,
                                   0.025 * cfg.r2)
    else:
        point = cfg.hopf_point or (0.0, 0.0)
        radii = cfg.hopf_radii or (0.4 * cfg.r_d, 0.2 * cfg.r_d, 0.1 * cfg.r_d)
    return point, radii


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_check(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    of = _build_function(cfg)
    p_guess = cfg.p if cfg.function_kind == "power" else 2.0
    reports = orlicz.check_conditions(of, p_guess)
    coer = next(r for r in reports if r.condition_id == "Coercivity")
    c_lo = max(coer.constants.get("c", 0.5), 1e-6)
    c_hi = max(coer.constants.get("C", 2.0), 2 * c_lo)
    samples = [orlicz.WeightSample.constant(c_lo),
               orlicz.WeightSample.constant(c_hi),
               orlicz.WeightSample.ramp(c_lo, c_hi, (0.05, 5.0))]
    reports.append(orlicz.check_condition_R(of, samples, (0.05, 5.0)))

    eps = _build_modulus(cfg)
    dini = geometry.dini_report(eps, min(1.0, eps.t_cap))

    (out / "conditions.txt").write_text(
        f"seed {cfg.seed}\n" + "".join(r.to_text() for r in reports))
    (out / "dini_report.txt").write_text(dini.to_text())
    ok = all(r.passed for r in reports) and dini.converges and dini.convex_dini
    print(f"check: {'pass' if ok else 'FAIL'} "
          f"({sum(r.passed for r in reports)}/{len(reports)} conditions, "
          f"dini converges={dini.converges})")
    return 0 if ok else 2


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    of = _build_function(cfg)
    ring = _build_ring(cfg)
    opts = _solve_options(cfg)
    outer_data = 0.0 if cfg.ring_side == "inner" or cfg.geometry_kind == "annulus" \
        else 1.0
    inner_data = 1.0 - outer_data
    w = solver.solve_harmonic(ring, opts, inner_value=1.0, outer_value=0.0)
    u = solver.solve_h_potential(ring, of, opts, inner_value=inner_data,
                                 outer_value=outer_data)

    gridio.write_grid_file(out / "harmonic.grid", ring.grid, w.values, w.mask)
    gridio.write_grid_file(out / "potential.grid", ring.grid, u.values, u.mask)
    gridio.write_table(out / "convergence.csv",
                       ["iteration", "delta", "energy", "residual"],
                       [(i, d, e, r) for (i, d, e, r) in u.meta["log"]])
    gb = solver.gradient_bounds(w, ring)
    lines = ["solve report",
             ring.descriptor().rstrip(),
             f"harmonic_residual {w.meta['residual']!r}",
             f"potential_residual {u.meta['residual']!r}",
             f"potential_energy {u.meta['energy']!r}",
             f"converged {u.meta['converged']}",
             f"gradient_c {gb.c!r}",
             f"gradient_C {gb.C!r}",
             f"inner_value {u.meta['inner_value']!r}",
             f"outer_value {u.meta['outer_value']!r}",
             f"delta_final {u.meta['delta_final']!r}"]
    (out / "solve_report.txt").write_text("\n".join(lines) + "\n")
    print(f"solve: converged={u.meta['converged']} "
          f"residual={u.meta['residual']:.3e}")
    return 0 if u.meta["converged"] and w.meta["converged"] else 3


def _read_solved(out: Path, cfg: RunConfig, name: str,
                 ring: geometry.ConvexRing) -> solver.ScalarField:
    path = out / name
    if not path.exists():
        raise MissingArtifact(f"{path} not found; run solve first")
    grid, values, mask = gridio.read_grid_file(path)
    if (grid.nx, grid.ny) != (ring.grid.nx, ring.grid.ny):
        raise MissingArtifact(f"{path} was produced on a different grid")
    meta = {}
    rep = out / "solve_report.txt"
    if rep.exists():
        for line in rep.read_text().splitlines():
            parts = line.split()
            if len(parts) == 2 and parts[0] in ("inner_value", "outer_value",
                                                "delta_final"):
                meta[parts[0]] = float(parts[1])
            if parts[:1] == ["converged"]:
                meta["converged"] = parts[1] == "True"
    meta.setdefault("inner_value", 1.0)
    meta.setdefault("outer_value", 0.0)
    meta.setdefault("delta_final", cfg.delta_schedule[-1])
    meta["operator"] = name
    return solver.ScalarField(ring.grid, values, mask, ring, meta)


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    of = _build_function(cfg)
    ring = _build_ring(cfg)
    w = _read_solved(out, cfg, "harmonic.grid", ring)
    u = _read_solved(out, cfg, "potential.grid", ring)
    w.meta["inner_value"], w.meta["outer_value"] = 1.0, 0.0
    w.meta["delta_final"] = 0.0

    diag = solver.level_diagnostics(w)
    depth = ring.interior_depth()
    eligible = diag.cells & (depth >= 2)
    C_meas = float(np.max(diag.grad_norm[eligible]))

    if cfg.zeta_source == "modulus":
        gb = solver.gradient_bounds(w, ring)
        zeta = barrier_mod.zeta_from_modulus(_build_modulus(cfg), gb.c, gb.C, cfg.c_d)
    else:
        zeta = barrier_mod.zeta_from_field(w, diag=diag)

    alpha = 1.0 if cfg.alpha == "auto" else float(cfg.alpha)
    beta = C_meas if cfg.beta == "auto" else float(cfg.beta)
    outer_mode = cfg.geometry_kind == "dini_cap" and cfg.ring_side == "outer"
    if cfg.target != "min_inner_u":
        target = float(cfg.target)
    elif outer_mode:
        # super-solution barrier: its top value must dominate the outer data
        target = float(u.meta["outer_value"]) * (1 + 1e-5)
    else:
        target = float(u.meta["inner_value"])

    prof = barrier_mod.tune_m(of, zeta, alpha, beta, target)
    sub = barrier_mod.verify_subsolution(w, prof, of, zeta=zeta, diag=diag)
    point, radii = _hopf_defaults(cfg)
    hopf_rep = hopf.hopf_constant(u, point, radii)

    out.mkdir(parents=True, exist_ok=True)
    if outer_mode:
        cmp_rep = hopf.outer_lipschitz_check(u, ring, of, y=(0.0, 0.0),
                                             r_ref=cfg.r_d, barrier_profile=prof)
        (out / "lipschitz.txt").write_text(cmp_rep.to_text())
    else:
        v = barrier_mod.compose_barrier(w, prof)
        cmp_rep = hopf.comparison_check(u, v, of)
        (out / "comparison.txt").write_text(cmp_rep.to_text())
    (out / "barrier.csv").write_text(prof.to_table())
    (out / "zeta.txt").write_text(zeta.to_text())
    (out / "subsolution.txt").write_text(sub.to_text())
    (out / "hopf.txt").write_text(hopf_rep.to_text())
    gridio.write_table(out / "hopf_radii.csv", ["radius", "ratio"],
                       hopf_rep.table_rows())
    ok = sub.all_pass and cmp_rep.passed and hopf_rep.passed
    summary = [f"verify pass {ok}",
               f"subsolution {sub.all_pass}",
               f"comparison {cmp_rep.passed}",
               f"hopf {hopf_rep.passed}",
               f"alpha {alpha!r}", f"beta {beta!r}",
               f"f1 {prof.f1!r}", f"m {prof.m!r}",
               f"seed {cfg.seed}"]
    (out / "verify_summary.txt").write_text("\n".join(summary) + "\n")
    print(f"verify: {'pass' if ok else 'FAIL'} (subsolution={sub.all_pass} "
          f"comparison={cmp_rep.passed} hopf={hopf_rep.passed})")
    return 0 if ok else 2


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def main(argv=None) -> int:
    parser = _Parser(prog="hopflab",
                     description="H-potential laboratory pipelines")
    parser.add_argument("command", choices=["check", "solve", "verify"])
    parser.add_argument("--config", type=str, default=None)
    parser.add_argument("--out", type=str, required=True)
    parser.add_argument("--grid", type=int, default=None)
    parser.add_argument("--p", type=float, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config, grid_override=args.grid, p_override=args.p)
        out = Path(args.out)
        if args.command == "check":
            return cmd_check(cfg, out)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        return cmd_verify(cfg, out)
    except (ConfigError, MissingArtifact) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NotIntegrable as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    except HopflabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
