"""Command-line drivers.

Each subcommand writes ``<out>/<command>.json`` (pass/fail summary) and,
where it produces a table, ``<out>/<command>.csv``.  Exit codes: 0 when all
checks pass, 1 on a failed check or non-convergence, 2 on invalid
configuration or unreadable archive.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import groups
from .action import ActionParams
from .archive import read_archive, write_archive
from .checks import Check, action_suite, composer_suite, random_tangent
from .config import ExperimentConfig, load_config, with_overrides
from .errors import ArchiveError, ConfigError, DFMError, InputError
from .fields import (ActionTag, FieldBundle, LinkField, ScalarField, dc, gauge_act, gt,
                     random_bundle, random_group_field)
from .fpjacobian import (check_delta_shift, fp_logdet, fp_operator, gfm_differential_check,
                         polar_jacobian_su2, polar_jacobian_u1)
from .gaugefix import (Lorenz, RxiAbelian, RxiNonAbelian, Unitary, check_gfm_equivariance,
                       gfm_solve, locality_profile, loglog_slope, xi_sweep)
from .lattice import Lattice
from .variations import (GfDeformation, delta_psi, dressing_response, dressing_response_fd,
                         first_order_action_invariance, xi_from_v)

COMMANDS = ("check-composers", "check-action", "gaugefix", "check-equivariance", "xi-sweep",
            "fp-det", "jacobian", "locality", "variations")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


# ---------------------------------------------------------------------------
# Config -> objects
# ---------------------------------------------------------------------------

def make_spec(cfg: ExperimentConfig):
    if cfg.gauge == "lorenz":
        return Lorenz()
    if cfg.gauge == "unitary":
        return Unitary()
    if cfg.group == "U1":
        return RxiAbelian(cfg.xi, cfg.v, cfg.e)
    return RxiNonAbelian(cfg.xi, cfg.g)


def single_mode_bundle(lat: Lattice) -> FieldBundle:
    """Zero links and phase chi(x) = cos(2 pi x_0 / N_0) with unit modulus."""
    x0 = np.array([lat.coords(s)[0] for s in range(lat.n_sites)])
    chi = np.cos(2 * np.pi * x0 / lat.dims[0])
    return FieldBundle(LinkField.identity(lat, "U1"), ScalarField(lat, "U1-complex", np.exp(1j * chi)))


def make_bundle(cfg: ExperimentConfig, seed=None) -> FieldBundle:
    if cfg.input:
        return read_archive(cfg.input)
    lat = Lattice(cfg.dims)
    if cfg.single_mode and cfg.group == "U1":
        return single_mode_bundle(lat)
    return random_bundle(lat, cfg.group, cfg.seed if seed is None else seed, cfg.spread,
                         rep=cfg.rep, coupling=cfg.coupling)


def _seeds(cfg, k):
    return np.random.SeedSequence(cfg.seed).generate_state(cfg.n_configs * k, dtype=np.uint64) \
        .reshape(cfg.n_configs, k)


def _params(cfg):
    return ActionParams(cfg.beta, cfg.mu2, cfg.lam, cfg.coupling)


def _solve_kw(cfg):
    return {"max_iter": cfg.max_iter, "jacobian": cfg.jacobian}


# ---------------------------------------------------------------------------
# Subcommands: each returns (checks, header, rows, extra)
# ---------------------------------------------------------------------------

def cmd_check_composers(cfg):
    return composer_suite(Lattice(cfg.dims), cfg.group, cfg.seed, cfg.n_configs, cfg.spread), None, None, {}


def cmd_check_action(cfg):
    checks = action_suite(Lattice(cfg.dims), cfg.group, cfg.seed, cfg.n_configs, _params(cfg),
                          cfg.spread, cfg.rep)
    return checks, None, None, {}


def cmd_gaugefix(cfg, out: Path):
    b = make_bundle(cfg)
    u, rep = gfm_solve(make_spec(cfg), b, cfg.tol, **_solve_kw(cfg))
    write_archive(out / "dressed.dfm", dc(b, u))
    checks = [Check("converged", rep.residual, cfg.tol, rep.converged)]
    return checks, None, None, {"solve": asdict(rep)}


def cmd_check_equivariance(cfg):
    spec = make_spec(cfg)
    lat = Lattice(cfg.dims)
    worst, worst_dressed, conclusive = 0.0, 0.0, True
    for s in _seeds(cfg, 2):
        b = make_bundle(cfg, int(s[0]))
        gamma = random_group_field(lat, cfg.group, int(s[1]), cfg.spread)
        r = check_gfm_equivariance(spec, b, gamma, 10 * cfg.tol, cfg.tol, **_solve_kw(cfg))
        conclusive &= r.conclusive
        worst, worst_dressed = max(worst, r.distance), max(worst_dressed, r.dressed_distance)
    tol = 10 * cfg.tol
    return [Check("solves_converged", 0.0 if conclusive else 1.0, 0.0, conclusive),
            Check.at_most("gfm_equivariance", worst, tol),
            Check.at_most("dressed_invariance", worst_dressed, tol)], None, None, {}


def cmd_xi_sweep(cfg):
    b = make_bundle(cfg)
    spec = make_spec(cfg)
    if not isinstance(spec, (RxiAbelian, RxiNonAbelian)):
        raise ConfigError("xi-sweep needs gauge = rxi")
    rows = xi_sweep(spec, b, cfg.xis, cfg.tol, **_solve_kw(cfg))
    checks = [Check("all_converged", 0.0, 0.0, all(r.converged for r in rows))]
    header = ["xi", "mass", "distance", "converged"]
    table = [[r.xi, r.mass, r.distance, r.converged] for r in rows]
    if cfg.single_mode and cfg.group == "U1":
        k2 = 4 * np.sin(np.pi / b.lattice.dims[0]) ** 2
        header.append("predicted")
        for r, row in zip(rows, table):
            row.append(k2 / (k2 + r.mass))
        err = max(abs(row[2] - row[4]) for row in table)
        checks.append(Check.at_most("fourier_prediction", err, 1e-6))
    d = [r.distance for r in rows]
    extra = {"loglog_slope": loglog_slope(rows)} if len(rows) >= 2 else {}
    if cfg.single_mode and cfg.group == "U1" and len(rows) >= 2:
        checks.append(Check.at_most("loglog_slope_vs_minus_one", abs(extra["loglog_slope"] + 1), 0.05))
    else:
        checks.append(Check("monotone_decrease", 0.0, 0.0, all(a > b_ for a, b_ in zip(d, d[1:]))))
    if cfg.group == "SU2":
        checks.append(Check.at_most("final_distance", d[-1], 1e-3))
    return checks, header, table, extra


def cmd_fp_det(cfg):
    spec = make_spec(cfg)
    lat = Lattice(cfg.dims)
    header = ["config", "logdet_shifted", "logdet_dressed", "gap", "passed"]
    table, worst, conclusive = [], 0.0, True
    for i, s in enumerate(_seeds(cfg, 3)):
        b = make_bundle(cfg, int(s[0]))
        gamma = random_group_field(lat, cfg.group, int(s[1]), cfg.spread)
        u = random_group_field(lat, cfg.group, int(s[2]), cfg.spread, ActionTag.DRESSING)
        r = check_delta_shift(spec, b, gamma, u)
        conclusive &= r.conclusive
        worst = max(worst, r.gap if r.conclusive else np.inf)
        table.append([i, r.logdet_shifted, r.logdet_dressed, r.gap, r.passed])
    b = make_bundle(cfg)
    u, rep = gfm_solve(spec, b, cfg.tol, **_solve_kw(cfg))
    logdet, sign = fp_logdet(fp_operator(spec, b, u))
    checks = [Check("nonsingular", 0.0, 0.0, conclusive), Check.at_most("delta_shift_gap", worst, 1e-8)]
    return checks, header, table, {"logdet_at_gfm": logdet, "sign_at_gfm": sign, "solve": asdict(rep)}


def cmd_jacobian(cfg):
    b = make_bundle(cfg)
    header = ["chart", "logdet_numeric", "logdet_predicted", "relative_error"]
    table, checks = [], []
    if b.kind == "U1":
        for chart in ("rho", "sigma"):
            r = polar_jacobian_u1(b, chart)
            table.append([chart, r.logdet_numeric, r.logdet_predicted, r.relative_error])
            checks.append(Check.at_most(f"u1_{chart}_relative_error", r.relative_error, 1e-6))
    else:
        base = ScalarField(b.lattice, "SU2-doublet", b.scalar.doublet() / b.scalar.norm()[:, None])
        unit = FieldBundle(b.links, base)
        for chart in ("rho", "sigma"):
            r, r1 = polar_jacobian_su2(b, chart), polar_jacobian_su2(unit, chart)
            ratio = np.exp(r.logdet_numeric - r1.logdet_numeric)
            predicted = np.exp(r.logdet_predicted - r1.logdet_predicted)
            err = abs(ratio / predicted - 1)
            table.append([chart, r.logdet_numeric, r.logdet_predicted, err])
            checks.append(Check.at_most(f"su2_{chart}_ratio_error", err, 1e-5))
    return checks, header, table, {}


def cmd_locality(cfg):
    b = make_bundle(cfg)
    spec = make_spec(cfg)
    prof = locality_profile(spec, b, cfg.site, cfg.eps, cfg.tol, **_solve_kw(cfg))
    header = ["perturbation", "distance", "max_du"]
    table = [["scalar", int(d), v] for d, v in prof.scalar] + [["link", int(d), v] for d, v in prof.links]
    checks = [Check("solves_converged", 0.0, 0.0, prof.conclusive)]
    far_scalar = float(np.max(prof.scalar[1:, 1], initial=0.0))
    if isinstance(spec, Unitary):
        checks.append(Check.at_most("scalar_response_beyond_site", far_scalar, 1e-12))
        checks.append(Check.at_most("link_response", float(np.max(prof.links[:, 1])), 1e-12))
    else:
        near = float(prof.scalar[1, 1]) if len(prof.scalar) > 1 else 0.0
        checks.append(Check("response_at_distance_1", near, 100 * cfg.tol, near > 100 * cfg.tol))
    return checks, header, table, {}


def cmd_variations(cfg):
    spec = make_spec(cfg)
    if not isinstance(spec, (RxiAbelian, RxiNonAbelian)):
        raise ConfigError("variations needs gauge = rxi")
    lat = Lattice(cfg.dims)
    d = groups.algebra_dim(cfg.group)
    worst = {"delta_psi_routes": 0.0, "action_first_order": 0.0, "dressing_response_vs_fd": 0.0,
             "xi_psi_only": 0.0, "gfm_differential": 0.0}
    ok_first = ok_diff = True
    for s in _seeds(cfg, 4):
        b = make_bundle(cfg, int(s[0]))
        rng = np.random.default_rng(int(s[1]))
        xi = rng.normal(size=(lat.n_sites, d))
        u = random_group_field(lat, cfg.group, int(s[2]), cfg.spread, ActionTag.DRESSING)
        worst["delta_psi_routes"] = max(worst["delta_psi_routes"], *delta_psi(b, u, xi).deviations.values())
        inv = first_order_action_invariance(b, u, xi, _params(cfg))
        ok_first &= inv.passed
        worst["action_first_order"] = max(worst["action_first_order"], abs(inv.variation) / (1 + abs(inv.action)))
        deform = GfDeformation(spec, rng.normal(size=(lat.n_sites, d)))
        resp, ug = dressing_response(deform, b, **_solve_kw(cfg))
        fd = dressing_response_fd(deform, b, **_solve_kw(cfg))
        worst["dressing_response_vs_fd"] = max(worst["dressing_response_vs_fd"], float(np.max(np.abs(resp - fd))))
        gamma = random_group_field(lat, cfg.group, int(s[3]), cfg.spread)
        xi1 = xi_from_v(spec, dc(b, ug), deform.direction)
        xi2 = xi_from_v(spec, dc(gt(b, gamma), gauge_act(ug, gamma)), deform.direction)
        worst["xi_psi_only"] = max(worst["xi_psi_only"], float(np.max(np.abs(xi1 - xi2))))
        diff = gfm_differential_check(spec, b, random_tangent(b, int(s[3])), **_solve_kw(cfg))
        ok_diff &= diff.passed
        worst["gfm_differential"] = max(worst["gfm_differential"], diff.deviation)
    checks = [Check.at_most("delta_psi_routes", worst["delta_psi_routes"], 1e-8),
              Check("action_first_order", worst["action_first_order"], 1e-8, ok_first),
              Check.at_most("dressing_response_vs_fd", worst["dressing_response_vs_fd"], 1e-4),
              Check.at_most("xi_psi_only", worst["xi_psi_only"], 1e-8),
              Check("gfm_differential", worst["gfm_differential"], 1e-4, ok_diff)]
    return checks, None, None, {}


HANDLERS = {
    "check-composers": cmd_check_composers, "check-action": cmd_check_action,
    "gaugefix": cmd_gaugefix, "check-equivariance": cmd_check_equivariance,
    "xi-sweep": cmd_xi_sweep, "fp-det": cmd_fp_det, "jacobian": cmd_jacobian,
    "locality": cmd_locality, "variations": cmd_variations,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else fmt(x)
    return x


def run(command: str, cfg: ExperimentConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    handler = HANDLERS[command]
    result = handler(cfg, out) if command == "gaugefix" else handler(cfg)
    checks, header, table, extra = result
    if table is not None:
        with open(out / f"{command.replace('-', '_')}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in table:
                w.writerow([fmt(x) for x in row])
    passed = all(c.passed for c in checks)
    summary = {"command": command, "passed": passed,
               "checks": [{"name": c.name, "value": c.value, "tol": c.tol, "passed": c.passed} for c in checks],
               **extra}
    (out / f"{command.replace('-', '_')}.json").write_text(json.dumps(_jsonable(summary), indent=2) + "\n")
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {fmt(c.value)} (tol {fmt(c.tol)})")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dfmlab", description="Dressing-field-method lattice checks")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--seed", type=int, help="u64 seed (overrides config)")
    p.add_argument("--tol", type=float, help="solver tolerance (overrides config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = with_overrides(cfg, seed=args.seed, solver_tol=args.tol, out=args.out)
        return run(args.command, cfg, Path(cfg.out))
    except (ConfigError, ArchiveError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DFMError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
