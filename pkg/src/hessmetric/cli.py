"""Command-line interface.

Subcommands: `scenario list`, `verify`, `experiment {concentration,
diameter, bishop-gromov, estimates, poincare}`, `report`.  Exit codes:
0 on success, 1 when a mathematical check fails, 2 on configuration or
usage errors.  Every stochastic command requires --seed; deterministic
commands refuse one.  Reports embed the scenario descriptor, seed,
tolerances, and artifact version; identical configurations produce
byte-identical JSON/CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import figures
from . import integrals as it
from . import metric_space as ms
from .errors import HessMetricError, ConfigError, SeedRequired
from .fields import bump_field, coordinate_field, default_1d_fields, half_square_field
from .geometry import (metric_frame, min_eig_sym, modified_tensor, ricci,
                       riemann, weight_tensors)
from .reporting import ARTIFACT_VERSION, write_csv, write_json
from .scenarios import (CATALOG, Scenario, catalog_scenario,
                        scenario_from_descriptor, target_composites)
from .suite import run_verify_suite

_VALUE_FLAGS = {"--grid", "--x", "--x0", "--r-grid", "--h-grid", "--dims",
                "--D-sweep", "--sigma", "--offsets"}


def _mend_argv(argv: list[str]) -> list[str]:
    """Let value flags accept tokens that start with a minus (e.g. -4:4:33)."""
    out = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def parse_grid(spec: str) -> np.ndarray:
    """Inclusive grid spec lo:hi:count."""
    m = re.fullmatch(r"(-?[\d.eE+-]+):(-?[\d.eE+-]+):(\d+)", spec.strip())
    if not m:
        raise ConfigError(f"grid spec must be lo:hi:count, got {spec!r}")
    lo, hi, count = float(m.group(1)), float(m.group(2)), int(m.group(3))
    if count < 2 or hi <= lo:
        raise ConfigError("grid needs hi > lo and count >= 2")
    return np.linspace(lo, hi, count)


def _parse_floats(spec: str) -> list[float]:
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def resolve_scenario(args) -> Scenario:
    if getattr(args, "scenario_file", None):
        desc = json.loads(Path(args.scenario_file).read_text())
        return scenario_from_descriptor(desc)
    name = args.scenario
    if name is None:
        raise ConfigError("provide --scenario or --scenario-file")
    if name in CATALOG and not _has_kind_flags(args):
        return catalog_scenario(name)
    aliases = {"radial": "radial_gaussian_to_ball"}
    kind = aliases.get(name, name)
    desc: dict = {"kind": kind, "params": {}}
    if getattr(args, "dim", None):
        desc["dim"] = args.dim
    if getattr(args, "D", None) is not None:
        desc["params"]["D"] = args.D
    if getattr(args, "sigma", None) is not None:
        desc["params"]["sigma"] = _parse_floats(args.sigma)
    if name in CATALOG:
        base = dict(CATALOG[name])
        base_params = dict(base.get("params", {}))
        base_params.update(desc["params"])
        base["params"] = base_params
        if "dim" in desc:
            base["dim"] = desc["dim"]
        return scenario_from_descriptor(base)
    return scenario_from_descriptor(desc)


def _has_kind_flags(args) -> bool:
    return any(getattr(args, k, None) is not None for k in ("dim", "D", "sigma"))


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_").lower()


def _grid_points(scenario: Scenario, grid_spec: str) -> list[np.ndarray]:
    axis = parse_grid(grid_spec)
    if scenario.dim == 1:
        return [np.array([t]) for t in axis]
    per_axis = axis if axis.size <= 7 else np.linspace(axis[0], axis[-1], 7)
    mesh = np.stack(np.meshgrid(*([per_axis] * scenario.dim), indexing="ij"), -1)
    pts = mesh.reshape(-1, scenario.dim)
    stride = max(1, len(pts) // 60)
    return [p for p in pts[::stride]]


# ---------------------------------------------------------------------------
# commands


def cmd_scenario(args) -> int:
    listing = []
    for name, desc in CATALOG.items():
        listing.append({"name": name, "descriptor": desc})
    if args.json:
        print(json.dumps(listing, indent=2, sort_keys=True))
    else:
        for row in listing:
            print(f"{row['name']:28s} {json.dumps(row['descriptor'], sort_keys=True)}")
    return 0


def cmd_verify(args) -> int:
    scenario = resolve_scenario(args)
    pts = _grid_points(scenario, args.grid)
    report = run_verify_suite(scenario, pts, k_lower=args.K, n_param=args.N)
    out = Path(args.out)
    slug = _slug(scenario.label())
    write_json(out / f"verify_{slug}.json", report)
    rows = [(r["name"], r["worst"], r["tolerance"], int(r["pass"]))
            for r in report["checks"]]
    write_csv(out / f"verify_{slug}.csv",
              ["check", "worst", "tolerance", "pass"], rows)
    for r in report["checks"]:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"{status}  {r['name']:38s} worst={r['worst']:.3e} "
              f"tol={r['tolerance']:.0e} (n={r['count']})")
    print(f"verify: {'all checks passed' if report['all_pass'] else 'FAILURES'}"
          f" [{scenario.label()}]")
    return 0 if report["all_pass"] else 1


def _halfspaces(scenario: Scenario, count: int) -> list[tuple[np.ndarray, float]]:
    d = scenario.dim
    normals = [np.eye(d)[0], np.ones(d) / math.sqrt(d), np.eye(d)[d - 1]]
    offsets = [0.0, 0.25, 0.5]
    out = []
    for i in range(count):
        out.append((normals[i % len(normals)], offsets[i % len(offsets)]))
    return out


def cmd_concentration(args) -> int:
    scenario = resolve_scenario(args)
    h_grid = parse_grid(args.h_grid)
    reports = []
    rows = []
    ok = True
    for i, (u, c) in enumerate(_halfspaces(scenario, args.halfspaces)):
        rep = ms.concentration_profile(scenario, u, c, h_grid,
                                       args.samples, args.seed + i)
        reports.append(rep)
        ok = ok and rep.dominates
        for h, e, b in zip(rep.h_grid, rep.empirical_mass, rep.paper_bound):
            rows.append((i, h, e, b))
    out = Path(args.out)
    slug = _slug(scenario.label())
    write_json(out / f"concentration_{slug}.json",
               {"artifact_version": ARTIFACT_VERSION, "seed": args.seed,
                "samples": args.samples,
                "halfspaces": [r.to_json_dict() for r in reports],
                "all_dominate": ok})
    write_csv(out / f"concentration_{slug}.csv",
              ["halfspace", "h", "empirical", "bound"], rows)
    figures.concentration_figure(reports, out / f"concentration_{slug}.png")
    print(f"concentration: {'dominates everywhere' if ok else 'VIOLATION'}"
          f" [{scenario.label()}, {args.halfspaces} half-spaces]")
    return 0 if ok else 1


def cmd_diameter(args) -> int:
    dims = [int(v) for v in _parse_floats(args.dims)]
    rep = ms.diameter_experiment(dims, args.D, args.samples, args.seed,
                                 family=args.family)
    out = Path(args.out)
    write_json(out / f"diameter_{args.family}.json",
               {"artifact_version": ARTIFACT_VERSION, **rep.to_json_dict()})
    write_csv(out / f"diameter_{args.family}.csv", ["d", "estimate"],
              list(zip(rep.dims, rep.estimates)))
    figures.diameter_figure(rep, out / f"diameter_{args.family}.png")
    d_ok = 0.15 <= rep.d_exponent <= 0.35
    diam_ok = 0.45 <= rep.diameter_exponent <= 0.55
    print(f"diameter: d-exponent={rep.d_exponent:.4f} "
          f"({'in' if d_ok else 'OUTSIDE'} [0.15,0.35]), "
          f"D-exponent={rep.diameter_exponent:.4f} "
          f"({'in' if diam_ok else 'OUTSIDE'} [0.45,0.55]), "
          f"exact 1D diameter={rep.exact_1d:.6f}")
    return 0 if (d_ok and diam_ok) else 1


def cmd_bishop_gromov(args) -> int:
    scenario = resolve_scenario(args)
    r_grid = parse_grid(args.r_grid)
    x0 = np.zeros(scenario.dim) if args.x0 is None \
        else np.array(_parse_floats(args.x0))
    profile = ms.bishop_gromov_profile(scenario, x0, r_grid)
    vals = [v for _, v in profile]
    worst = max(max(np.diff(vals)), 0.0) if len(vals) > 1 else 0.0
    ok = worst <= 1e-8
    out = Path(args.out)
    slug = _slug(scenario.label())
    write_json(out / f"bishop_gromov_{slug}.json",
               {"artifact_version": ARTIFACT_VERSION,
                "scenario": scenario.descriptor(),
                "x0": [float(v) for v in x0],
                "profile": [[r, v] for r, v in profile],
                "worst_increase": float(worst), "monotone": ok})
    write_csv(out / f"bishop_gromov_{slug}.csv", ["r", "profile"], profile)
    figures.bishop_gromov_figure(profile, out / f"bishop_gromov_{slug}.png")
    print(f"bishop-gromov: worst increase {worst:.3e} "
          f"({'monotone' if ok else 'VIOLATION'}) [{scenario.label()}]")
    return 0 if ok else 1


def cmd_estimates(args) -> int:
    d_values = _parse_floats(args.d_sweep)
    rows = []
    reports = []
    ok = True
    for d_val in d_values:
        scenario = ms.GaussianToUniform1D(d_val) if args.scenario is None \
            else resolve_scenario(_override_d(args, d_val))
        batch = [it.lm_check(scenario), it.variance_estimate(scenario),
                 it.vw_check(scenario)]
        for p in (0.5, 1.0, 2.0, 3.0, 4.0):
            batch.append(it.reverse_holder(scenario, p))
        for f_spec in (it.F_ONE, it.F_ID, it.F_SQUARE):
            batch.append(it.theorem61_check(scenario, f_spec))
        for rep in batch:
            ok = ok and rep.passed
            rows.append((d_val, rep.name, rep.lhs, rep.rhs, rep.slack))
            reports.append({"D": d_val, **rep.to_json_dict()})
    out = Path(args.out)
    write_json(out / "estimates.json",
               {"artifact_version": ARTIFACT_VERSION, "reports": reports,
                "all_pass": ok})
    write_csv(out / "estimates.csv", ["D", "name", "lhs", "rhs", "slack"], rows)
    figures.estimates_figure(rows, out / "estimates.png")
    print(f"estimates: {'all inequalities hold' if ok else 'FAILURES'} "
          f"across D={d_values}")
    return 0 if ok else 1


def _override_d(args, d_val):
    class _Shim:
        pass

    shim = _Shim()
    for k in ("scenario", "scenario_file", "dim", "sigma"):
        setattr(shim, k, getattr(args, k, None))
    shim.D = d_val
    return shim


def cmd_poincare(args) -> int:
    d_values = _parse_floats(args.d_sweep)
    fields = [bump_field([0.0], 1.5), bump_field([0.5], 2.0),
              bump_field([-0.8], 1.2)]
    rows = []
    consts = []
    ok = True
    for d_val in d_values:
        scenario = ms.GaussianToUniform1D(d_val)
        rep = it.poincare_rayleigh(scenario, fields)
        ok = ok and rep.passed
        c_emp = rep.extras["empirical_constant"]
        consts.append(c_emp)
        rows.append((d_val, rep.lhs, c_emp))
    spread = (max(consts) - min(consts)) / max(consts) if consts else 0.0
    stable = spread <= 0.2
    out = Path(args.out)
    write_json(out / "poincare.json",
               {"artifact_version": ARTIFACT_VERSION,
                "rows": [{"D": d, "min_quotient": q, "empirical_constant": c}
                         for (d, q, c) in rows],
                "constant_spread": spread, "stable": stable,
                "all_positive": ok})
    write_csv(out / "poincare.csv", ["D", "min_quotient", "empirical_constant"],
              rows)
    figures.poincare_figure(rows, out / "poincare.png")
    print(f"poincare: min quotients positive={ok}, "
          f"constant spread across D = {spread:.3f} "
          f"({'stable' if stable else 'UNSTABLE'})")
    return 0 if (ok and stable) else 1


def cmd_report(args) -> int:
    scenario = resolve_scenario(args)
    x = np.array(_parse_floats(args.x))
    if x.shape != (scenario.dim,):
        raise ConfigError(f"point {args.x!r} has wrong dimension for "
                          f"{scenario.label()}")
    n_param = args.N if args.N is not None else 2.0 * scenario.dim
    payload: dict = {"artifact_version": ARTIFACT_VERSION,
                     "scenario": scenario.descriptor(),
                     "point": [float(v) for v in x], "N": n_param}
    tensors: dict = {}
    order = scenario.max_jet_order
    pj = scenario.phi_jet(x, min(3, order))
    frame = metric_frame(pj)
    payload["metric"] = frame.g.tolist()
    payload["metric_inverse"] = frame.g_inv.tolist()
    tensors["g"] = frame.g
    if order >= 3:
        vj = scenario.source_jet(x, 2)
        comps = target_composites(scenario, x, order=2, mode="direct")
        wt = weight_tensors(frame, pj, vj, comps)
        ric = ricci(frame, pj, route="contraction")
        modified = wt.modified(n_param)
        payload["christoffel"] = frame.christoffel.tolist()
        payload["riemann_max_abs"] = float(np.max(np.abs(riemann(frame, pj))))
        payload["ricci"] = ric.tolist()
        payload["bakry_emery"] = wt.be.tolist()
        payload["bakry_emery_min_eig"] = min_eig_sym(wt.be)
        payload["modified_tensor"] = modified.tolist()
        payload["modified_min_eig"] = min_eig_sym(modified)
        tensors.update({"Ric": ric, "BE": wt.be, f"R_N(N={n_param:g})": modified})
        from .diffusion import gamma2
        field = (coordinate_field(1) if scenario.dim == 1
                 else half_square_field(scenario.dim))
        payload["gamma2_field"] = field.name
        payload["gamma2"] = gamma2(field, scenario, x, "bochner")
    if order >= 4:
        from .calabi import CalabiFrame
        cf = CalabiFrame(frame, scenario.phi_jet(x, 4))
        payload["calabi"] = {"s": cf.s, "quartic": cf.quartic,
                             "fourth_sq": cf.fourth_sq, "term_iii": cf.term_iii}
    out = Path(args.out)
    slug = _slug(scenario.label())
    write_json(out / f"report_{slug}.json", payload)
    rows = []
    for name, mat in tensors.items():
        mat = np.atleast_2d(mat)
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                rows.append((name, i, j, float(mat[i, j])))
    write_csv(out / f"report_{slug}.csv", ["tensor", "i", "j", "value"], rows)
    figures.point_report_figure(scenario, x, tensors,
                                out / f"report_{slug}.png")
    print(json.dumps({k: payload[k] for k in payload
                      if k not in ("scenario",)}, indent=2, sort_keys=True,
                     default=str))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="catalog name or scenario kind")
    p.add_argument("--scenario-file", help="path to a JSON scenario descriptor")
    p.add_argument("--dim", type=int, help="dimension (kind-dependent)")
    p.add_argument("--D", type=float, help="target support diameter")
    p.add_argument("--sigma", help="per-axis scales, comma separated")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hessmetric",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p_sc = sub.add_parser("scenario", help="catalog inspection")
    p_sc.add_argument("action", choices=["list"])
    p_sc.add_argument("--json", action="store_true")
    p_sc.set_defaults(fn=cmd_scenario)

    p_v = sub.add_parser("verify", help="run the deterministic check suite")
    _add_scenario_flags(p_v)
    p_v.add_argument("--grid", default="-4:4:33", help="point grid lo:hi:count")
    p_v.add_argument("--K", type=float, default=0.0, help="CD(K,N) lower bound")
    p_v.add_argument("--N", type=float, default=None,
                     help="CD dimension parameter (default 2d)")
    p_v.add_argument("--out", default="out", help="output directory")
    p_v.set_defaults(fn=cmd_verify)

    p_e = sub.add_parser("experiment", help="stochastic and sweep experiments")
    esub = p_e.add_subparsers(dest="experiment", required=True)

    p_c = esub.add_parser("concentration")
    _add_scenario_flags(p_c)
    p_c.add_argument("--seed", type=int, required=True)
    p_c.add_argument("--samples", type=int, default=100_000)
    p_c.add_argument("--halfspaces", type=int, default=3)
    p_c.add_argument("--h-grid", default="0.05:2.0:16")
    p_c.add_argument("--out", default="out")
    p_c.set_defaults(fn=cmd_concentration)

    p_d = esub.add_parser("diameter")
    p_d.add_argument("--dims", default="1,2,4,8,16")
    p_d.add_argument("--D", type=float, default=1.0)
    p_d.add_argument("--samples", type=int, default=100_000)
    p_d.add_argument("--seed", type=int, required=True)
    p_d.add_argument("--family", choices=["radial", "product"],
                     default="radial")
    p_d.add_argument("--out", default="out")
    p_d.set_defaults(fn=cmd_diameter)

    p_b = esub.add_parser("bishop-gromov")
    _add_scenario_flags(p_b)
    p_b.add_argument("--x0", help="center point, comma separated")
    p_b.add_argument("--r-grid", default="0.1:2.2:32")
    p_b.add_argument("--out", default="out")
    p_b.set_defaults(fn=cmd_bishop_gromov)

    p_i = esub.add_parser("estimates")
    _add_scenario_flags(p_i)
    p_i.add_argument("--D-sweep", dest="d_sweep", default="0.5,1,2")
    p_i.add_argument("--out", default="out")
    p_i.set_defaults(fn=cmd_estimates)

    p_p = esub.add_parser("poincare")
    p_p.add_argument("--D-sweep", dest="d_sweep", default="1,2,4")
    p_p.add_argument("--out", default="out")
    p_p.set_defaults(fn=cmd_poincare)

    p_r = sub.add_parser("report", help="pointwise tensor report")
    _add_scenario_flags(p_r)
    p_r.add_argument("--x", required=True, help="point, comma separated")
    p_r.add_argument("--N", type=float, default=None)
    p_r.add_argument("--out", default="out")
    p_r.set_defaults(fn=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_mend_argv(argv))
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ConfigError, SeedRequired, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HessMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
