"""The deterministic verification suite behind `verify`.

Runs every pointwise identity and bound the scenario's jet order supports,
at pinned tolerances, and aggregates one named check per property.  All
checks are pure functions of the scenario and the grid; there is no
randomness anywhere in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calabi as cb
from . import diffusion as df
from . import metric_space as ms
from .fields import bump_field, default_1d_fields
from .geometry import (bakry_emery, hess_m, metric_frame, min_eig_sym,
                       p_weight_jet, ricci, riemann, verify_bounds)
from .jets import symmetry_defect
from .reporting import ARTIFACT_VERSION
from .scenarios import (Scenario, legendre_dual_jets, ma1807_residual,
                        ma_residual, target_composites)

TOLERANCES = {
    "monge_ampere_residual": 1e-12,
    "differentiated_identity": 1e-10,
    "composite_mode_agreement": 1e-9,
    "legendre_involution": 1e-10,
    "riemann_symmetries": 1e-10,
    "ricci_route_agreement": 1e-10,
    "ricci_first_term_nonneg": 1e-12,
    "weighted_ricci_route_agreement": 1e-10,
    "hessian_variant_agreement": 1e-9,
    "weighted_ricci_nonneg": 1e-10,
    "pointwise_bounds": 1e-10,
    "diffusion_equation": 1e-11,
    "operator_route_agreement": 1e-9,
    "gamma2_closed_agreement": 1e-9,
    "gamma2_fd_agreement": 1e-4,
    "gamma2_nonneg": 1e-9,
    "gamma_form_nonneg": 1e-14,
    "integration_by_parts": 1e-6,
    "calabi_scalars_nonneg": 1e-12,
    "calabi_positivity": 1e-9,
    "calabi_trace_estimate": 1e-10,
    "calabi_decomposition_fd": 1e-4,
    "component_identities_fd": 1e-4,
    "distance_chain_first": 1e-9,
    "distance_chain_second": 1e-12,
}


@dataclass
class CheckResult:
    name: str
    worst: float
    tolerance: float
    passed: bool
    count: int
    note: str = ""

    def to_json_dict(self) -> dict:
        return {"name": self.name, "worst": self.worst,
                "tolerance": self.tolerance, "pass": self.passed,
                "count": self.count, "note": self.note}


def _max_abs(values) -> float:
    return float(max((abs(v) for v in values), default=0.0))


def _rel(a: float, b: float) -> float:
    """Difference measured relative to the pair's own scale (floored at 1)."""
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _rel_arr(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def run_verify_suite(scenario: Scenario, grid, k_lower: float = 0.0,
                     n_param: float | None = None,
                     gamma2_stride: int = 4) -> dict:
    """All deterministic checks on a point grid; returns the JSON-ready report."""
    pts = [np.atleast_1d(np.asarray(x, dtype=float)) for x in grid]
    results: list[CheckResult] = []
    tol = TOLERANCES
    order = scenario.max_jet_order

    def add(name: str, worst: float, count: int, note: str = "",
            tolerance: float | None = None):
        t = tol[name] if tolerance is None else tolerance
        results.append(CheckResult(name=name, worst=worst, tolerance=t,
                                   passed=bool(worst <= t), count=count,
                                   note=note))

    # the defining equation and its first differentiation
    add("monge_ampere_residual",
        _max_abs(ma_residual(scenario, x) for x in pts), len(pts))
    if order >= 3:
        add("differentiated_identity",
            _max_abs(float(np.max(np.abs(ma1807_residual(scenario, x))))
                     for x in pts), len(pts))
        comp_worst = 0.0
        n_comp = 0
        for x in pts[:: max(1, len(pts) // 8)]:
            g = np.atleast_2d(scenario.phi_jet(x, 2).d2)
            if float(np.linalg.eigvalsh(g)[0]) < 1e-2:
                continue  # index raising too ill-conditioned for 1e-9 agreement
            k = min(3, order - 2)
            c_dir = target_composites(scenario, x, order=k, mode="direct")
            c_der = target_composites(scenario, x, order=k, mode="derived")
            comp_worst = max(comp_worst, _rel_arr(c_dir.w1, c_der.w1))
            if c_dir.w2 is not None:
                comp_worst = max(comp_worst, _rel_arr(c_dir.w2, c_der.w2))
            if c_dir.w3 is not None:
                comp_worst = max(comp_worst, _rel_arr(c_dir.w3, c_der.w3))
            n_comp += 1
        add("composite_mode_agreement", comp_worst, n_comp,
            note="relative; points with well-conditioned metric")

        invol_worst = 0.0
        for x in pts[:: max(1, len(pts) // 8)]:
            jet = scenario.phi_jet(x, min(4, order))
            back = legendre_dual_jets(legendre_dual_jets(jet))
            invol_worst = max(
                invol_worst, abs(back.d0 - jet.d0),
                float(np.max(np.abs(back.d1 - jet.d1))),
                float(np.max(np.abs(back.d2 - jet.d2))),
                float(np.max(np.abs(back.d3 - jet.d3))))
        add("legendre_involution", invol_worst, len(pts[:: max(1, len(pts) // 8)]))

    # curvature identities
    if order >= 3:
        sym_worst = route_worst = be_worst = hess_worst = 0.0
        first_term_min = math.inf
        be_min = math.inf
        rng_dirs = np.linspace(0.0, 1.0, 7)
        for x in pts:
            pj = scenario.phi_jet(x, 3)
            vj = scenario.source_jet(x, 2)
            comps = target_composites(scenario, x, order=2, mode="direct")
            fr = metric_frame(pj)
            riem = riemann(fr, pj)
            d = scenario.dim
            sym_worst = max(
                sym_worst,
                float(np.max(np.abs(riem + np.transpose(riem, (1, 0, 2, 3))))),
                float(np.max(np.abs(riem + np.transpose(riem, (0, 1, 3, 2))))),
                float(np.max(np.abs(riem - np.transpose(riem, (2, 3, 0, 1))))))
            ric_a = ricci(fr, pj, route="contraction")
            ric_b = ricci(fr, pj, vj, comps, route="coordinate")
            route_worst = max(route_worst, float(np.max(np.abs(ric_a - ric_b))))
            be_a = bakry_emery(fr, pj, vj, comps, route="coordinate")
            be_b = bakry_emery(fr, pj, vj, comps, route="geometric")
            be_worst = max(be_worst, float(np.max(np.abs(be_a - be_b))))
            be_min = min(be_min, min_eig_sym(be_a))
            p3 = pj.d3
            quad_term = 0.25 * np.einsum("jl,ms,mil,sjk->ik",
                                         fr.g_inv, fr.g_inv, p3, p3)
            for t in rng_dirs:
                xi = np.cos(t) * np.eye(d)[0] + np.sin(t) * np.eye(d)[d - 1]
                first_term_min = min(first_term_min,
                                     float(xi @ quad_term @ xi))
            p_jet = p_weight_jet(fr, pj, vj, comps)
            h_c = hess_m(p_jet, fr, "coordinate")
            h_s = hess_m(p_jet, fr, "symmetric", phi_jet=pj)
            hess_worst = max(hess_worst, float(np.max(np.abs(h_c - h_s))))
        add("riemann_symmetries", sym_worst, len(pts))
        add("ricci_route_agreement", route_worst, len(pts))
        add("ricci_first_term_nonneg", -first_term_min, len(pts))
        add("weighted_ricci_route_agreement", be_worst, len(pts))
        add("hessian_variant_agreement", hess_worst, len(pts))
        if scenario.v_convex and scenario.w_convex:
            add("weighted_ricci_nonneg", -be_min, len(pts),
                note="min eigenvalue across grid")
        rep = verify_bounds(scenario, pts, k_lower=k_lower, n_param=n_param)
        worst_slack = min(r["slack"] for r in rep.records)
        add("pointwise_bounds", -worst_slack, len(pts),
            note=f"K={k_lower}, N={rep.n_param}, cd_enforced="
                 f"{rep.records[0]['cd_enforced']}")
        bounds_report = rep
    else:
        bounds_report = None

    # diffusion checks
    if order >= 3:
        diff_worst = 0.0
        for x in pts:
            for axis in range(scenario.dim):
                e = np.zeros(scenario.dim)
                e[axis] = 1.0
                diff_worst = max(diff_worst,
                                 abs(df.ma_diffusion_check(scenario, x, e)))
        add("diffusion_equation", diff_worst, len(pts) * scenario.dim)

        sub = pts[::gamma2_stride] or pts[:1]
        if scenario.dim == 1:
            fields = default_1d_fields()
        else:
            from .fields import coordinate_field, half_square_field
            fields = [coordinate_field(scenario.dim, 0),
                      half_square_field(scenario.dim),
                      bump_field(np.zeros(scenario.dim), 2.0)]
        op_worst = closed_worst = fd_worst = 0.0
        g2_min = math.inf
        gamma_min = math.inf
        for x in sub:
            pj = scenario.phi_jet(x, 3)
            vj = scenario.source_jet(x, 2)
            comps = target_composites(scenario, x, order=2, mode="direct")
            fr = metric_frame(pj)
            for f in fields:
                fj = f.jet(x)
                op_worst = max(op_worst, abs(
                    df.apply_l(fj, fr, comps)
                    - df.apply_l_geometric(fj, fr, pj, vj, comps)))
                gamma_min = min(gamma_min, df.gamma_phi(fj, fr))
                g_b = df.gamma2(f, scenario, x, "bochner")
                g2_min = min(g2_min, g_b)
                if scenario.dim == 1:
                    closed_worst = max(closed_worst, _rel(
                        g_b, df.gamma2(f, scenario, x, "closed_1d")))
                fd_worst = max(fd_worst, _rel(
                    g_b, df.gamma2(f, scenario, x, "direct_fd")))
        add("operator_route_agreement", op_worst, len(sub) * len(fields))
        if scenario.dim == 1:
            add("gamma2_closed_agreement", closed_worst, len(sub) * len(fields))
        add("gamma2_fd_agreement", fd_worst, len(sub) * len(fields))
        add("gamma_form_nonneg", -gamma_min, len(sub) * len(fields))
        if scenario.v_convex and scenario.w_convex:
            add("gamma2_nonneg", -g2_min, len(sub) * len(fields))

        if scenario.dim == 1:
            pairs = [(bump_field([0.0], 1.0), bump_field([0.0], 1.0)),
                     (bump_field([-0.5], 1.2), bump_field([0.4], 0.9))]
            ibp_worst = 0.0
            for f, h in pairs:
                lhs, rhs_f, rhs_h = df.ibp_check(f, h, scenario)
                ibp_worst = max(ibp_worst, abs(lhs - rhs_f), abs(lhs - rhs_h),
                                abs(rhs_f - rhs_h))
            add("integration_by_parts", ibp_worst, len(pairs))

    # fourth-order machinery
    if order >= 4:
        s_min = math.inf
        pos_worst = trace_worst = -math.inf
        for x in pts:
            pj = scenario.phi_jet(x, 4)
            fr = metric_frame(pj)
            cf = cb.CalabiFrame(fr, pj)
            s_min = min(s_min, cf.s, cf.quartic, cf.fourth_sq)
            iii, lower, _ = cb.calabi_positivity_check(pj, fr)
            pos_worst = max(pos_worst,
                            (lower - iii) / max(1.0, abs(lower), abs(iii)))
            q, b, _ = cb.calabi_inequality_check(fr, pj, scenario.dim)
            trace_worst = max(trace_worst, (b - q) / max(1.0, abs(b)))
        add("calabi_scalars_nonneg", -s_min if s_min < 0 else 0.0, len(pts))
        add("calabi_positivity", pos_worst, len(pts))
        add("calabi_trace_estimate", trace_worst, len(pts))
    if order >= 5:
        decomp_worst = 0.0
        sub = pts[:: max(1, len(pts) // 3)]
        for x in sub:
            pj = scenario.phi_jet(x, 4)
            vj = scenario.source_jet(x, 3)
            comps = target_composites(scenario, x, order=3, mode="direct")
            fr = metric_frame(pj)
            t1, t2, t3 = cb.calabi_decomposition(pj, vj, comps, fr)

            def s_field(y: np.ndarray) -> float:
                jet = scenario.phi_jet(y, 3)
                return cb.third_contraction(metric_frame(jet), jet)

            lhs = cb._l_fd_richardson(s_field, x, fr, comps, 1e-2)
            decomp_worst = max(decomp_worst, _rel(lhs, t1 + t2 + t3))
        add("calabi_decomposition_fd", decomp_worst, len(sub),
            note="relative to the scalar's scale")

        ident_worst = 0.0
        x = pts[len(pts) // 2]
        idx2 = (0, scenario.dim - 1)
        idx3 = (0, 0, scenario.dim - 1)
        for which, idx in (("d2_lower", idx2), ("d2_upper", idx2),
                           ("d3_lower", idx3), ("d3_upper", idx3)):
            ident_worst = max(ident_worst, abs(
                cb.lphi_identity_check(scenario, x, which, idx)))
        add("component_identities_fd", ident_worst, 4)

    # two-point distance chain on consecutive grid pairs
    chain_first = chain_second = -math.inf
    n_pairs = 0
    for a, b in zip(pts[:-1:2], pts[1::2]):
        if np.array_equal(a, b):
            continue
        dm2, mid, rhs, _ = ms.lemma_contraction_check(scenario, a, b)
        chain_first = max(chain_first, dm2 - mid)
        chain_second = max(chain_second, mid - rhs)
        n_pairs += 1
    if n_pairs:
        add("distance_chain_first", chain_first, n_pairs)
        add("distance_chain_second", chain_second, n_pairs)

    completeness = ms.completeness_check(scenario, pts)
    all_pass = all(r.passed for r in results)
    return {
        "artifact_version": ARTIFACT_VERSION,
        "scenario": scenario.descriptor(),
        "label": scenario.label(),
        "grid_size": len(pts),
        "seed": None,
        "tolerances": {r.name: r.tolerance for r in results},
        "checks": [r.to_json_dict() for r in results],
        "completeness": completeness.to_json_dict(),
        "bounds_records": (bounds_report.to_json_dict()["records"]
                           if bounds_report else []),
        "all_pass": all_pass,
    }
