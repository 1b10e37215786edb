"""The transport diffusion operator and its iterated carre du champ.

L f = Tr[D^2 f (D^2 phi)^{-1}] - <grad f, grad W(grad phi)> generates the
Dirichlet form int <(D^2 phi)^{-1} grad f, grad h> dmu; geometrically it is
Delta_M - <grad_M P, grad_M .>_M.  Gamma_2 is computed by three independent
routes: the Bochner form

    |D^2_M f|_HS^2 + (Ric + D^2_M P)(grad_M f, grad_M f),

the defining half-iterated-bracket with finite differences on the
outermost layer only, and the closed 1D formula for Dirichlet forms
int a (f')^2 dmu with a = 1/phi''.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import RouteUnavailable
from .fields import TestField
from .geometry import MetricFrame, hess_m, metric_frame, weight_tensors
from .jets import Jet
from .quadrature import QuadResult, box_tensor_integral, mu_integral_1d
from .scenarios import Scenario, TargetComposites, target_composites

FD_STEP = 1e-3


def apply_l(f_jet: Jet, frame: MetricFrame, comps: TargetComposites) -> float:
    """L f at one point from the field's jet, the metric frame, and W-composites."""
    f1 = np.atleast_1d(f_jet.d1)
    f2 = np.atleast_2d(f_jet.d2)
    return float(np.einsum("ij,ji->", f2, frame.g_inv) - f1 @ comps.w1)


def apply_l_geometric(f_jet: Jet, frame: MetricFrame, phi_jet: Jet, v_jet: Jet,
                      comps: TargetComposites) -> float:
    """The same operator as Delta_M f - <grad_M P, grad_M f>_M."""
    hf = hess_m(f_jet, frame, variant="coordinate")
    laplacian = float(np.einsum("ik,ik->", frame.g_inv, hf))
    wt = weight_tensors(frame, phi_jet, v_jet, comps)
    drift = float(np.einsum("ij,i,j->", frame.g_inv, wt.p_grad,
                            np.atleast_1d(f_jet.d1)))
    return laplacian - drift


def gamma_phi(f_jet: Jet, frame: MetricFrame, h_jet: Jet | None = None) -> float:
    """Carre du champ <(D^2 phi)^{-1} grad f, grad h> (h = f when omitted)."""
    f1 = np.atleast_1d(f_jet.d1)
    h1 = f1 if h_jet is None else np.atleast_1d(h_jet.d1)
    return float(f1 @ frame.g_inv @ h1)


def ma_diffusion_check(scenario: Scenario, x, e) -> float:
    """Residual of the differentiated transport equation, V_e + L(phi_e)."""
    e = np.atleast_1d(np.asarray(e, dtype=float))
    pj = scenario.phi_jet(x, 3)
    comps = target_composites(scenario, x, order=1, mode="direct")
    frame = metric_frame(pj)
    f1 = np.atleast_2d(pj.d2) @ e
    f2 = np.einsum("ijk,k->ij", pj.d3, e)
    l_phi_e = float(np.einsum("ij,ji->", f2, frame.g_inv) - f1 @ comps.w1)
    v_e = float(np.atleast_1d(scenario.source_jet(x, 1).d1) @ e)
    return v_e + l_phi_e


def _l_of_sampled_field(sample, x: np.ndarray, frame: MetricFrame,
                        comps: TargetComposites, step: float) -> float:
    """L applied to a scalar field known only through point evaluation.

    Gradient and pure second derivatives use the 5-point central stencil per
    axis; mixed second derivatives use the 4-point cross."""
    d = x.size
    f0 = sample(x)
    grad = np.zeros(d)
    hess = np.zeros((d, d))
    cache: dict[tuple, float] = {}

    def ev(offsets: tuple) -> float:
        if offsets not in cache:
            p = x.copy()
            for axis, k in offsets:
                p[axis] += k * step
            cache[offsets] = sample(p)
        return cache[offsets]

    for i in range(d):
        fm2, fm1 = ev(((i, -2),)), ev(((i, -1),))
        fp1, fp2 = ev(((i, 1),)), ev(((i, 2),))
        grad[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step)
        hess[i, i] = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) \
            / (12.0 * step**2)
        for j in range(i + 1, d):
            pp = ev(((i, 1), (j, 1)))
            pm = ev(((i, 1), (j, -1)))
            mp = ev(((i, -1), (j, 1)))
            mm = ev(((i, -1), (j, -1)))
            hess[i, j] = hess[j, i] = (pp - pm - mp + mm) / (4.0 * step**2)
    return float(np.einsum("ij,ji->", hess, frame.g_inv) - grad @ comps.w1)


def gamma2(f: TestField, scenario: Scenario, x, route: str = "bochner",
           step: float = FD_STEP) -> float:
    """Gamma_2(f) at x by the requested route."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if route == "bochner":
        pj = scenario.phi_jet(x, 3)
        vj = scenario.source_jet(x, 2)
        comps = target_composites(scenario, x, order=2, mode="direct")
        frame = metric_frame(pj)
        fj = f.jet(x)
        hf = hess_m(fj, frame, variant="coordinate")
        hs2 = float(np.einsum("ik,jl,ij,kl->", frame.g_inv, frame.g_inv, hf, hf))
        be = weight_tensors(frame, pj, vj, comps).be
        f1 = np.atleast_1d(fj.d1)
        grad_m = frame.g_inv @ f1
        return hs2 + float(grad_m @ be @ grad_m)

    if route == "closed_1d":
        if scenario.dim != 1:
            raise RouteUnavailable("closed_1d route needs a 1D scenario")
        pj = scenario.phi_jet(x, 3)
        p2 = float(pj.d2[0, 0])
        if p2 <= 0.0:
            raise RouteUnavailable("closed 1D formula needs phi'' > 0")
        p3 = float(pj.d3[0, 0, 0])
        v2 = float(np.atleast_2d(scenario.source_jet(x, 2).d2)[0, 0])
        w2 = float(target_composites(scenario, x, 2).w2[0, 0])
        fj = f.jet(x)
        f1, f2 = float(fj.d1[0]), float(fj.d2[0, 0])
        return (f2**2 / p2**2 - p3 * f1 * f2 / p2**3
                + 0.5 * f1**2 * (p3**2 / p2**4 + v2 / p2**2 + w2))

    if route != "direct_fd":
        raise RouteUnavailable(f"unknown gamma2 route {route!r}")

    frame = metric_frame(scenario.phi_jet(x, 3))
    comps = target_composites(scenario, x, order=1, mode="direct")

    def gamma_field(y: np.ndarray) -> float:
        return gamma_phi(f.jet(y), metric_frame(scenario.phi_jet(y, 2)))

    def l_field(y: np.ndarray) -> float:
        return apply_l(f.jet(y), metric_frame(scenario.phi_jet(y, 2)),
                       target_composites(scenario, y, order=1, mode="direct"))

    l_gamma = _l_of_sampled_field(gamma_field, x, frame, comps, step)
    d = x.size
    grad_lf = np.zeros(d)
    for i in range(d):
        pts = []
        for k in (-2, -1, 1, 2):
            p = x.copy()
            p[i] += k * step
            pts.append(l_field(p))
        grad_lf[i] = (pts[0] - 8.0 * pts[1] + 8.0 * pts[2] - pts[3]) / (12.0 * step)
    f1 = np.atleast_1d(f.jet(x).d1)
    gamma_lf_f = float(grad_lf @ frame.g_inv @ f1)
    return 0.5 * (l_gamma - 2.0 * gamma_lf_f)


def _support_interval(field: TestField) -> tuple[float, float] | None:
    sup = field.support
    if sup.kind == "interval":
        return float(sup.lo[0]), float(sup.hi[0])
    return None


def ibp_check(f: TestField, h: TestField, scenario: Scenario,
              tol: float = 1e-9) -> tuple[float, float, float]:
    """Quadrature check of the integration-by-parts identity:
    returns (int Gamma(f,h) dmu, -int f Lh dmu, -int h Lf dmu)."""

    def frame_comps(p: np.ndarray):
        fr = metric_frame(scenario.phi_jet(p, 2))
        cp = target_composites(scenario, p, order=1, mode="direct")
        return fr, cp

    if scenario.dim == 1:
        sf, sh = _support_interval(f), _support_interval(h)

        def window(a_b, c_d):
            if a_b is None:
                return c_d
            if c_d is None:
                return a_b
            lo, hi = max(a_b[0], c_d[0]), min(a_b[1], c_d[1])
            return (lo, hi) if hi > lo else None

        both = window(sf, sh)
        if both is None:
            lhs = 0.0
        else:
            def gfh(t: float) -> float:
                p = np.array([t])
                fr, _ = frame_comps(p)
                return gamma_phi(f.jet(p), fr, h.jet(p))
            lhs = mu_integral_1d(scenario, gfh, *both, tol=tol).value

        def make_rhs(outer: TestField, inner: TestField, sup):
            if sup is None:
                return 0.0

            def fn(t: float) -> float:
                p = np.array([t])
                fr, cp = frame_comps(p)
                return outer.value(p) * apply_l(inner.jet(p), fr, cp)
            return -mu_integral_1d(scenario, fn, *sup, tol=tol).value

        rhs_f = make_rhs(f, h, window(sf, sh))
        rhs_h = make_rhs(h, f, window(sf, sh))
        return lhs, rhs_f, rhs_h

    if scenario.kind != "product":
        raise RouteUnavailable("ibp_check needs a 1D or product scenario")

    lo = np.maximum(f.support.lo, h.support.lo)
    hi = np.minimum(f.support.hi, h.support.hi)
    if np.any(hi <= lo):
        return 0.0, 0.0, 0.0

    def dens(p: np.ndarray) -> float:
        return math.exp(-scenario.source_jet(p, 0).d0)

    def lhs_fn(p: np.ndarray) -> float:
        fr, _ = frame_comps(p)
        return gamma_phi(f.jet(p), fr, h.jet(p)) * dens(p)

    def rhs_f_fn(p: np.ndarray) -> float:
        fr, cp = frame_comps(p)
        return -f.value(p) * apply_l(h.jet(p), fr, cp) * dens(p)

    def rhs_h_fn(p: np.ndarray) -> float:
        fr, cp = frame_comps(p)
        return -h.value(p) * apply_l(f.jet(p), fr, cp) * dens(p)

    lhs = box_tensor_integral(lhs_fn, lo, hi).value
    rhs_f = box_tensor_integral(rhs_f_fn, lo, hi).value
    rhs_h = box_tensor_integral(rhs_h_fn, lo, hi).value
    return lhs, rhs_f, rhs_h
