"""Pointwise tensor calculus of the Hessian metric g = D^2 phi.

Everything lives in the fixed global chart.  With g_ij = phi_ij the
Christoffel symbols collapse to Gamma^k_ij = (1/2) g^{kl} phi_ijl, the
curvature is quadratic in third derivatives,

    R_ijkl = (1/4) g^{ms} (phi_mil phi_sjk - phi_mik phi_sjl),

and the weighted-manifold (Bakry-Emery) tensor of (R^d, g, mu) has two
independent construction routes whose agreement is the primary
correctness oracle: the explicit coordinate expression

    (1/4) g^{jl} g^{ms} phi_mil phi_sjk + (1/2) V_ik + (1/2) (g W'' g)_ik

and Ric + D^2_M P with P = (V + W o grad phi) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidN, MissingComposites, OrderUnsupported, SingularHessian
from .jets import Jet
from .scenarios import Scenario, TargetComposites, legendre_dual_jets, target_composites

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class MetricFrame:
    """Metric, inverse, and Christoffel symbols at one point, cached for reuse."""

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    christoffel: np.ndarray  # Gamma[k, i, j], symmetric in (i, j)

    @property
    def dim(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class CurvatureFrame:
    riemann: np.ndarray
    ricci: np.ndarray


def metric_frame(phi_jet: Jet) -> MetricFrame:
    """Frame built from a phi-jet of order >= 3 (order 2 gives Gamma = 0 frames)."""
    g = np.atleast_2d(phi_jet.d2)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise SingularHessian("metric d2 is not positive definite")
    g_inv = np.linalg.inv(g)
    if phi_jet.order >= 3:
        gamma = 0.5 * np.einsum("kl,ijl->kij", g_inv, phi_jet.d3)
    else:
        gamma = np.zeros((g.shape[0],) * 3)
    return MetricFrame(point=phi_jet.point, g=g, g_inv=g_inv, christoffel=gamma)


def riemann(frame: MetricFrame, phi_jet: Jet) -> np.ndarray:
    """Lowered curvature tensor R_ijkl; vanishing second-derivative part."""
    p3 = phi_jet.tensor(3)
    return 0.25 * (np.einsum("ms,mil,sjk->ijkl", frame.g_inv, p3, p3)
                   - np.einsum("ms,mik,sjl->ijkl", frame.g_inv, p3, p3))


def ricci(frame: MetricFrame, phi_jet: Jet, v_jet: Jet | None = None,
          comps: TargetComposites | None = None,
          route: str = "contraction") -> np.ndarray:
    """Ricci tensor by metric contraction of R_ijkl, or by the coordinate
    formula that absorbs the transport identity (needs V-jet and composites)."""
    if route == "contraction":
        return np.einsum("jl,ijkl->ik", frame.g_inv, riemann(frame, phi_jet))
    if route != "coordinate":
        raise ValueError(f"unknown ricci route {route!r}")
    if v_jet is None or comps is None:
        raise MissingComposites("coordinate route needs v_jet and composites")
    p3 = phi_jet.tensor(3)
    first = 0.25 * np.einsum("jl,ms,mil,sjk->ik", frame.g_inv, frame.g_inv, p3, p3)
    drift = frame.g @ comps.w1 - np.atleast_1d(v_jet.d1)  # g_js W^j - V_s
    second = 0.25 * np.einsum("ms,mik,s->ik", frame.g_inv, p3, drift)
    return first - second


def hess_m(f_jet: Jet, frame: MetricFrame, variant: str = "coordinate",
           phi_jet: Jet | None = None) -> np.ndarray:
    """Hessian of a scalar field on M.

    variant="coordinate": f_ik - Gamma^j_ik f_j.
    variant="symmetric": the dual-jet route
    (D^2 f + D^2 phi . D^2[f o grad psi] o grad phi . D^2 phi) / 2,
    assembled through the Legendre jets; needs phi to order 3.
    """
    f1 = np.atleast_1d(f_jet.d1)
    f2 = np.atleast_2d(f_jet.d2)
    if variant == "coordinate":
        return f2 - np.einsum("jik,j->ik", frame.christoffel, f1)
    if variant != "symmetric":
        raise ValueError(f"unknown hess_m variant {variant!r}")
    if phi_jet is None or phi_jet.order < 3:
        raise OrderUnsupported("symmetric variant needs the phi-jet to order 3")
    dual = legendre_dual_jets(phi_jet)
    # Hessian of f o grad psi at y = grad phi(x), via the chain rule on dual jets
    h2 = np.einsum("ij,ia,jb->ab", f2, dual.d2, dual.d2) \
        + np.einsum("i,iab->ab", f1, dual.d3)
    return 0.5 * (f2 + frame.g @ h2 @ frame.g)


def p_weight_jet(frame: MetricFrame, phi_jet: Jet, v_jet: Jet,
                 comps: TargetComposites, w_value: float = 0.0) -> Jet:
    """Euclidean jet (order 2) of P = (V + W o grad phi)/2, assembled from
    jets rather than numerical differentiation.  Pass w_value = W(grad phi)
    if the additive constant matters; derivatives do not depend on it."""
    if comps.order < 2:
        raise MissingComposites("P-jet needs composites to order 2")
    g = frame.g
    w_chain1 = g @ comps.w1
    w_chain2 = g @ comps.w2 @ g + np.einsum("a,aik->ik", comps.w1, phi_jet.tensor(3))
    d0 = 0.5 * (v_jet.d0 + w_value)
    p1 = 0.5 * (np.atleast_1d(v_jet.d1) + w_chain1)
    p2 = 0.5 * (np.atleast_2d(v_jet.d2) + w_chain2)
    return Jet(point=frame.point, order=2, d0=d0, d1=p1, d2=p2)


@dataclass(frozen=True)
class WeightTensors:
    """Gradient and M-Hessian of the weight P, with the induced curvature tensors."""

    point: np.ndarray
    p_grad: np.ndarray       # Euclidean partials of P (= lowered grad_M P)
    p_hess_m: np.ndarray     # D^2_M P
    be: np.ndarray           # Ric + D^2_M P

    def modified(self, n: float) -> np.ndarray:
        return modified_tensor(self.be, self.p_grad, n)


def bakry_emery(frame: MetricFrame, phi_jet: Jet, v_jet: Jet,
                comps: TargetComposites, route: str = "coordinate") -> np.ndarray:
    """The weighted Ricci tensor of (R^d, g, mu).

    route="coordinate" is the explicit expression quadratic in phi_ijk plus
    (1/2) D^2 V + (1/2) g W'' g; route="geometric" assembles
    Ric(contraction) + D^2_M P.  The two must agree to fixed tolerance.
    """
    if comps is None or comps.order < 2:
        raise MissingComposites("bakry_emery needs composites to order 2")
    if route == "coordinate":
        p3 = phi_jet.tensor(3)
        quad = 0.25 * np.einsum("jl,ms,mil,sjk->ik", frame.g_inv, frame.g_inv, p3, p3)
        return quad + 0.5 * np.atleast_2d(v_jet.d2) \
            + 0.5 * frame.g @ comps.w2 @ frame.g
    if route != "geometric":
        raise ValueError(f"unknown bakry_emery route {route!r}")
    ric = ricci(frame, phi_jet, route="contraction")
    p_jet = p_weight_jet(frame, phi_jet, v_jet, comps)
    return ric + hess_m(p_jet, frame, variant="coordinate")


def weight_tensors(frame: MetricFrame, phi_jet: Jet, v_jet: Jet,
                   comps: TargetComposites) -> WeightTensors:
    p_jet = p_weight_jet(frame, phi_jet, v_jet, comps)
    p_hess = hess_m(p_jet, frame, variant="coordinate")
    ric = ricci(frame, phi_jet, route="contraction")
    return WeightTensors(point=frame.point, p_grad=np.atleast_1d(p_jet.d1),
                         p_hess_m=p_hess, be=ric + p_hess)


def modified_tensor(be: np.ndarray, p_grad_m: np.ndarray, n: float) -> np.ndarray:
    """R_{N,mu} = be - (grad_M P (x) grad_M P)/(N-d) as a lowered bilinear form.

    Lowering both legs of grad_M P gives back the Euclidean partials of P,
    so the correction is the outer product of p_grad_m with itself.
    """
    d = be.shape[0]
    if not n > d:
        raise InvalidN(f"N = {n} must exceed the dimension d = {d}")
    p = np.atleast_1d(p_grad_m)
    return be - np.outer(p, p) / (n - d)


# ---------------------------------------------------------------------------
# eigenvalue tooling


def min_eig_sym(a: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetrized matrix (a + a^T)/2."""
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])


def whitened(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """L^{-1} a L^{-T} for g = L L^T; bounds a >= C g reduce to eigenvalues."""
    chol = np.linalg.cholesky(g)
    inv_l = np.linalg.inv(chol)
    m = inv_l @ a @ inv_l.T
    return 0.5 * (m + m.T)


def generalized_min_eig(a: np.ndarray, g: np.ndarray) -> float:
    """min eigenvalue of a relative to g (largest C with a >= C g at this point)."""
    return float(np.linalg.eigvalsh(whitened(a, g))[0])


# ---------------------------------------------------------------------------
# pointwise bound verification


@dataclass
class GeometryReport:
    """Pointwise curvature bound checks; never raises on a mathematical violation."""

    scenario: dict
    k_lower: float
    n_param: float
    tolerance: float
    records: list[dict] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(r["pass"] for r in self.records)

    def to_json_dict(self) -> dict:
        return {"scenario": self.scenario, "K": self.k_lower, "N": self.n_param,
                "tolerance": self.tolerance, "all_pass": self.all_pass,
                "records": self.records}

    def csv_rows(self) -> list[tuple]:
        rows = []
        for r in self.records:
            rows.append((";".join(f"{c!r}" for c in r["point"]),
                         r["min_eig_be"], r["min_eig_modified"], r["slack"]))
        return rows


def verify_bounds(scenario: Scenario, points, k_lower: float = 0.0,
                  n_param: float | None = None,
                  tolerance: float = DEFAULT_TOL,
                  enforce_cd: bool | None = None) -> GeometryReport:
    """Check, at each point: (a) nonnegativity of the weighted Ricci tensor for
    convex V and W; (b) the sufficient-condition bound be >= C g; (c) the
    diagonal lower bound with its Cauchy-trace step; (d) R_{N,mu} >= K g.

    Check (d) gates the verdict only where the CD theorem applies (log-concave
    source, uniform target) or where the caller forces it; its slack is
    recorded either way.
    """
    if scenario.max_jet_order < 3:
        raise OrderUnsupported("verify_bounds needs phi-jets to order 3")
    d = scenario.dim
    n_param = float(n_param) if n_param is not None else 2.0 * d
    if enforce_cd is None:
        enforce_cd = scenario.target_uniform and scenario.v_convex
    report = GeometryReport(scenario=scenario.descriptor(), k_lower=k_lower,
                            n_param=n_param, tolerance=tolerance)
    convex = scenario.v_convex and scenario.w_convex
    for x in points:
        phi_jet = scenario.phi_jet(x, min(3, scenario.max_jet_order))
        v_jet = scenario.source_jet(x, 2)
        comps = target_composites(scenario, x, order=2, mode="direct")
        frame = metric_frame(phi_jet)
        wt = weight_tensors(frame, phi_jet, v_jet, comps)
        be = wt.be
        modified = wt.modified(n_param)
        v2 = np.atleast_2d(v_jet.d2)
        gw2g = frame.g @ comps.w2 @ frame.g

        min_eig_be = min_eig_sym(be)
        pass_a = (min_eig_be >= -tolerance) if convex else True

        # (b) sufficient condition of the pointwise lower bound be >= C g
        vals, vecs = np.linalg.eigh(frame.g)
        g_half = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
        g_half_inv = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
        suff = g_half_inv @ v2 @ g_half_inv + g_half @ comps.w2 @ g_half
        c_star = 0.5 * float(np.linalg.eigvalsh(0.5 * (suff + suff.T))[0])
        slack_b = generalized_min_eig(be, frame.g) - c_star
        pass_b = slack_b >= -tolerance

        # (c) diagonal bound and the Cauchy-trace inequality behind it
        w_low = frame.g @ comps.w1  # d_i (W o grad phi)
        drift = -np.atleast_1d(v_jet.d1) + w_low
        slack_c = np.inf
        slack_cauchy = np.inf
        p3 = phi_jet.tensor(3)
        for i in range(d):
            quad_ii = 0.25 * float(np.einsum(
                "jl,ms,ml,sj->", frame.g_inv, frame.g_inv, p3[:, i, :], p3[:, i, :]))
            rhs = 0.5 * (v2[i, i] + gw2g[i, i]) + drift[i] ** 2 / (4.0 * d)
            slack_c = min(slack_c, float(be[i, i] - rhs))
            slack_cauchy = min(slack_cauchy,
                               quad_ii - drift[i] ** 2 / (4.0 * d))
        pass_c = slack_c >= -tolerance and slack_cauchy >= -tolerance

        # (d) the CD(K, N) matrix inequality
        slack_d = generalized_min_eig(modified, frame.g) - k_lower
        pass_d = slack_d >= -tolerance if enforce_cd else True

        slack = min(slack_b, slack_c, slack_cauchy,
                    slack_d if enforce_cd else np.inf,
                    min_eig_be if convex else np.inf)
        report.records.append({
            "point": [float(c) for c in np.atleast_1d(np.asarray(x, dtype=float))],
            "eigs_be": [float(v) for v in np.linalg.eigvalsh(0.5 * (be + be.T))],
            "eigs_modified": [float(v) for v in
                              np.linalg.eigvalsh(0.5 * (modified + modified.T))],
            "min_eig_be": min_eig_be,
            "min_eig_modified": min_eig_sym(modified),
            "slack_sufficient": slack_b,
            "slack_diagonal": slack_c,
            "slack_cauchy_trace": slack_cauchy,
            "slack_cdkn": slack_d,
            "alt_w_ii_reading": [float(v) for v in np.diag(comps.w2)],
            "cd_enforced": bool(enforce_cd),
            "slack": float(slack),
            "pass": bool(pass_a and pass_b and pass_c and pass_d),
        })
    return report
