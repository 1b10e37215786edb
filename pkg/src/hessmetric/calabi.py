"""Fourth-order contractions of the transport potential and their bounds.

The basic scalar is S = phi^{abc} phi_{abc} (indices raised with the
inverse metric).  Applying the diffusion operator to S decomposes into
three groups of terms,

    L S = I + II + III,
    I   = 3 V_ab phi^{aij} phi^b_ij + 3 W^ab phi^ij_a phi_ijb,
    II  = -2 V^{abc} phi_abc + 2 W^{abc} phi_abc,
    III = 3 phi^{abc} phi^{def} phi_aef phi_dbc
          + 2 phi^{abc} phi^d_ae phi^e_bf phi^f_cd
          - 6 phi^{abcd} phi^e_ab phi_cde + 2 phi^{abcd} phi_abcd,

and III dominates a positive multiple of the quartic contraction plus the
squared fourth derivative; the multiple is the smallest eigenvalue of a
fixed 3x3 quadratic form.  These are pointwise algebraic facts, so random
synthetic jets are first-class test inputs alongside transport scenarios.
"""

from __future__ import annotations

import numpy as np

from .errors import OrderUnsupported
from .geometry import MetricFrame, metric_frame
from .jets import Jet, jet_from_derivs, symmetrize
from .scenarios import Scenario, TargetComposites, target_composites

POSITIVITY_TOL = 1e-9
CALABI_TOL = 1e-10

# coefficient matrix of the proof's form 2x^2 - 3xy - 3xz + 2yz + 3/2 y^2 + 3/2 z^2
_FORM_MATRIX = np.array([[2.0, -1.5, -1.5],
                         [-1.5, 1.5, 1.0],
                         [-1.5, 1.0, 1.5]])


def quadratic_form_value(x: float, y: float, z: float) -> float:
    v = np.array([x, y, z])
    return float(v @ _FORM_MATRIX @ v)


def quadratic_form_min_eig() -> float:
    """Smallest eigenvalue of the fixed positivity form; strictly positive."""
    return float(np.linalg.eigvalsh(_FORM_MATRIX)[0])


def _raised3(frame: MetricFrame, p3: np.ndarray) -> np.ndarray:
    gi = frame.g_inv
    return np.einsum("ai,bj,ck,ijk->abc", gi, gi, gi, p3)


def _one_up3(frame: MetricFrame, p3: np.ndarray) -> np.ndarray:
    return np.einsum("dm,mae->dae", frame.g_inv, p3)


def third_contraction(frame: MetricFrame, phi_jet: Jet) -> float:
    """S = g^{ad} g^{be} g^{cf} phi_abc phi_def >= 0."""
    p3 = phi_jet.tensor(3)
    gi = frame.g_inv
    return float(np.einsum("ad,be,cf,abc,def->", gi, gi, gi, p3, p3))


def quartic_contraction(frame: MetricFrame, phi_jet: Jet) -> float:
    """phi^{abc} phi^{def} phi_aef phi_dbc = Tr[(g^{-1} B)^2] >= 0."""
    p3 = phi_jet.tensor(3)
    r3 = _raised3(frame, p3)
    return float(np.einsum("abc,def,aef,dbc->", r3, r3, p3, p3))


def fourth_square(frame: MetricFrame, phi_jet: Jet) -> float:
    """phi^{abcd} phi_abcd >= 0."""
    p4 = phi_jet.tensor(4)
    gi = frame.g_inv
    return float(np.einsum("ai,bj,ck,dl,ijkl,abcd->", gi, gi, gi, gi, p4, p4))


def term_iii(frame: MetricFrame, phi_jet: Jet) -> float:
    p3 = phi_jet.tensor(3)
    p4 = phi_jet.tensor(4)
    gi = frame.g_inv
    r3 = _raised3(frame, p3)
    l1 = _one_up3(frame, p3)
    r4 = np.einsum("ai,bj,ck,dl,ijkl->abcd", gi, gi, gi, gi, p4)
    quartic = float(np.einsum("abc,def,aef,dbc->", r3, r3, p3, p3))
    triple = float(np.einsum("abc,dae,ebf,fcd->", r3, l1, l1, l1))
    mixed = float(np.einsum("abcd,eab,cde->", r4, l1, p3))
    fsq = float(np.einsum("abcd,abcd->", r4, p4))
    return 3.0 * quartic + 2.0 * triple - 6.0 * mixed + 2.0 * fsq


class CalabiFrame:
    """All scalar contractions at one point."""

    def __init__(self, frame: MetricFrame, phi_jet: Jet):
        if phi_jet.order < 4:
            raise OrderUnsupported("Calabi scalars need phi-jets to order 4")
        self.s = third_contraction(frame, phi_jet)
        self.quartic = quartic_contraction(frame, phi_jet)
        self.fourth_sq = fourth_square(frame, phi_jet)
        self.term_iii = term_iii(frame, phi_jet)


def calabi_decomposition(phi_jet: Jet, v_jet: Jet, comps: TargetComposites,
                         frame: MetricFrame) -> tuple[float, float, float]:
    """The three groups (I, II, III) of L applied to S."""
    if phi_jet.order < 4:
        raise OrderUnsupported("decomposition needs phi-jets to order 4")
    if v_jet.order < 3 or comps.order < 3:
        raise OrderUnsupported("decomposition needs V-jet and composites to order 3")
    p3 = phi_jet.tensor(3)
    gi = frame.g_inv
    r3 = _raised3(frame, p3)
    l1 = _one_up3(frame, p3)
    two_up = np.einsum("im,jn,mna->ija", gi, gi, p3)
    v2 = np.atleast_2d(v_jet.d2)
    v3 = v_jet.tensor(3)
    term_i = 3.0 * float(np.einsum("ab,aij,bij->", v2, r3, l1)) \
        + 3.0 * float(np.einsum("ab,ija,ijb->", comps.w2, two_up, p3))
    v3_raised = np.einsum("ai,bj,ck,ijk->abc", gi, gi, gi, v3)
    term_ii = -2.0 * float(np.einsum("abc,abc->", v3_raised, p3)) \
        + 2.0 * float(np.einsum("abc,abc->", comps.w3, p3))
    return term_i, term_ii, term_iii(frame, phi_jet)


def calabi_positivity_check(phi_jet: Jet, frame: MetricFrame,
                            tol: float = POSITIVITY_TOL) -> tuple[float, float, bool]:
    """III against its sum-of-squares lower bound c_q (quartic + fourth_sq)."""
    cf = CalabiFrame(frame, phi_jet)
    lower = quadratic_form_min_eig() * (cf.quartic + cf.fourth_sq)
    return cf.term_iii, lower, bool(cf.term_iii >= lower - tol)


def calabi_inequality_check(frame: MetricFrame, phi_jet: Jet, dim: int,
                            tol: float = CALABI_TOL) -> tuple[float, float, bool]:
    """The trace estimate: quartic >= S^2 / d."""
    s = third_contraction(frame, phi_jet)
    quartic = quartic_contraction(frame, phi_jet)
    bound = s * s / dim
    return quartic, bound, bool(quartic >= bound - tol)


# ---------------------------------------------------------------------------
# identities for L applied to metric components, checked against FD


def _l_fd_richardson(sample, x: np.ndarray, frame: MetricFrame,
                     comps: TargetComposites, step: float) -> float:
    """L(field) with 3-point central stencils and one Richardson level."""

    def l_at(h: float) -> float:
        d = x.size
        f0 = sample(x)
        grad = np.zeros(d)
        hess = np.zeros((d, d))
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = h
            fp, fm = sample(x + ei), sample(x - ei)
            grad[i] = (fp - fm) / (2.0 * h)
            hess[i, i] = (fp - 2.0 * f0 + fm) / h**2
            for j in range(i + 1, d):
                ej = np.zeros(d)
                ej[j] = h
                pp, pm = sample(x + ei + ej), sample(x + ei - ej)
                mp, mm = sample(x - ei + ej), sample(x - ei - ej)
                hess[i, j] = hess[j, i] = (pp - pm - mp + mm) / (4.0 * h * h)
        return float(np.einsum("ij,ji->", hess, frame.g_inv) - grad @ comps.w1)

    return (4.0 * l_at(0.5 * step) - l_at(step)) / 3.0


def lphi_identity_check(scenario: Scenario, x, which: str, indices: tuple,
                        step: float = 1e-2) -> float:
    """Residual (FD LHS minus jet RHS) of one component identity:

    which = "d2_lower":  L g_ij   = -V_ij + (g W'' g)_ij + phi^{ab}_i phi_abj
    which = "d2_upper":  L g^{ij} =  V^{ij} - W^{ij} + phi^{iab} phi^j_ab
    which = "d3_lower":  L phi_ijk  (third-derivative identity)
    which = "d3_upper":  L phi^{ijk}
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if scenario.max_jet_order < 5:
        raise OrderUnsupported("identity checks need order-5 jets near x")
    needs3 = which in ("d3_lower", "d3_upper")
    order_c = 3 if needs3 else 2
    phi_jet = scenario.phi_jet(x, 4)
    v_jet = scenario.source_jet(x, 3)
    comps = target_composites(scenario, x, order=order_c, mode="direct")
    frame = metric_frame(phi_jet)
    gi = frame.g_inv
    g = frame.g
    p3, p4 = phi_jet.tensor(3), phi_jet.tensor(4)
    v2 = np.atleast_2d(v_jet.d2)

    if which == "d2_lower":
        i, j = indices

        def sample(y: np.ndarray) -> float:
            return float(np.atleast_2d(scenario.phi_jet(y, 2).d2)[i, j])

        up2 = np.einsum("am,bn,mni->abi", gi, gi, p3)
        rhs = -v2[i, j] + (g @ comps.w2 @ g)[i, j] \
            + float(np.einsum("ab,ab->", up2[:, :, i], p3[:, :, j]))
    elif which == "d2_upper":
        i, j = indices

        def sample(y: np.ndarray) -> float:
            return float(np.linalg.inv(np.atleast_2d(scenario.phi_jet(y, 2).d2))[i, j])

        r3 = _raised3(frame, p3)
        l1 = _one_up3(frame, p3)
        rhs = float((gi @ v2 @ gi)[i, j]) - float(comps.w2[i, j]) \
            + float(np.einsum("ab,ab->", r3[i], l1[j]))
    elif which == "d3_lower":
        i, j, k = indices

        def sample(y: np.ndarray) -> float:
            return float(scenario.phi_jet(y, 3).d3[i, j, k])

        up2 = np.einsum("am,bn,mnp->abp", gi, gi, p3)
        up2_4 = np.einsum("am,bn,mnpq->abpq", gi, gi, p4)
        l1 = _one_up3(frame, p3)
        w_low3 = np.einsum("ia,jb,kc,abc->ijk", g, g, g, comps.w3)
        w_mix = comps.w2 @ g  # W^s_i = W^{sa} g_ai
        rhs = (float(np.einsum("ab,ab->", p3[:, :, i], up2_4[:, :, j, k]))
               + float(np.einsum("ab,ab->", p3[:, :, j], up2_4[:, :, i, k]))
               + float(np.einsum("ab,ab->", p3[:, :, k], up2_4[:, :, i, j]))
               - 2.0 * float(np.einsum("ab,bc,ca->", l1[:, :, i], l1[:, :, j],
                                       l1[:, :, k]))
               - float(v_jet.d3[i, j, k]) + w_low3[i, j, k]
               + float(np.einsum("s,s->", w_mix[:, i], p3[:, j, k]))
               + float(np.einsum("s,s->", w_mix[:, j], p3[:, i, k]))
               + float(np.einsum("s,s->", w_mix[:, k], p3[:, i, j])))
    elif which == "d3_upper":
        i, j, k = indices

        def sample(y: np.ndarray) -> float:
            jet = scenario.phi_jet(y, 3)
            giy = np.linalg.inv(np.atleast_2d(jet.d2))
            return float(np.einsum("ai,bj,ck,abc->ijk", giy, giy, giy,
                                   jet.d3)[i, j, k])

        r3 = _raised3(frame, p3)
        l1 = _one_up3(frame, p3)                       # phi^a_{xy}
        up2 = np.einsum("im,jn,mna->ija", gi, gi, p3)  # phi^{ij}_a
        # phi_{ab}^{jk}: raise the last two slots of the fourth derivative
        low2up2_4 = np.einsum("jm,kn,abmn->abjk", gi, gi, p4)
        v3r = np.einsum("ai,bj,ck,ijk->abc", gi, gi, gi, v_jet.d3)
        v2r = gi @ v2 @ gi
        t_minus = (np.einsum("ab,ab->", r3[i], low2up2_4[:, :, j, k])
                   + np.einsum("ab,ab->", r3[j], low2up2_4[:, :, i, k])
                   + np.einsum("ab,ab->", r3[k], low2up2_4[:, :, i, j]))
        t_cyc = np.einsum("ab,bc,ca->", up2[i], up2[j], up2[k])
        t_v = (np.einsum("s,s->", v2r[i], up2[j, k])
               + np.einsum("s,s->", v2r[j], up2[i, k])
               + np.einsum("s,s->", v2r[k], up2[i, j]))
        t_phi = (np.einsum("axy,xy,a->", l1, r3[i], up2[j, k])
                 + np.einsum("axy,xy,a->", l1, r3[j], up2[i, k])
                 + np.einsum("axy,xy,a->", l1, r3[k], up2[i, j]))
        rhs = (-float(t_minus) + 4.0 * float(t_cyc) - float(v3r[i, j, k])
               + float(comps.w3[i, j, k]) + float(t_v) + float(t_phi))
    else:
        raise ValueError(f"unknown identity {which!r}")

    lhs = _l_fd_richardson(sample, x, frame, comps, step)
    return float(lhs - rhs)


# ---------------------------------------------------------------------------
# synthetic jet fixtures for property tests


def synthetic_jet(rng: np.random.Generator, dim: int,
                  cond_max: float = 100.0) -> Jet:
    """Random order-4 jet: SPD d2 with condition <= cond_max, symmetric
    d3/d4 with entries in [-1, 1].  Pointwise algebraic facts (positivity
    of III, the Calabi estimate) need no transport scenario behind them."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    half = 0.5 * np.log(cond_max)
    eigs = np.exp(rng.uniform(-half, half, size=dim))
    d2 = q @ np.diag(eigs) @ q.T
    d2 = 0.5 * (d2 + d2.T)
    d3 = symmetrize(rng.uniform(-1.0, 1.0, size=(dim,) * 3))
    d4 = symmetrize(rng.uniform(-1.0, 1.0, size=(dim,) * 4))
    return jet_from_derivs(np.zeros(dim),
                           [0.0, rng.uniform(-1.0, 1.0, size=dim), d2, d3, d4], 4)
