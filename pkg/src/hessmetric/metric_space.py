"""Distances, concentration, volume growth, and diameter experiments on
M = (R^d, D^2 phi, mu).

Exact Riemannian distances are available in 1D (the geodesic is the
segment) and along rays of radial scenarios; everywhere else every
distance this module produces is a certified upper bound (segment or
polyline length, or the two-point estimate

    d_M(x, y)^2 <= <grad phi(y) - grad phi(x), y - x>
                <= |x - y| . |grad phi(x) - grad phi(y)| ),

and every inequality test is arranged so that an upper bound suffices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .errors import (ConfigError, DomainError, QuadratureFailure, SeedRequired)
from .geometry import metric_frame
from .scenarios import (Custom1D, GaussianToUniform1D, ProductScenario,
                        RadialGaussianToBall, Scenario)
from .seeding import stream

_GL5_NODES, _GL5_WEIGHTS = leggauss(5)
TRUNCATION = 8.0


@dataclass(frozen=True)
class Polyline:
    """Ordered nodes of a discretized curve; lengths are measured under g."""

    nodes: np.ndarray  # (n, d)

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "nodes", nodes)
        if nodes.shape[0] < 2:
            raise ValueError("polyline needs at least two nodes")
        gaps = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
        if np.any(gaps == 0.0):
            raise ValueError("consecutive polyline nodes must be distinct")


def _segment_length(scenario: Scenario, a: np.ndarray, b: np.ndarray) -> float:
    v = b - a
    total = 0.0
    for t, w in zip(_GL5_NODES, _GL5_WEIGHTS):
        x = a + 0.5 * (t + 1.0) * v
        if scenario.dim == 1:
            q = scenario.metric_1d(float(x[0])) * float(v[0] * v[0])
        else:
            g = np.atleast_2d(scenario.phi_jet(x, 2).d2)
            q = float(v @ g @ v)
        total += w * math.sqrt(max(q, 0.0))
    return 0.5 * total


def path_length(p: Polyline, scenario: Scenario) -> float:
    """Riemannian length of the polyline: 5-node Gauss per segment."""
    return sum(_segment_length(scenario, p.nodes[k], p.nodes[k + 1])
               for k in range(p.nodes.shape[0] - 1))


def geodesic_upper(scenario: Scenario, x, y, nodes: int = 16, iters: int = 60,
                   init: Polyline | None = None) -> tuple[float, Polyline]:
    """Upper bound on d_M(x, y) by deterministic refinement of a polyline.

    Coordinate-descent sweeps on the total squared-segment energy with
    monotone acceptance and step halving; the returned length never exceeds
    the straight-segment length (nor the initial polyline's).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.array_equal(x, y):
        raise ConfigError("geodesic_upper needs distinct endpoints")
    if nodes < 2:
        raise ConfigError("need at least two nodes")
    if init is not None:
        pts = init.nodes.copy()
    else:
        ts = np.linspace(0.0, 1.0, nodes)
        pts = x[None, :] + ts[:, None] * (y - x)[None, :]

    seg_len = [ _segment_length(scenario, pts[k], pts[k + 1])
                for k in range(pts.shape[0] - 1) ]
    best_len = sum(seg_len)
    best_pts = pts.copy()
    energy = sum(s * s for s in seg_len)
    h = max(float(np.linalg.norm(y - x)) / max(pts.shape[0] - 1, 1) * 0.5, 1e-6)
    d = x.size

    for _ in range(iters):
        improved = False
        for i in range(1, pts.shape[0] - 1):
            for axis in range(d):
                for sign in (1.0, -1.0):
                    trial = pts[i].copy()
                    trial[axis] += sign * h
                    try:
                        left = _segment_length(scenario, pts[i - 1], trial)
                        right = _segment_length(scenario, trial, pts[i + 1])
                    except DomainError:
                        continue
                    new_energy = energy - seg_len[i - 1] ** 2 - seg_len[i] ** 2 \
                        + left**2 + right**2
                    if new_energy < energy - 1e-15:
                        pts[i] = trial
                        seg_len[i - 1], seg_len[i] = left, right
                        energy = new_energy
                        improved = True
                        break
            total = sum(seg_len)
            if total < best_len:
                best_len = total
                best_pts = pts.copy()
        if not improved:
            h *= 0.5
            if h < 1e-9:
                break
    return best_len, Polyline(best_pts)


def distance_1d(scenario: Scenario, x: float, y: float,
                tol: float = 1e-12) -> float:
    """Exact 1D distance: adaptive quadrature of sqrt(phi'') over [x, y]."""
    if scenario.dim != 1:
        raise ConfigError("distance_1d needs a 1D scenario")
    a, b = (x, y) if x <= y else (y, x)
    if a == b:
        return 0.0

    def speed(t: float) -> float:
        return math.sqrt(max(scenario.metric_1d(t), 0.0))

    val, err = quad(speed, a, b, epsabs=tol, epsrel=1e-12, limit=400)
    if err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureFailure(f"distance quadrature error {err}")
    return float(val)


def distances_1d_bulk(scenario: Scenario, base: float,
                      xs: np.ndarray) -> np.ndarray:
    """d_M(base, x) for many x at once, by cumulative panel quadrature."""
    xs = np.asarray(xs, dtype=float)
    targets = np.unique(np.concatenate([xs, [base]]))
    # split every inter-target gap into panels of width <= 0.05 and batch
    # all Gauss nodes through the vectorized metric
    gaps = np.diff(targets)
    panel_counts = np.maximum(1, np.ceil(gaps / 0.05)).astype(int)
    node_list, weight_list, owner = [], [], []
    for k, (a, n_panels) in enumerate(zip(targets[:-1], panel_counts)):
        edges = np.linspace(a, targets[k + 1], n_panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halves = 0.5 * np.diff(edges)
        node_list.append((mids[:, None] + np.outer(halves, _GL5_NODES)).ravel())
        weight_list.append(np.outer(halves, _GL5_WEIGHTS).ravel())
        owner.append(np.full(n_panels * _GL5_NODES.size, k))
    nodes = np.concatenate(node_list)
    weights = np.concatenate(weight_list)
    owner = np.concatenate(owner)
    speeds = np.sqrt(np.maximum(scenario.metric_1d_batch(nodes), 0.0))
    increments = np.bincount(owner, weights=weights * speeds,
                             minlength=len(gaps))
    cum = np.concatenate([[0.0], np.cumsum(increments)])
    lookup = {t: c for t, c in zip(targets, cum)}
    base_val = lookup[base]
    return np.array([abs(lookup[x] - base_val) for x in xs])


def lemma_contraction_check(scenario: Scenario, x, y, segments: int = 16,
                            tol_first: float = 1e-9,
                            tol_second: float = 1e-12) -> tuple:
    """The two-point distance chain: (dm2, mid, rhs, pass)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.array_equal(x, y):
        return 0.0, 0.0, 0.0, True
    if scenario.dim == 1:
        dm = distance_1d(scenario, float(x[0]), float(y[0]))
    else:
        ts = np.linspace(0.0, 1.0, segments + 1)
        pts = x[None, :] + ts[:, None] * (y - x)[None, :]
        dm = path_length(Polyline(pts), scenario)
    tx, ty = scenario.grad_phi(x), scenario.grad_phi(y)
    mid = float((ty - tx) @ (y - x))
    rhs = float(np.linalg.norm(y - x) * np.linalg.norm(ty - tx))
    ok = (dm * dm <= mid + tol_first) and (mid <= rhs + tol_second)
    return dm * dm, mid, rhs, bool(ok)


# ---------------------------------------------------------------------------
# concentration


@dataclass
class ConcentrationReport:
    scenario: dict
    halfspace_normal: list
    halfspace_offset: float
    h_grid: list
    empirical_mass: list
    paper_bound: list
    sample_count: int
    seed: int

    @property
    def dominates(self) -> bool:
        return all(e >= b for e, b in zip(self.empirical_mass, self.paper_bound))

    def to_json_dict(self) -> dict:
        out = dict(self.__dict__)
        out["dominates"] = self.dominates
        return out


def concentration_profile(scenario: Scenario, normal, offset: float,
                          h_grid, samples: int, seed: int | None) -> ConcentrationReport:
    """Monte-Carlo enlargement masses of a half-space A = {<x,u> <= c}.

    Each sample's distance to A is replaced by the Lemma upper bound (exact
    1D distance where available), so the empirical mass underestimates the
    true enlargement mass and the domination test stays one-sided valid.
    """
    if seed is None:
        raise SeedRequired("concentration_profile needs a seed")
    u = np.atleast_1d(np.asarray(normal, dtype=float))
    u = u / np.linalg.norm(u)
    c = float(offset)
    if c < 0.0:
        raise ConfigError("half-space must carry mass >= 1/2 (offset >= 0)")
    diam = scenario.target_diameter
    if not math.isfinite(diam):
        raise ConfigError("concentration bound needs a bounded target support")

    rng = stream(seed, "concentration", scenario.label())
    pts = scenario.sample_mu(rng, samples)
    margins = pts @ u - c
    outside = margins > 0.0
    bound_vals = np.zeros(samples)
    if scenario.dim == 1:
        boundary = c * u[0]
        xs = pts[outside, 0]
        if xs.size:
            bound_vals[outside] = distances_1d_bulk(scenario, boundary, xs)
    else:
        proj = pts[outside] - margins[outside, None] * u[None, :]
        t_out = scenario.grad_phi_batch(pts[outside])
        t_proj = scenario.grad_phi_batch(proj)
        image_gap = np.linalg.norm(t_out - t_proj, axis=1)
        bound_vals[outside] = np.sqrt(margins[outside] * image_gap)

    h_grid = [float(h) for h in h_grid]
    empirical = [float(np.mean(bound_vals <= h)) for h in h_grid]
    paper = [1.0 - math.exp(-0.5 * (h * h / diam) ** 2) for h in h_grid]
    return ConcentrationReport(scenario=scenario.descriptor(),
                               halfspace_normal=[float(v) for v in u],
                               halfspace_offset=c, h_grid=h_grid,
                               empirical_mass=empirical, paper_bound=paper,
                               sample_count=samples, seed=seed)


def km_combination(k_mu, k_nu, h: float, t_scale: float = 1.0) -> float:
    """Concentration of M from the factors:
    K_M(h) >= -log inf_t [exp(-K_mu(h^2/t)) + exp(-K_nu(t))].

    The infimum is taken over a 64-point log-spaced grid spanning
    [1e-3, 1e3] * t_scale and refined by bounded scalar minimization.
    """
    if h <= 0.0:
        return 0.0

    def objective(t: float) -> float:
        a = k_mu(h * h / t)
        b = k_nu(t)
        ea = math.exp(-a) if a < 700 else 0.0
        eb = math.exp(-b) if b < 700 else 0.0
        return ea + eb

    ts = np.logspace(-3.0, 3.0, 64) * t_scale
    vals = [objective(t) for t in ts]
    k = int(np.argmin(vals))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, len(ts) - 1)]
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    best = min(vals[k], float(res.fun))
    if best <= 0.0:
        return float("inf")
    return max(0.0, -math.log(best))


# ---------------------------------------------------------------------------
# volume growth and diameter


def bishop_gromov_profile(scenario: Scenario, x0, r_grid) -> list[tuple[float, float]]:
    """(r, mu(B_r(x0)) / r^{2d}) along the grid; exact distances (1D, or the
    radial center) define the balls."""
    r_grid = [float(r) for r in r_grid]
    if scenario.dim == 1:
        x0 = float(np.atleast_1d(np.asarray(x0, dtype=float))[0])

        def reach(sign: float) -> float:
            return distance_1d(scenario, x0, sign * TRUNCATION)

        reach_plus, reach_minus = reach(1.0), reach(-1.0)

        def boundary(r: float, sign: float) -> float:
            if sign > 0 and r >= reach_plus:
                return TRUNCATION
            if sign < 0 and r >= reach_minus:
                return -TRUNCATION
            return brentq(lambda t: distance_1d(scenario, x0, t) - r,
                          x0, sign * TRUNCATION, xtol=1e-13)

        out = []
        for r in r_grid:
            b, a = boundary(r, 1.0), boundary(r, -1.0)
            mass = scenario.mu_cdf_1d(b) - scenario.mu_cdf_1d(a)
            out.append((r, mass / r ** (2 * scenario.dim)))
        return out

    if isinstance(scenario, RadialGaussianToBall):
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        if np.linalg.norm(x0) > 1e-12:
            raise ConfigError("radial profile needs the center x0 = 0")

        def radial_speed(s: float) -> float:
            return math.sqrt(max(scenario.rho_prime(s), 0.0))

        def radial_dist(t: float) -> float:
            val, _ = quad(radial_speed, 0.0, t, epsabs=1e-12, limit=200)
            return float(val)

        reach = radial_dist(TRUNCATION)
        out = []
        for r in r_grid:
            if r >= reach:
                r_eucl = TRUNCATION
            else:
                r_eucl = brentq(lambda t: radial_dist(t) - r, 0.0, TRUNCATION,
                                xtol=1e-13)
            mass = scenario._chi_cdf(r_eucl)
            out.append((r, mass / r ** (2 * scenario.dim)))
        return out

    raise ConfigError("bishop_gromov_profile needs a 1D or radial scenario")


@dataclass
class DiameterReport:
    family: str
    diameter: float
    dims: list
    estimates: list
    d_exponent: float
    d_grid: list
    d_sweep_ref_dim: int
    d_sweep: list
    diameter_exponent: float
    exact_1d: float
    seed: int
    samples: int

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def _diameter_scenario(family: str, d: int, diam: float) -> Scenario:
    if family == "radial":
        return RadialGaussianToBall(d, diam)
    if family == "product":
        if d == 1:
            return GaussianToUniform1D(diam)
        return ProductScenario([GaussianToUniform1D(diam / math.sqrt(d))
                                for _ in range(d)])
    raise ConfigError(f"unknown diameter family {family!r}")


def _pair_bound_percentile(scenario: Scenario, n: int,
                           rng: np.random.Generator, q: float = 99.9) -> float:
    x = scenario.sample_mu(rng, n)
    y = scenario.sample_mu(rng, n)
    tx = scenario.grad_phi_batch(x)
    ty = scenario.grad_phi_batch(y)
    z = np.linalg.norm(x - y, axis=1) * np.linalg.norm(tx - ty, axis=1)
    return float(np.sqrt(np.percentile(z, q)))


def diameter_experiment(dims, D: float, samples: int, seed: int | None,
                        family: str = "radial") -> DiameterReport:
    """Monte-Carlo diameter estimates across dimensions and target diameters.

    Per dimension, the estimate is the 99.9th percentile over sample pairs
    of the two-point upper bound sqrt(d(x,y) d(grad phi x, grad phi y));
    least-squares exponents of log(estimate) against log(d) and log(D) are
    reported, never asserted against the unquantified universal constant.
    """
    if seed is None:
        raise SeedRequired("diameter_experiment needs a seed")
    dims = [int(d) for d in dims]
    estimates = []
    for d in dims:
        scen = _diameter_scenario(family, d, D)
        rng = stream(seed, "diameter", f"{family}/d={d}/D={D:g}")
        estimates.append(_pair_bound_percentile(scen, samples, rng))
    d_exp = float(np.polyfit(np.log(dims), np.log(estimates), 1)[0]) \
        if len(dims) > 1 else float("nan")

    ref_dim = dims[len(dims) // 2]
    d_grid = [0.5 * D, D, 2.0 * D]
    sweep = []
    for dd in d_grid:
        scen = _diameter_scenario(family, ref_dim, dd)
        rng = stream(seed, "diameter", f"{family}/d={ref_dim}/sweep")
        sweep.append(_pair_bound_percentile(scen, samples, rng))
    diam_exp = float(np.polyfit(np.log(d_grid), np.log(sweep), 1)[0])

    one_d = GaussianToUniform1D(D)
    exact_1d = distance_1d(one_d, -TRUNCATION, TRUNCATION)
    return DiameterReport(family=family, diameter=D, dims=dims,
                          estimates=estimates, d_exponent=d_exp,
                          d_grid=d_grid, d_sweep_ref_dim=ref_dim,
                          d_sweep=sweep, diameter_exponent=diam_exp,
                          exact_1d=exact_1d, seed=seed, samples=samples)


# ---------------------------------------------------------------------------
# completeness


@dataclass(frozen=True)
class CompletenessResult:
    inf_eig_g: float
    epsilon: float
    verdict: str          # global statement: "complete" | "not-established"
    region_verdict: str   # on the grid hull: "complete-on-region" | "not-established"
    hypothesis_holds: bool
    w_hess_sup: float
    v_hess_floor: float

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def completeness_check(scenario: Scenario, grid) -> CompletenessResult:
    """Metric lower bound on a grid plus the smoothness/convexity hypothesis.

    The global verdict never relies on the cited constant sqrt(C/c); it uses
    the scenario's global metric floor directly."""
    inf_eig = math.inf
    for x in grid:
        g = np.atleast_2d(scenario.phi_jet(x, 2).d2)
        inf_eig = min(inf_eig, float(np.linalg.eigvalsh(g)[0]))
    eps = math.sqrt(max(inf_eig, 0.0))
    hypothesis = (scenario.w_smooth_global
                  and math.isfinite(scenario.w_hess_sup)
                  and scenario.v_hess_floor > 0.0)
    global_ok = hypothesis or scenario.metric_floor > 0.0
    return CompletenessResult(
        inf_eig_g=inf_eig, epsilon=eps,
        verdict="complete" if global_ok else "not-established",
        region_verdict="complete-on-region" if inf_eig > 0 else "not-established",
        hypothesis_holds=hypothesis,
        w_hess_sup=scenario.w_hess_sup,
        v_hess_floor=scenario.v_hess_floor)
