"""Exactly solvable transport scenarios and their jet providers.

A scenario is a triple (mu, nu, phi): a source density exp(-V), a target
density exp(-W), and the convex potential phi whose gradient pushes mu
forward to nu, satisfying

    exp(-V) = exp(-W(grad phi)) det D^2 phi.

Every scenario here solves that equation in closed form (or, for the
custom 1D kind, by quantile coupling plus an exact jet recursion), so all
derivative data downstream is analytic.  Finite differences exist only as
an oracle in :mod:`hessmetric.jets`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammainc, gammaln

from .errors import ConfigError, DomainError, OrderUnsupported, SingularHessian
from .jets import Jet, direct_sum, jet_1d, jet_from_derivs
from .potentials import (GaussianPotential1D, Potential1D, SupportBox,
                         UniformPotential1D, all_space, ball, box, interval,
                         potential_from_descriptor)
from .transport1d import Transport1D

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def _std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class TargetComposites:
    """Derivatives of W evaluated along the transport: W^i = W_{x_i}(grad phi) etc."""

    point: np.ndarray
    order: int
    w1: np.ndarray
    w2: np.ndarray | None = None
    w3: np.ndarray | None = None


class Scenario:
    """Base: immutable transport scenario with analytic jet providers."""

    kind: str
    dim: int
    max_jet_order: int
    target_support: SupportBox
    v_convex: bool = True
    w_convex: bool = True
    w_smooth_global: bool = False
    w_hess_sup: float = math.inf
    v_hess_floor: float = 0.0
    metric_floor: float = 0.0  # global inf of min-eig D^2 phi
    target_uniform: bool = False  # nu is the uniform measure on a convex set

    @property
    def target_diameter(self) -> float:
        return self.target_support.diameter

    def phi_jet(self, x: np.ndarray, order: int) -> Jet:
        raise NotImplementedError

    def source_jet(self, p: np.ndarray, order: int) -> Jet:
        """Jet of V at p."""
        raise NotImplementedError

    def target_jet(self, p: np.ndarray, order: int) -> Jet:
        """Jet of W at p; p must lie in the interior of supp(nu)."""
        raise NotImplementedError

    def grad_phi(self, x: np.ndarray) -> np.ndarray:
        return np.atleast_1d(self.phi_jet(x, 1).d1)

    def grad_phi_batch(self, pts: np.ndarray) -> np.ndarray:
        """Transport images of an (n, dim) array of points."""
        return np.array([self.grad_phi(p) for p in np.atleast_2d(pts)])

    def mu_cdf_1d(self, x: float) -> float:
        """CDF of mu for 1D scenarios; catalog sources are standard Gaussian."""
        if self.dim != 1:
            raise ConfigError("mu_cdf_1d applies to 1D scenarios")
        return _std_normal_cdf(x)

    def metric_1d(self, t: float) -> float:
        """phi''(t) for 1D scenarios, bypassing full jet construction."""
        if self.dim != 1:
            raise ConfigError("metric_1d applies to 1D scenarios")
        return float(self.phi_jet(np.array([t]), 2).d2[0, 0])

    def metric_1d_batch(self, ts: np.ndarray) -> np.ndarray:
        """phi'' at many points of a 1D scenario."""
        return np.array([self.metric_1d(float(t))
                         for t in np.asarray(ts, dtype=float)])

    def sample_mu(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n draws from mu, shape (n, dim).  Catalog sources are Gaussian."""
        return rng.standard_normal((n, self.dim))

    def descriptor(self) -> dict:
        raise NotImplementedError

    def label(self) -> str:
        return self.kind

    def _check_order(self, order: int) -> None:
        if order > self.max_jet_order:
            raise OrderUnsupported(
                f"{self.kind}: jets available to order {self.max_jet_order}, "
                f"order {order} requested"
            )


def _as_point(x, dim: int) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.shape != (dim,):
        raise DomainError(f"point of shape {p.shape} in dimension {dim}")
    return p


class IdentityScenario(Scenario):
    """mu = nu = standard Gaussian; phi = |x|^2 / 2 and the map is the identity."""

    def __init__(self, dim: int = 1):
        self.kind = "identity"
        self.dim = int(dim)
        self.max_jet_order = 5
        self.target_support = all_space()
        self.w_smooth_global = True
        self.w_hess_sup = 1.0
        self.v_hess_floor = 1.0
        self.metric_floor = 1.0

    def phi_jet(self, x, order: int) -> Jet:
        self._check_order(order)
        x = _as_point(x, self.dim)
        derivs = [0.5 * float(x @ x), x.copy(), np.eye(self.dim)]
        for k in range(3, order + 1):
            derivs.append(np.zeros((self.dim,) * k))
        return jet_from_derivs(x, derivs[: order + 1], order)

    def _gauss_jet(self, p, order: int) -> Jet:
        p = _as_point(p, self.dim)
        d = self.dim
        derivs = [0.5 * float(p @ p) + 0.5 * d * math.log(2.0 * math.pi),
                  p.copy(), np.eye(d)]
        for k in range(3, order + 1):
            derivs.append(np.zeros((d,) * k))
        return jet_from_derivs(p, derivs[: order + 1], order)

    def source_jet(self, p, order: int) -> Jet:
        return self._gauss_jet(p, order)

    def target_jet(self, p, order: int) -> Jet:
        return self._gauss_jet(p, order)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "params": {}}

    def label(self) -> str:
        return f"identity(d={self.dim})"


class GaussianScaleScenario(Scenario):
    """Standard Gaussian to a centered Gaussian with per-axis scales sigma_i.

    The map is linear, x -> (sigma_1 x_1, ..., sigma_d x_d); the metric is
    the constant diagonal matrix diag(sigma).
    """

    def __init__(self, sigma, dim: int | None = None):
        sig = np.atleast_1d(np.asarray(sigma, dtype=float))
        if dim is not None and sig.shape == (1,):
            sig = np.full(int(dim), float(sig[0]))
        if np.any(sig <= 0):
            raise ConfigError("sigma must be positive")
        self.sigma = sig
        self.kind = "gaussian_scale"
        self.dim = sig.shape[0]
        self.max_jet_order = 5
        self.target_support = all_space()
        self.w_smooth_global = True
        self.w_hess_sup = float(np.max(1.0 / sig**2))
        self.v_hess_floor = 1.0
        self.metric_floor = float(np.min(sig))

    def phi_jet(self, x, order: int) -> Jet:
        self._check_order(order)
        x = _as_point(x, self.dim)
        derivs = [0.5 * float(self.sigma @ (x * x)), self.sigma * x,
                  np.diag(self.sigma)]
        for k in range(3, order + 1):
            derivs.append(np.zeros((self.dim,) * k))
        return jet_from_derivs(x, derivs[: order + 1], order)

    def source_jet(self, p, order: int) -> Jet:
        p = _as_point(p, self.dim)
        d = self.dim
        derivs = [0.5 * float(p @ p) + 0.5 * d * math.log(2.0 * math.pi),
                  p.copy(), np.eye(d)]
        for k in range(3, order + 1):
            derivs.append(np.zeros((d,) * k))
        return jet_from_derivs(p, derivs[: order + 1], order)

    def target_jet(self, p, order: int) -> Jet:
        p = _as_point(p, self.dim)
        s2 = self.sigma**2
        logz = float(np.sum(np.log(self.sigma * _SQRT_2PI)))
        derivs = [0.5 * float((p * p) @ (1.0 / s2)) + logz, p / s2,
                  np.diag(1.0 / s2)]
        for k in range(3, order + 1):
            derivs.append(np.zeros((self.dim,) * k))
        return jet_from_derivs(p, derivs[: order + 1], order)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": self.dim,
                "params": {"sigma": [float(s) for s in self.sigma]}}

    def label(self) -> str:
        if np.all(self.sigma == self.sigma[0]):
            return f"gaussian_scale(sigma={self.sigma[0]:g}, d={self.dim})"
        return f"gaussian_scale(sigma={list(self.sigma)}, d={self.dim})"


class GaussianToUniform1D(Scenario):
    """Standard Gaussian onto the uniform measure on (0, D).

    phi'(x) = D F(x) with F the normal CDF, so phi'' = D f and all higher
    derivatives follow from the Hermite recursion for the normal density f.
    """

    def __init__(self, D: float = 1.0):
        if D <= 0:
            raise ConfigError("D must be positive")
        self.D = float(D)
        self.kind = "gaussian_to_uniform_1d"
        self.dim = 1
        self.max_jet_order = 5
        self.target_support = interval(0.0, self.D)
        self.v_potential = GaussianPotential1D(1.0)
        self.w_potential = UniformPotential1D(0.0, self.D)
        self.w_smooth_global = False
        self.w_hess_sup = 0.0
        self.v_hess_floor = 1.0
        self.metric_floor = 0.0
        self.target_uniform = True

    def phi_derivs(self, x: float, order: int) -> tuple[float, ...]:
        f = _std_normal_pdf(x)
        D = self.D
        out = [D * (x * _std_normal_cdf(x) + f), D * _std_normal_cdf(x), D * f,
               -x * D * f, (x * x - 1.0) * D * f, (3.0 * x - x**3) * D * f]
        return tuple(out[: order + 1])

    def phi_jet(self, x, order: int) -> Jet:
        self._check_order(order)
        x = _as_point(x, 1)
        return jet_1d(float(x[0]), self.phi_derivs(float(x[0]), order), order)

    def source_jet(self, p, order: int) -> Jet:
        p = _as_point(p, 1)
        return jet_1d(float(p[0]), self.v_potential.derivs(float(p[0]), order), order)

    def target_jet(self, p, order: int) -> Jet:
        p = _as_point(p, 1)
        return jet_1d(float(p[0]), self.w_potential.derivs(float(p[0]), order), order)

    def grad_phi_batch(self, pts: np.ndarray) -> np.ndarray:
        from scipy.special import ndtr
        return self.D * ndtr(np.atleast_2d(pts))

    def metric_1d(self, t: float) -> float:
        return self.D * _std_normal_pdf(t)

    def metric_1d_batch(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return self.D * np.exp(-0.5 * ts * ts) / _SQRT_2PI

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": 1, "params": {"D": self.D}}

    def label(self) -> str:
        return f"gaussian_to_uniform_1d(D={self.D:g})"


class Custom1D(Scenario):
    """1D transport between user-specified potentials, solved numerically."""

    def __init__(self, v: Potential1D, w: Potential1D):
        self.v_potential = v
        self.w_potential = w
        self.kind = "custom_1d"
        self.dim = 1
        self.max_jet_order = 5
        self.target_support = w.support
        self.transport = Transport1D(v, w)
        self.v_convex = v.convex
        self.w_convex = w.convex
        self.w_smooth_global = w.smooth_on_line
        self.w_hess_sup = w.hess_sup if w.smooth_on_line else math.inf
        self.v_hess_floor = v.hess_inf
        self.metric_floor = 0.0
        self.target_uniform = isinstance(w, UniformPotential1D)

    def phi_derivs(self, x: float, order: int) -> tuple[float, ...]:
        return self.transport.derivs(x, order)

    def phi_jet(self, x, order: int) -> Jet:
        self._check_order(order)
        x = _as_point(x, 1)
        return self.transport.jet(float(x[0]), order)

    def source_jet(self, p, order: int) -> Jet:
        p = _as_point(p, 1)
        return jet_1d(float(p[0]), self.v_potential.derivs(float(p[0]), order), order)

    def target_jet(self, p, order: int) -> Jet:
        p = _as_point(p, 1)
        return jet_1d(float(p[0]), self.w_potential.derivs(float(p[0]), order), order)

    def sample_mu(self, rng: np.random.Generator, n: int) -> np.ndarray:
        cdf = self.transport._cdf_mu
        u = rng.uniform(1e-12, 1.0 - 1e-12, size=n) * cdf.total
        return np.array([[cdf.quantile(p)] for p in u])

    def mu_cdf_1d(self, x: float) -> float:
        cdf = self.transport._cdf_mu
        return cdf(x) / cdf.total

    def metric_1d(self, t: float) -> float:
        return self.transport.derivs(float(t), 2)[2]

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": 1,
                "params": {"v": self.v_potential.descriptor(),
                           "w": self.w_potential.descriptor()}}

    def label(self) -> str:
        return f"custom_1d({self.v_potential.name} -> {self.w_potential.name})"


class ProductScenario(Scenario):
    """Product of 1D scenarios; jets are direct sums (mixed partials vanish)."""

    def __init__(self, factors: list[Scenario]):
        if not factors or any(f.dim != 1 for f in factors):
            raise ConfigError("product factors must be one-dimensional scenarios")
        self.factors = list(factors)
        self.kind = "product"
        self.dim = len(factors)
        self.max_jet_order = min(f.max_jet_order for f in factors)
        self.target_support = self._product_support()
        self.v_convex = all(f.v_convex for f in factors)
        self.w_convex = all(f.w_convex for f in factors)
        self.w_smooth_global = all(f.w_smooth_global for f in factors)
        self.w_hess_sup = max(f.w_hess_sup for f in factors)
        self.v_hess_floor = min(f.v_hess_floor for f in factors)
        self.metric_floor = min(f.metric_floor for f in factors)
        self.target_uniform = all(f.target_uniform for f in factors)

    def _product_support(self) -> SupportBox:
        los, his = [], []
        for f in self.factors:
            sup = f.target_support
            if sup.kind != "interval":
                return all_space()
            los.append(float(sup.lo[0]))
            his.append(float(sup.hi[0]))
        return box(np.array(los), np.array(his))

    def _factor_jets(self, x: np.ndarray, order: int, which: str) -> list[Jet]:
        out = []
        for i, f in enumerate(self.factors):
            p = np.array([x[i]])
            if which == "phi":
                out.append(f.phi_jet(p, order))
            elif which == "v":
                out.append(f.source_jet(p, order))
            else:
                out.append(f.target_jet(p, order))
        return out

    def phi_jet(self, x, order: int) -> Jet:
        self._check_order(order)
        x = _as_point(x, self.dim)
        return direct_sum(self._factor_jets(x, order, "phi"), x, order)

    def source_jet(self, p, order: int) -> Jet:
        p = _as_point(p, self.dim)
        return direct_sum(self._factor_jets(p, order, "v"), p, order)

    def target_jet(self, p, order: int) -> Jet:
        p = _as_point(p, self.dim)
        return direct_sum(self._factor_jets(p, order, "w"), p, order)

    def sample_mu(self, rng: np.random.Generator, n: int) -> np.ndarray:
        cols = [f.sample_mu(rng, n)[:, 0] for f in self.factors]
        return np.column_stack(cols)

    def grad_phi_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        cols = [f.grad_phi_batch(pts[:, i:i + 1])[:, 0]
                for i, f in enumerate(self.factors)]
        return np.column_stack(cols)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": self.dim,
                "params": {"factors": [f.descriptor() for f in self.factors]}}

    def label(self) -> str:
        return "product(" + ", ".join(f.label() for f in self.factors) + ")"


class RadialGaussianToBall(Scenario):
    """Standard Gaussian in R^d onto the uniform measure on a ball of diameter D.

    The map is radial, grad phi(x) = rho(r) x / r with rho(r) = R u(r)^{1/d},
    u the chi(d) CDF and R = D/2.  Jets are exposed to order 2 only:

        D^2 phi = rho'(r) e_r (x) e_r + (rho(r)/r) (Id - e_r (x) e_r).
    """

    def __init__(self, dim: int, D: float = 1.0):
        if D <= 0:
            raise ConfigError("D must be positive")
        self.dim = int(dim)
        self.D = float(D)
        self.radius = 0.5 * self.D
        self.kind = "radial_gaussian_to_ball"
        self.max_jet_order = 2
        self.target_support = ball(self.radius)
        self.w_smooth_global = False
        self.w_hess_sup = 0.0
        self.v_hess_floor = 1.0
        self.metric_floor = 0.0
        self.target_uniform = True
        d = self.dim
        self._log_ball_vol = 0.5 * d * math.log(math.pi) + d * math.log(self.radius) \
            - gammaln(0.5 * d + 1.0)
        # slope of rho at the origin: rho(r) ~ slope0 * r
        self._slope0 = self.radius * math.sqrt(0.5) * math.exp(-gammaln(0.5 * d + 1.0) / d)

    def _chi_cdf(self, r: float) -> float:
        return float(gammainc(0.5 * self.dim, 0.5 * r * r))

    def _chi_pdf(self, r: float) -> float:
        d = self.dim
        logp = (d - 1.0) * math.log(r) - 0.5 * r * r \
            - (0.5 * d - 1.0) * math.log(2.0) - gammaln(0.5 * d)
        return math.exp(logp)

    def rho(self, r: float) -> float:
        if r < 1e-3:
            return self._slope0 * r * (1.0 - r * r / (2.0 * (self.dim + 2.0)))
        return self.radius * self._chi_cdf(r) ** (1.0 / self.dim)

    def rho_prime(self, r: float) -> float:
        if r < 1e-3:
            return self._slope0 * (1.0 - 3.0 * r * r / (2.0 * (self.dim + 2.0)))
        u = self._chi_cdf(r)
        return self.radius / self.dim * u ** (1.0 / self.dim - 1.0) * self._chi_pdf(r)

    def phi_jet(self, x, order: int) -> Jet:
        self._check_order(order)
        x = _as_point(x, self.dim)
        r = float(np.linalg.norm(x))
        d0, err = quad(self.rho, 0.0, r, epsabs=1e-12, limit=200)
        derivs: list = [d0]
        if order >= 1:
            derivs.append(self.rho(r) / r * x if r > 0 else np.zeros(self.dim))
        if order >= 2:
            if r > 0:
                er = x / r
                proj = np.outer(er, er)
                derivs.append(self.rho_prime(r) * proj
                              + self.rho(r) / r * (np.eye(self.dim) - proj))
            else:
                derivs.append(self._slope0 * np.eye(self.dim))
        return jet_from_derivs(x, derivs, order)

    def grad_phi_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        r = np.linalg.norm(pts, axis=1)
        r_safe = np.where(r < 1e-12, 1.0, r)
        u = gammainc(0.5 * self.dim, 0.5 * r**2)
        rho = self.radius * u ** (1.0 / self.dim)
        return (rho / r_safe)[:, None] * pts

    def source_jet(self, p, order: int) -> Jet:
        p = _as_point(p, self.dim)
        d = self.dim
        derivs = [0.5 * float(p @ p) + 0.5 * d * math.log(2.0 * math.pi),
                  p.copy(), np.eye(d)]
        for k in range(3, order + 1):
            derivs.append(np.zeros((d,) * k))
        return jet_from_derivs(p, derivs[: order + 1], order)

    def target_jet(self, p, order: int) -> Jet:
        p = _as_point(p, self.dim)
        if not self.target_support.contains_interior(p):
            raise DomainError("point outside the interior of the target ball")
        derivs: list = [self._log_ball_vol]
        for k in range(1, order + 1):
            derivs.append(np.zeros((self.dim,) * k))
        return jet_from_derivs(p, derivs, order)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "params": {"D": self.D}}

    def label(self) -> str:
        return f"radial_gaussian_to_ball(d={self.dim}, D={self.D:g})"


# ---------------------------------------------------------------------------
# operations on scenarios


def jets_phi(scenario: Scenario, x, order: int) -> Jet:
    """Analytic jet of the transport potential at x."""
    return scenario.phi_jet(x, order)


def jets_potential(scenario: Scenario, which: str, p, order: int) -> Jet:
    """Jet of the source potential V or the target potential W at p."""
    if which == "source_V":
        return scenario.source_jet(p, order)
    if which == "target_W":
        return scenario.target_jet(p, order)
    raise ConfigError(f"which must be 'source_V' or 'target_W', got {which!r}")


def _log_det_pd(m: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        raise SingularHessian("Hessian of phi is not positive definite")
    return float(logdet)


def ma_residual(scenario: Scenario, x) -> float:
    """V(x) - W(grad phi(x)) + log det D^2 phi(x); zero for exact scenarios."""
    jet = scenario.phi_jet(x, 2)
    v = scenario.source_jet(x, 0).d0
    w = scenario.target_jet(jet.d1, 0).d0
    return v - w + _log_det_pd(np.atleast_2d(jet.d2))


def ma1807_residual(scenario: Scenario, x,
                    comps: TargetComposites | None = None) -> np.ndarray:
    """Residual vector of the differentiated change-of-variables identity,

        g^{jk} phi_{ijk} + V_i - d_i(W o grad phi)  per component i,

    where d_i(W o grad phi) = g_{ij} W^j from the composites.
    """
    jet = scenario.phi_jet(x, 3)
    g = np.atleast_2d(jet.d2)
    g_inv = np.linalg.inv(g)
    v1 = np.atleast_1d(scenario.source_jet(x, 1).d1)
    if comps is None:
        comps = target_composites(scenario, x, order=1, mode="direct")
    contraction = np.einsum("jk,ijk->i", g_inv, jet.d3)
    return contraction + v1 - g @ comps.w1


def target_composites(scenario: Scenario, x, order: int = 2,
                      mode: str = "direct") -> TargetComposites:
    """W-composites W^i, W^{ij}, W^{ijk} at grad phi(x).

    mode="direct" evaluates the target potential's jets at the image point;
    mode="derived" recovers them from the transport identity
    log det D^2 phi = W(grad phi) - V by repeated differentiation (order-k
    composites need phi-jets to order k+2).
    """
    if not 1 <= order <= 3:
        raise OrderUnsupported("composites available for orders 1..3")
    x = _as_point(x, scenario.dim)
    if mode == "direct":
        y = scenario.grad_phi(x)
        wj = scenario.target_jet(y, order)
        return TargetComposites(point=x, order=order, w1=np.atleast_1d(wj.d1),
                                w2=wj.d2 if order >= 2 else None,
                                w3=wj.d3 if order >= 3 else None)
    if mode != "derived":
        raise ConfigError(f"mode must be 'direct' or 'derived', got {mode!r}")

    jet = scenario.phi_jet(x, order + 2)
    vj = scenario.source_jet(x, order)
    g = np.atleast_2d(jet.d2)
    gi = np.linalg.inv(g)
    p3 = jet.d3
    v1 = np.atleast_1d(vj.d1)

    # derivatives of h = W o grad phi = V + log det D^2 phi
    h1 = v1 + np.einsum("ij,ijk->k", gi, p3)
    w1 = gi @ h1
    if order == 1:
        return TargetComposites(point=x, order=1, w1=w1)

    p4 = jet.d4
    p3_up_l = np.einsum("ia,jb,abl->ijl", gi, gi, p3)  # phi^{ij}_l
    h2 = vj.d2 + np.einsum("ij,ijkl->kl", gi, p4) \
        - np.einsum("ijl,ijk->kl", p3_up_l, p3)
    w2 = gi @ (h2 - np.einsum("a,akl->kl", w1, p3)) @ gi
    if order == 2:
        return TargetComposites(point=x, order=2, w1=w1, w2=w2)

    p5 = jet.d5
    # d_m of g^{ij} phi_{ijkl}  and of  phi^{ij}_l phi_{ijk}
    t1 = -np.einsum("ijm,ijkl->klm", p3_up_l, p4) \
        + np.einsum("ij,ijklm->klm", gi, p5)
    dgi = -np.einsum("ip,aq,pqm->iam", gi, gi, p3)  # d_m g^{ia}
    d_p3up = (np.einsum("iam,jb,abl->ijlm", dgi, gi, p3)
              + np.einsum("ia,jbm,abl->ijlm", gi, dgi, p3)
              + np.einsum("ia,jb,ablm->ijlm", gi, gi, p4))
    t2 = np.einsum("ijlm,ijk->klm", d_p3up, p3) \
        + np.einsum("ijl,ijkm->klm", p3_up_l, p4)
    h3 = vj.d3 + t1 - t2
    rhs = h3 - np.einsum("ab,akm,bl->klm", w2, p3, g) \
        - np.einsum("ab,ak,blm->klm", w2, g, p3) \
        - np.einsum("ab,bm,akl->klm", w2, g, p3) \
        - np.einsum("a,aklm->klm", w1, p4)
    w3 = np.einsum("ak,bl,cm,klm->abc", gi, gi, gi, rhs)
    return TargetComposites(point=x, order=3, w1=w1, w2=w2, w3=w3)


def legendre_dual_jets(phi_jet: Jet) -> Jet:
    """Jets of the Legendre dual psi at y = grad phi(x), to the input order (<= 4).

    D^2 psi(y) = (D^2 phi)^{-1}(x); the third derivative is the fully
    raised tensor -phi^{abc}; the fourth follows from differentiating the
    reciprocity D^2 phi . D^2 psi(grad phi) = Id once more.
    """
    if phi_jet.order < 2 or phi_jet.order > 4:
        raise OrderUnsupported("legendre_dual_jets needs input order 2..4")
    g = np.atleast_2d(phi_jet.d2)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise SingularHessian("d2 of the input jet must be positive definite")
    gi = np.linalg.inv(g)
    x = phi_jet.point
    y = np.atleast_1d(phi_jet.d1)
    derivs: list = [float(x @ y) - phi_jet.d0, x.copy(), gi]
    if phi_jet.order >= 3:
        r3 = np.einsum("ai,bj,ck,ijk->abc", gi, gi, gi, phi_jet.d3)
        derivs.append(-r3)
    if phi_jet.order >= 4:
        l3 = np.einsum("bj,mk,ijk->ibm", gi, gi, phi_jet.d3)  # one lower, two raised
        r4 = np.einsum("ai,bj,mk,nl,ijkl->abmn", gi, gi, gi, gi, phi_jet.d4)
        term = (np.einsum("ain,ibm->abmn", r3, l3)
                + np.einsum("bin,iam->abmn", r3, l3)
                + np.einsum("min,iab->abmn", r3, l3))
        derivs.append(term - r4)
    return jet_from_derivs(y, derivs, phi_jet.order)


# ---------------------------------------------------------------------------
# scenario construction and the catalog


def scenario_from_descriptor(desc: dict) -> Scenario:
    """Build a scenario from the JSON descriptor {"kind", "dim", "params"}."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError("descriptor must be an object with a 'kind' field")
    kind = desc["kind"]
    params = desc.get("params", {})
    dim = desc.get("dim")
    try:
        if kind == "identity":
            return IdentityScenario(dim=dim or 1)
        if kind == "gaussian_scale":
            return GaussianScaleScenario(params.get("sigma", 1.0), dim=dim)
        if kind == "gaussian_to_uniform_1d":
            return GaussianToUniform1D(D=params.get("D", 1.0))
        if kind == "product":
            factors = [scenario_from_descriptor(f) for f in params["factors"]]
            return ProductScenario(factors)
        if kind == "radial_gaussian_to_ball":
            return RadialGaussianToBall(dim=dim, D=params.get("D", 1.0))
        if kind == "custom_1d":
            return Custom1D(potential_from_descriptor(params["v"]),
                            potential_from_descriptor(params["w"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad descriptor for kind {kind!r}: {exc}") from exc
    raise ConfigError(f"unknown scenario kind {kind!r}")


CATALOG: dict[str, dict] = {
    "identity_1d": {"kind": "identity", "dim": 1, "params": {}},
    "identity_3d": {"kind": "identity", "dim": 3, "params": {}},
    "gaussian_scale_2d": {"kind": "gaussian_scale", "dim": 2,
                          "params": {"sigma": [4.0, 4.0]}},
    "gaussian_scale_aniso": {"kind": "gaussian_scale", "dim": 2,
                             "params": {"sigma": [2.0, 0.5]}},
    "gaussian_to_uniform_1d": {"kind": "gaussian_to_uniform_1d", "dim": 1,
                               "params": {"D": 1.0}},
    "gaussian_to_uniform_1d_D2": {"kind": "gaussian_to_uniform_1d", "dim": 1,
                                  "params": {"D": 2.0}},
    "product_2d": {"kind": "product", "dim": 2, "params": {"factors": [
        {"kind": "gaussian_to_uniform_1d", "dim": 1, "params": {"D": 1.0}},
        {"kind": "gaussian_to_uniform_1d", "dim": 1, "params": {"D": 1.0}},
    ]}},
    "product_mixed_2d": {"kind": "product", "dim": 2, "params": {"factors": [
        {"kind": "gaussian_to_uniform_1d", "dim": 1, "params": {"D": 0.8}},
        {"kind": "gaussian_to_uniform_1d", "dim": 1, "params": {"D": 1.6}},
    ]}},
    "radial_3d": {"kind": "radial_gaussian_to_ball", "dim": 3, "params": {"D": 1.0}},
    "custom_quartic_1d": {"kind": "custom_1d", "dim": 1, "params": {
        "v": {"family": "gaussian", "scale": 1.0},
        "w": {"family": "quartic", "a": 1.0, "b": 0.1},
    }},
    "custom_uniform_1d": {"kind": "custom_1d", "dim": 1, "params": {
        "v": {"family": "gaussian", "scale": 1.0},
        "w": {"family": "uniform", "a": 0.0, "b": 1.0},
    }},
}


def catalog_names() -> list[str]:
    return list(CATALOG.keys())


def catalog_scenario(name: str) -> Scenario:
    if name not in CATALOG:
        raise ConfigError(f"unknown catalog scenario {name!r}")
    return scenario_from_descriptor(CATALOG[name])


def catalog_scenarios() -> list[Scenario]:
    return [catalog_scenario(name) for name in CATALOG]
