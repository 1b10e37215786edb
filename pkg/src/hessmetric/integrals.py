"""Integral inequalities for the operator-norm field Lambda = ||D^2 phi||.

Covers the weighted eigenvalue inequality

    int v_+ f(Lambda) dmu >= int w_-(grad phi) Lambda^2 f(Lambda) dmu
        + int (f'(Lambda) + f(Lambda)/Lambda) <grad_M Lambda, grad_M Lambda>_M dmu,

its f = 1 specialization (the unit bound on 4 int |grad_M sqrt(Lambda)|^2),
the variance estimate int Lambda dmu - (int sqrt(Lambda) dmu)^2 <= c D,
reverse Hoelder inequalities with universal constants for 4(p+1) > p^2,
the a priori trace bound, and empirical Rayleigh-quotient Poincare
estimates.  Unquantified universal constants are reported as fitted
ratios with D-sweeps, never asserted against a specific number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import ConfigError, InvalidExponent, SeedRequired
from .fields import TestField
from .quadrature import mu_integral_1d, mu_tensor_integral
from .scenarios import Scenario, target_composites
from .seeding import stream

EIG_GAP_TOL = 1e-8


@dataclass
class IntegralReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    method: str
    tolerance: float
    passed: bool
    seed: int | None = None
    extras: dict = dc_field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
               "slack": self.slack, "method": self.method,
               "tolerance": self.tolerance, "pass": self.passed,
               "seed": self.seed}
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class FunctionOfLambda:
    """A non-negative differentiable test function of the eigenvalue field."""

    name: str
    f: Callable[[float], float]
    df: Callable[[float], float]


F_ONE = FunctionOfLambda("1", lambda t: 1.0, lambda t: 0.0)
F_ID = FunctionOfLambda("lambda", lambda t: t, lambda t: 1.0)
F_SQUARE = FunctionOfLambda("lambda^2", lambda t: t * t, lambda t: 2.0 * t)


def lambda_field(scenario: Scenario, x) -> float:
    """Top eigenvalue of D^2 phi(x) (= operator norm; the matrix is PD)."""
    g = np.atleast_2d(scenario.phi_jet(x, 2).d2)
    return float(np.linalg.eigvalsh(g)[-1])


def lambda_metric_grad_sq(scenario: Scenario, x) -> tuple[float, bool]:
    """<grad_M Lambda, grad_M Lambda>_M via the analytic derivative of a
    simple top eigenvalue; flags eigenvalue crossings (gap < 1e-8)."""
    jet = scenario.phi_jet(x, 3)
    g = np.atleast_2d(jet.d2)
    vals, vecs = np.linalg.eigh(g)
    crossed = g.shape[0] > 1 and (vals[-1] - vals[-2]) < EIG_GAP_TOL
    v = vecs[:, -1]
    grad = np.einsum("a,b,abi->i", v, v, jet.d3)
    g_inv = np.linalg.inv(g)
    return float(grad @ g_inv @ grad), crossed


def integrate(fn: Callable[[np.ndarray], float], scenario: Scenario,
              side: str = "mu", method: str = "quadrature",
              samples: int = 100_000, seed: int | None = None,
              tol: float = 1e-10) -> IntegralReport:
    """Integral of a pointwise field against mu or nu.

    nu-side integrals are transported: int f dnu = int f(grad phi) dmu.
    Quadrature is adaptive in 1D and tensor-product otherwise; Monte Carlo
    reports the standard error and requires a seed.
    """
    if side not in ("mu", "nu"):
        raise ConfigError("side must be 'mu' or 'nu'")

    def eff(p: np.ndarray) -> float:
        if side == "nu":
            return fn(scenario.grad_phi(p))
        return fn(p)

    if method == "quadrature":
        if scenario.dim == 1:
            res = mu_integral_1d(scenario, lambda t: eff(np.array([t])), tol=tol)
        else:
            res = mu_tensor_integral(scenario, eff)
        return IntegralReport(name="integral", lhs=res.value, rhs=0.0, slack=0.0,
                              method="quadrature", tolerance=tol, passed=True,
                              extras={"error_bound": res.error_bound})
    if method != "monte_carlo":
        raise ConfigError(f"unknown method {method!r}")
    if seed is None:
        raise SeedRequired("Monte-Carlo integration needs a seed")
    rng = stream(seed, "integrate", scenario.label())
    pts = scenario.sample_mu(rng, samples)
    vals = np.array([eff(p) for p in pts])
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(samples))
    return IntegralReport(name="integral", lhs=mean, rhs=0.0, slack=0.0,
                          method="monte_carlo", tolerance=tol, passed=True,
                          seed=seed, extras={"standard_error": stderr})


def _v_plus(scenario: Scenario, x: np.ndarray) -> float:
    v2 = np.atleast_2d(scenario.source_jet(x, 2).d2)
    return float(np.linalg.eigvalsh(v2)[-1])


def _w_minus_along(scenario: Scenario, x: np.ndarray) -> float:
    w2 = target_composites(scenario, x, order=2, mode="direct").w2
    return float(np.linalg.eigvalsh(np.atleast_2d(w2))[0])


def _mu_quad(scenario: Scenario, pointwise: Callable[[np.ndarray], float],
             tol: float = 1e-10) -> float:
    if scenario.dim == 1:
        return mu_integral_1d(scenario, lambda t: pointwise(np.array([t])),
                              tol=tol).value
    return mu_tensor_integral(scenario, pointwise).value


def theorem61_check(scenario: Scenario, f_spec: FunctionOfLambda,
                    tol: float = 1e-6) -> IntegralReport:
    """The weighted inequality for a non-negative differentiable f."""
    crossings = [0]

    def lhs_fn(p: np.ndarray) -> float:
        return _v_plus(scenario, p) * f_spec.f(lambda_field(scenario, p))

    def rhs_fn(p: np.ndarray) -> float:
        lam = lambda_field(scenario, p)
        grad_sq, crossed = lambda_metric_grad_sq(scenario, p)
        if crossed:
            crossings[0] += 1
        return (_w_minus_along(scenario, p) * lam * lam * f_spec.f(lam)
                + (f_spec.df(lam) + f_spec.f(lam) / lam) * grad_sq)

    lhs = _mu_quad(scenario, lhs_fn)
    rhs = _mu_quad(scenario, rhs_fn)
    slack = lhs - rhs
    return IntegralReport(name=f"theorem_eigenvalue[f={f_spec.name}]", lhs=lhs,
                          rhs=rhs, slack=slack, method="quadrature",
                          tolerance=tol, passed=bool(slack >= -tol),
                          extras={"crossings_skipped": crossings[0]})


def lm_check(scenario: Scenario, tol: float = 1e-5) -> IntegralReport:
    """4 int <grad_M sqrt(Lambda), grad_M sqrt(Lambda)>_M dmu <= 1."""

    def fn(p: np.ndarray) -> float:
        lam = lambda_field(scenario, p)
        grad_sq, _ = lambda_metric_grad_sq(scenario, p)
        return grad_sq / lam

    value = _mu_quad(scenario, fn)
    return IntegralReport(name="unit_gradient_bound", lhs=1.0, rhs=value,
                          slack=1.0 - value, method="quadrature", tolerance=tol,
                          passed=bool(value <= 1.0 + tol),
                          extras={"value": value})


def variance_estimate(scenario: Scenario, method: str = "quadrature",
                      seed: int | None = None) -> IntegralReport:
    """int Lambda dmu - (int sqrt(Lambda) dmu)^2, reported with the fitted
    ratio against the target diameter (the universal constant is never
    asserted)."""
    diam = scenario.target_diameter

    def lam(p):
        return lambda_field(scenario, p)

    def sqrt_lam(p):
        return math.sqrt(lambda_field(scenario, p))

    if method == "quadrature":
        first = _mu_quad(scenario, lam)
        second = _mu_quad(scenario, sqrt_lam)
    else:
        if seed is None:
            raise SeedRequired("Monte-Carlo variance estimate needs a seed")
        rng = stream(seed, "variance", scenario.label())
        pts = scenario.sample_mu(rng, 200_000)
        vals = np.array([lam(p) for p in pts])
        first = float(np.mean(vals))
        second = float(np.mean(np.sqrt(vals)))
    lhs = first - second * second
    ratio = lhs / diam if math.isfinite(diam) else float("nan")
    return IntegralReport(name="lambda_variance", lhs=lhs, rhs=0.0, slack=0.0,
                          method=method, tolerance=0.0, passed=True, seed=seed,
                          extras={"diameter": diam, "fitted_ratio": ratio})


P_MAX = 2.0 + 2.0 * math.sqrt(2.0)


def reverse_holder(scenario: Scenario, p: float,
                   tol: float = 1e-9) -> IntegralReport:
    """int Lambda^p dgamma <= C_p (int Lambda^{p/2} dgamma)^2 with
    C_p = A/(A-1), A = 4(p+1)/p^2, valid for 0 < p < 2 + 2 sqrt(2)."""
    if not 0.0 < p < P_MAX:
        raise InvalidExponent(f"p must lie in (0, {P_MAX}), got {p}")
    a_const = 4.0 * (p + 1.0) / (p * p)
    c_p = a_const / (a_const - 1.0)
    full = _mu_quad(scenario, lambda x: lambda_field(scenario, x) ** p)
    half = _mu_quad(scenario, lambda x: lambda_field(scenario, x) ** (0.5 * p))
    ratio = full / (half * half)
    slack = c_p - ratio
    return IntegralReport(name=f"reverse_holder[p={p:g}]", lhs=full,
                          rhs=c_p * half * half, slack=slack,
                          method="quadrature", tolerance=tol,
                          passed=bool(slack >= -tol),
                          extras={"ratio": ratio, "C_p": c_p})


def vw_check(scenario: Scenario, tol: float = 1e-8) -> IntegralReport:
    """int |grad V|^2 dmu >= int Tr[D^2 phi W''(grad phi) D^2 phi] dmu."""

    def lhs_fn(x: np.ndarray) -> float:
        v1 = np.atleast_1d(scenario.source_jet(x, 1).d1)
        return float(v1 @ v1)

    def rhs_fn(x: np.ndarray) -> float:
        g = np.atleast_2d(scenario.phi_jet(x, 2).d2)
        w2 = target_composites(scenario, x, order=2, mode="direct").w2
        return float(np.trace(g @ w2 @ g))

    lhs = _mu_quad(scenario, lhs_fn)
    rhs = _mu_quad(scenario, rhs_fn)
    slack = lhs - rhs
    return IntegralReport(name="gradient_trace_bound", lhs=lhs, rhs=rhs,
                          slack=slack, method="quadrature", tolerance=tol,
                          passed=bool(slack >= -tol))


def poincare_rayleigh(scenario: Scenario, test_fields: list[TestField],
                      tol: float = 1e-9) -> IntegralReport:
    """Smallest Rayleigh quotient int |grad_M f|^2 dmu / Var_mu(f) over the
    field family; the empirical Poincare constant is min quotient times D."""
    if not test_fields:
        raise ConfigError("poincare_rayleigh needs at least one test field")
    diam = scenario.target_diameter
    quotients = {}
    for f in test_fields:
        def grad_fn(x: np.ndarray, f=f) -> float:
            fj = f.jet(x)
            g_inv = np.linalg.inv(np.atleast_2d(scenario.phi_jet(x, 2).d2))
            f1 = np.atleast_1d(fj.d1)
            return float(f1 @ g_inv @ f1)

        energy = _mu_quad(scenario, grad_fn)
        mean = _mu_quad(scenario, lambda x, f=f: f.value(x))
        second = _mu_quad(scenario, lambda x, f=f: f.value(x) ** 2)
        var = second - mean * mean
        if var <= 1e-14:
            raise ConfigError(f"test field {f.name} has vanishing variance")
        quotients[f.name] = energy / var
    min_q = min(quotients.values())
    c_emp = min_q * diam if math.isfinite(diam) else float("nan")
    return IntegralReport(name="poincare_rayleigh", lhs=min_q, rhs=0.0,
                          slack=min_q, method="quadrature", tolerance=tol,
                          passed=bool(min_q > 0.0),
                          extras={"quotients": quotients,
                                  "empirical_constant": c_emp,
                                  "diameter": diam})
