"""Potentials of the source and target measures, and their supports.

A measure enters as a density ``exp(-U)``; this module supplies the handful
of 1D potential families the scenario catalog is built from, each with exact
derivatives up to order 4.  Uniform potentials are exactly constant strictly
inside their support; evaluation at or beyond the boundary is an error,
never an extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, QuadratureFailure

_INTERIOR_TOL = 1e-12


@dataclass(frozen=True)
class SupportBox:
    """Support of a measure: all of space, an interval, a ball, or a box."""

    kind: str  # "all_space" | "interval" | "ball" | "box"
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    radius: float | None = None

    @property
    def diameter(self) -> float:
        if self.kind == "all_space":
            return math.inf
        if self.kind == "interval":
            return float(self.hi[0] - self.lo[0])
        if self.kind == "ball":
            return 2.0 * self.radius
        if self.kind == "box":
            return float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))
        raise ValueError(f"unknown support kind {self.kind!r}")

    def contains_interior(self, p: np.ndarray, tol: float = 0.0) -> bool:
        """Strict interior membership (pad inward with tol > 0 if needed)."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if self.kind == "all_space":
            return True
        if self.kind in ("interval", "box"):
            return bool(np.all(p > self.lo + tol) and np.all(p < self.hi - tol))
        if self.kind == "ball":
            return bool(np.linalg.norm(p) < self.radius - tol)
        raise ValueError(f"unknown support kind {self.kind!r}")

    def contains(self, p: np.ndarray, slack: float = _INTERIOR_TOL) -> bool:
        """Closed-support membership with outward slack."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if self.kind == "all_space":
            return True
        if self.kind in ("interval", "box"):
            return bool(np.all(p >= self.lo - slack) and np.all(p <= self.hi + slack))
        if self.kind == "ball":
            return bool(np.linalg.norm(p) <= self.radius + slack)
        raise ValueError(f"unknown support kind {self.kind!r}")


def all_space() -> SupportBox:
    return SupportBox(kind="all_space")


def interval(a: float, b: float) -> SupportBox:
    return SupportBox(kind="interval", lo=np.array([float(a)]), hi=np.array([float(b)]))


def ball(radius: float) -> SupportBox:
    return SupportBox(kind="ball", radius=float(radius))


def box(lo: np.ndarray, hi: np.ndarray) -> SupportBox:
    return SupportBox(kind="box", lo=np.asarray(lo, dtype=float),
                      hi=np.asarray(hi, dtype=float))


class Potential1D:
    """A 1D potential U with exact derivatives; density exp(-U) integrates to 1."""

    name: str = "potential"
    support: SupportBox
    convex: bool = True
    smooth_on_line: bool = True  # smooth and finite on all of R
    hess_sup: float = math.inf   # sup of U'' (over the support interior)
    hess_inf: float = 0.0        # inf of U''

    def derivs(self, x: float, order: int) -> tuple[float, ...]:
        """(U(x), U'(x), ..., U^(order)(x)); DomainError outside the interior."""
        raise NotImplementedError

    def value(self, x: float) -> float:
        return self.derivs(x, 0)[0]

    def value_array(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self.value(float(x)) for x in np.asarray(xs)])

    def descriptor(self) -> dict:
        raise NotImplementedError

    def _check_interior(self, x: float) -> None:
        if not self.support.contains_interior(np.array([x])):
            raise DomainError(
                f"{self.name}: point {x} outside the interior of the support"
            )


class GaussianPotential1D(Potential1D):
    """U(x) = x^2 / (2 s^2) + log(s sqrt(2 pi)): the N(0, s^2) potential."""

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        self.name = f"gaussian(scale={scale:g})"
        self.support = all_space()
        self.convex = True
        self.smooth_on_line = True
        self.hess_sup = 1.0 / self.scale**2
        self.hess_inf = 1.0 / self.scale**2

    def derivs(self, x: float, order: int) -> tuple[float, ...]:
        s2 = self.scale**2
        out = [0.5 * x * x / s2 + math.log(self.scale * math.sqrt(2.0 * math.pi)),
               x / s2, 1.0 / s2, 0.0, 0.0]
        return tuple(out[: order + 1])

    def value_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return 0.5 * xs * xs / self.scale**2 \
            + math.log(self.scale * math.sqrt(2.0 * math.pi))

    def descriptor(self) -> dict:
        return {"family": "gaussian", "scale": self.scale}


class UniformPotential1D(Potential1D):
    """Constant potential log(b - a) strictly inside (a, b); the uniform measure."""

    def __init__(self, a: float, b: float):
        if not b > a:
            raise ValueError("need b > a")
        self.a, self.b = float(a), float(b)
        self.name = f"uniform({a:g},{b:g})"
        self.support = interval(a, b)
        self.convex = True
        self.smooth_on_line = False
        self.hess_sup = 0.0
        self.hess_inf = 0.0

    def derivs(self, x: float, order: int) -> tuple[float, ...]:
        self._check_interior(x)
        out = [math.log(self.b - self.a), 0.0, 0.0, 0.0, 0.0]
        return tuple(out[: order + 1])

    def descriptor(self) -> dict:
        return {"family": "uniform", "a": self.a, "b": self.b}


class QuarticPotential1D(Potential1D):
    """U(x) = a x^2 / 2 + b x^4 + log Z, normalized by quadrature; convex for a, b >= 0."""

    def __init__(self, a: float = 1.0, b: float = 0.0):
        if a < 0 or b < 0 or (a == 0 and b == 0):
            raise ValueError("need a, b >= 0 and not both zero")
        self.a, self.b = float(a), float(b)
        z, err = quad(lambda t: math.exp(-0.5 * self.a * t * t - self.b * t**4),
                      -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)
        if err > 1e-10:
            raise QuadratureFailure("normalization integral did not converge")
        self.log_z = math.log(z)
        self.name = f"quartic(a={a:g},b={b:g})"
        self.support = all_space()
        self.convex = True
        self.smooth_on_line = True
        self.hess_sup = math.inf if self.b > 0 else self.a
        self.hess_inf = self.a

    def derivs(self, x: float, order: int) -> tuple[float, ...]:
        a, b = self.a, self.b
        out = [0.5 * a * x * x + b * x**4 + self.log_z,
               a * x + 4.0 * b * x**3,
               a + 12.0 * b * x * x,
               24.0 * b * x,
               24.0 * b]
        return tuple(out[: order + 1])

    def value_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return 0.5 * self.a * xs * xs + self.b * xs**4 + self.log_z

    def descriptor(self) -> dict:
        return {"family": "quartic", "a": self.a, "b": self.b}


_FAMILIES = {"gaussian": GaussianPotential1D, "uniform": UniformPotential1D,
             "quartic": QuarticPotential1D}


def potential_from_descriptor(desc: dict) -> Potential1D:
    kind = desc.get("family")
    if kind not in _FAMILIES:
        raise ValueError(f"unknown potential family {kind!r}")
    kwargs = {k: v for k, v in desc.items() if k != "family"}
    return _FAMILIES[kind](**kwargs)
