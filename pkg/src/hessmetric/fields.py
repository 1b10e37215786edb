"""Analytic scalar test fields with exact jets to order 2.

Bump fields are the fixed polynomial (1 - |u|^2)^3 rescaled to their
support, so they vanish together with two derivatives at the boundary and
contribute no test-field error to quadrature checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .jets import Jet, jet_from_derivs
from .potentials import SupportBox, all_space, ball, interval
from .scenarios import Scenario


@dataclass(frozen=True)
class TestField:
    """Scalar field on R^d with analytic jets to order 2."""

    name: str
    support: SupportBox
    jet_fn: Callable[[np.ndarray], Jet]

    def jet(self, x) -> Jet:
        return self.jet_fn(np.atleast_1d(np.asarray(x, dtype=float)))

    def value(self, x) -> float:
        return self.jet(x).d0


def linear_field(a) -> TestField:
    a = np.atleast_1d(np.asarray(a, dtype=float))

    def jet_fn(x: np.ndarray) -> Jet:
        return jet_from_derivs(x, [float(a @ x), a.copy(),
                                   np.zeros((a.size, a.size))], 2)

    return TestField(name="linear", support=all_space(), jet_fn=jet_fn)


def coordinate_field(dim: int, axis: int = 0) -> TestField:
    e = np.zeros(dim)
    e[axis] = 1.0
    f = linear_field(e)
    return TestField(name=f"x_{axis}", support=f.support, jet_fn=f.jet_fn)


def half_square_field(dim: int) -> TestField:
    def jet_fn(x: np.ndarray) -> Jet:
        return jet_from_derivs(x, [0.5 * float(x @ x), x.copy(), np.eye(dim)], 2)

    return TestField(name="|x|^2/2", support=all_space(), jet_fn=jet_fn)


def bump_field(center, radius: float) -> TestField:
    """(1 - |(x - c)/r|^2)^3 on the ball of the given radius, zero outside."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    r = float(radius)
    d = c.size

    def jet_fn(x: np.ndarray) -> Jet:
        u = (x - c) / r
        s = float(u @ u)
        if s >= 1.0:
            return jet_from_derivs(x, [0.0, np.zeros(d), np.zeros((d, d))], 2)
        w = 1.0 - s
        d0 = w**3
        d1 = -6.0 * w**2 * u / r
        d2 = (24.0 * w * np.outer(u, u) - 6.0 * w**2 * np.eye(d)) / r**2
        return jet_from_derivs(x, [d0, d1, d2], 2)

    sup = interval(c[0] - r, c[0] + r) if d == 1 else ball(r)
    if d > 1:
        sup = SupportBox(kind="box", lo=c - r, hi=c + r)
    return TestField(name=f"bump(c={list(c)},r={r:g})", support=sup, jet_fn=jet_fn)


def phi_derivative_field(scenario: Scenario, e) -> TestField:
    """The field x -> d_e phi(x), with jets shifted down from the scenario's."""
    e = np.atleast_1d(np.asarray(e, dtype=float))

    def jet_fn(x: np.ndarray) -> Jet:
        pj = scenario.phi_jet(x, 3)
        d0 = float(np.atleast_1d(pj.d1) @ e)
        d1 = np.atleast_2d(pj.d2) @ e
        d2 = np.einsum("ijk,k->ij", pj.d3, e)
        return jet_from_derivs(x, [d0, d1, d2], 2)

    return TestField(name="phi_e", support=all_space(), jet_fn=jet_fn)


def default_1d_fields() -> list[TestField]:
    """The field family used by the Gamma_2 route-agreement checks.  The bump
    radius keeps its support edge off round grid values, where the field is
    only C^2 and finite-difference stencils would straddle the kink."""
    return [coordinate_field(1), half_square_field(1),
            bump_field([0.0], 1.8)]
