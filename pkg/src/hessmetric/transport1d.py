"""One-dimensional transport potentials by CDF inversion and jet recursion.

In 1D the monotone (optimal) map is the quantile coupling

    phi'(x) = F_nu^{-1}(F_mu(x)),

and the change-of-variables identity exp(-V) = exp(-W(phi')) phi'' yields

    phi''      = exp(W(phi') - V),
    log phi''  = W(phi') - V,

which, differentiated repeatedly, gives a closed recursion for phi''',
phi'''' and phi^(5) in terms of derivatives of V and W.  The base inversion
is a bisection-secant hybrid with absolute tolerance 1e-12 on the CDF
value; CDFs come from panelled Gauss-Legendre accumulation (adaptive
refinement at construction, absolute tolerance 1e-13).
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .errors import InversionFailure, QuadratureFailure
from .jets import Jet, jet_1d
from .potentials import Potential1D, UniformPotential1D

_CDF_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = leggauss(21)


def _gauss_panel(f, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * sum(w * f(mid + half * t) for t, w in zip(_GL_NODES, _GL_WEIGHTS))


class _CDF1D:
    """Cumulative distribution of exp(-U) dx on a cached panel grid."""

    def __init__(self, potential: Potential1D, panels_per_unit: int = 32):
        self.potential = potential
        lo, hi = self._density_bounds()
        n = max(64, int((hi - lo) * panels_per_unit))
        self.grid = np.linspace(lo, hi, n + 1)
        increments = [
            self._panel(self.grid[k], self.grid[k + 1]) for k in range(n)
        ]
        self.cum = np.concatenate([[0.0], np.cumsum(increments)])
        self.total = float(self.cum[-1])
        if not 0.999 < self.total < 1.001:
            raise QuadratureFailure(
                f"density of {potential.name} integrates to {self.total}, not 1"
            )

    def _density(self, x: float) -> float:
        v = self.potential.value(x)
        return math.exp(-v) if v < 700.0 else 0.0

    def _panel(self, a: float, b: float) -> float:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        vals = self.potential.value_array(mid + half * _GL_NODES)
        return half * float(_GL_WEIGHTS @ np.exp(-np.minimum(vals, 700.0)))

    def _density_bounds(self) -> tuple[float, float]:
        sup = self.potential.support
        if sup.kind == "interval":
            return float(sup.lo[0]), float(sup.hi[0])
        # expand until the density is negligible on both sides
        lo, hi = -1.0, 1.0
        while self._density(lo) > 1e-20 and lo > -64.0:
            lo *= 2.0
        while self._density(hi) > 1e-20 and hi < 64.0:
            hi *= 2.0
        return lo, hi

    def __call__(self, x: float) -> float:
        g = self.grid
        if x <= g[0]:
            return 0.0
        if x >= g[-1]:
            return self.total
        k = int(np.searchsorted(g, x) - 1)
        return float(self.cum[k] + self._panel(g[k], x))

    def quantile(self, p: float) -> float:
        """Inverse CDF by bracketing + Brent's bisection-secant hybrid."""
        if not 0.0 < p < self.total:
            raise InversionFailure(f"quantile level {p} outside (0, {self.total})")
        g, c = self.grid, self.cum
        k = int(np.searchsorted(c, p))
        a, b = g[max(k - 1, 0)], g[min(k, len(g) - 1)]
        if a == b:
            return float(a)
        y = brentq(lambda t: self(t) - p, a, b, xtol=1e-15, rtol=8.9e-16)
        if abs(self(y) - p) > _CDF_TOL:
            raise InversionFailure("CDF inversion tolerance not met")
        return float(y)


class Transport1D:
    """phi-jets of the 1D transport between densities exp(-V) and exp(-W)."""

    def __init__(self, v: Potential1D, w: Potential1D):
        self.v = v
        self.w = w
        self._cdf_mu = _CDF1D(v)
        self._uniform_w = isinstance(w, UniformPotential1D)
        self._cdf_nu = None if self._uniform_w else _CDF1D(w)
        self._anchor = self._cdf_mu.quantile(0.5 * self._cdf_mu.total)
        self._map_cache: dict[float, float] = {}
        self._value_cache: dict[float, float] = {}
        self._panel_cache: dict[int, float] = {}

    def map_point(self, x: float) -> float:
        if x in self._map_cache:
            return self._map_cache[x]
        p = self._cdf_mu(x)
        if self._uniform_w:
            frac = p / self._cdf_mu.total
            if not 0.0 < frac < 1.0:
                raise InversionFailure(f"mass level {frac} at x={x} not invertible")
            y = self.w.a + frac * (self.w.b - self.w.a)
        else:
            y = self._cdf_nu.quantile(p / self._cdf_mu.total * self._cdf_nu.total)
        if len(self._map_cache) < 200_000:
            self._map_cache[x] = y
        return y

    def derivs(self, x: float, order: int) -> tuple[float, ...]:
        """(phi, phi', ..., phi^(order)) at x, order <= 5.

        phi is anchored by phi(median of mu) = 0 and only computed when
        order 0 output is requested via jet(); derivative entries are exact
        up to the CDF inversion tolerance.
        """
        y = self.map_point(x)
        vd = self.v.derivs(x, min(order, 3) if order >= 2 else 1)
        wd = self.w.derivs(y, min(order - 2, 3)) if order >= 2 else None
        out = [math.nan, y]
        if order >= 2:
            p2 = math.exp(wd[0] - vd[0])
            out.append(p2)
        if order >= 3:
            r1 = wd[1] * p2 - vd[1]
            out.append(p2 * r1)
        if order >= 4:
            p3 = out[3]
            r2 = wd[2] * p2 * p2 + wd[1] * p3 - vd[2]
            out.append(p2 * (r2 + r1 * r1))
        if order >= 5:
            p4 = out[4]
            r3 = wd[3] * p2**3 + 3.0 * wd[2] * p2 * p3 + wd[1] * p4 - vd[3]
            out.append(p2 * (r3 + 3.0 * r2 * r1 + r1**3))
        return tuple(out[: order + 1])

    def value(self, x: float) -> float:
        """phi(x) with phi(anchor) = 0, by panel quadrature of phi'.

        Whole panels of the mu-CDF grid are integrated once and memoized, so
        repeated values cost only the two partial end panels."""
        if x in self._value_cache:
            return self._value_cache[x]
        grid = self._cdf_mu.grid
        a, b = (self._anchor, x) if x >= self._anchor else (x, self._anchor)
        ka = int(np.searchsorted(grid, a))
        kb = int(np.searchsorted(grid, b)) - 1
        ka = min(max(ka, 0), len(grid) - 1)
        kb = min(max(kb, -1), len(grid) - 1)
        if ka > kb:  # both endpoints inside one panel
            total = _gauss_panel(self.map_point, a, b)
        else:
            total = _gauss_panel(self.map_point, a, grid[ka])
            for k in range(ka, kb):
                if k not in self._panel_cache:
                    self._panel_cache[k] = _gauss_panel(self.map_point,
                                                        grid[k], grid[k + 1])
                total += self._panel_cache[k]
            total += _gauss_panel(self.map_point, grid[kb], b)
        out = total if x >= self._anchor else -total
        if len(self._value_cache) < 50_000:
            self._value_cache[x] = out
        return out

    def jet(self, x: float, order: int) -> Jet:
        derivs = list(self.derivs(x, max(order, 1)))
        derivs[0] = self.value(x)
        return jet_1d(x, derivs, order)


def solve_1d(v_spec: Potential1D, w_spec: Potential1D, x: float, order: int) -> Jet:
    """Jet of the 1D transport potential at x; see :class:`Transport1D`."""
    return Transport1D(v_spec, w_spec).jet(x, order)
