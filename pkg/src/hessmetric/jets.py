"""Jets: value and symmetric derivative tensors of a scalar field at a point.

A jet of order m at x holds the value d0 and the tensors d1..dm of partial
derivatives, each fully symmetric under index permutation.  Jets are the
currency every other module consumes; catalog scenarios produce them in
closed form, and :func:`fd_jet_oracle` provides an independent
finite-difference cross-check (never the primary path).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import OrderUnsupported

MAX_ORDER = 5


@dataclass(frozen=True)
class Jet:
    """Value and derivative tensors of a scalar field at ``point``.

    ``dk`` has shape ``(dim,) * k``; tensors above ``order`` are None and
    must not be queried.
    """

    point: np.ndarray
    order: int
    d0: float
    d1: np.ndarray | None = None
    d2: np.ndarray | None = None
    d3: np.ndarray | None = None
    d4: np.ndarray | None = None
    d5: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.point.shape[0]

    def tensor(self, k: int) -> np.ndarray | float:
        if k < 0 or k > self.order:
            raise OrderUnsupported(
                f"jet of order {self.order} queried for derivative order {k}"
            )
        t = (self.d0, self.d1, self.d2, self.d3, self.d4, self.d5)[k]
        if k > 0 and t is None:
            raise OrderUnsupported(f"derivative order {k} absent from jet")
        return t


def jet_from_derivs(x: np.ndarray, derivs: Sequence, order: int) -> Jet:
    """Assemble a Jet from ``derivs = (d0, d1, ..., d_order)``."""
    slots: list = [None] * (MAX_ORDER + 1)
    for k in range(order + 1):
        slots[k] = derivs[k]
    return Jet(point=np.asarray(x, dtype=float), order=order, d0=float(slots[0]),
               d1=slots[1], d2=slots[2], d3=slots[3], d4=slots[4], d5=slots[5])


def jet_1d(x: float, derivs: Sequence[float], order: int) -> Jet:
    """Jet in dimension one from scalar derivatives ``(f, f', ..., f^(order))``."""
    shaped = [float(derivs[0])]
    for k in range(1, order + 1):
        shaped.append(np.full((1,) * k, float(derivs[k])))
    return jet_from_derivs(np.atleast_1d(np.asarray(x, dtype=float)), shaped, order)


def direct_sum(jets: Sequence[Jet], point: np.ndarray, order: int) -> Jet:
    """Jet of ``f(x) = sum_i f_i(x_i)`` for 1D jets of the factors.

    All mixed partials vanish; tensor entries sit on the diagonal
    ``(i, i, ..., i)`` of each factor's axis.
    """
    d = len(jets)
    derivs: list = [sum(j.d0 for j in jets)]
    for k in range(1, order + 1):
        t = np.zeros((d,) * k)
        for i, j in enumerate(jets):
            t[(i,) * k] = np.asarray(j.tensor(k)).reshape(())
        derivs.append(t)
    return jet_from_derivs(point, derivs, order)


def symmetry_defect(t: np.ndarray) -> float:
    """Max absolute deviation of a tensor from full index symmetry."""
    k = t.ndim
    if k < 2:
        return 0.0
    worst = 0.0
    for perm in itertools.permutations(range(k)):
        worst = max(worst, float(np.max(np.abs(t - np.transpose(t, perm)))))
    return worst


def symmetrize(t: np.ndarray) -> np.ndarray:
    k = t.ndim
    if k < 2:
        return t
    acc = np.zeros_like(t)
    perms = list(itertools.permutations(range(k)))
    for perm in perms:
        acc += np.transpose(t, perm)
    return acc / len(perms)


def fd_jet_oracle(field: Callable[[np.ndarray], float], x: np.ndarray,
                  order: int, step: float) -> Jet:
    """Independent finite-difference jet of a scalar field.

    Iterated central differences, one application per index; the error is
    O(step^2) per derivative order.  The caller owns step selection.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if not 1 <= order <= 4:
        raise OrderUnsupported("fd_jet_oracle supports orders 1..4")

    def central(idx: tuple[int, ...], base: np.ndarray) -> float:
        if not idx:
            return field(base)
        e = np.zeros(d)
        e[idx[0]] = step
        return (central(idx[1:], base + e) - central(idx[1:], base - e)) / (2.0 * step)

    derivs: list = [field(x)]
    for k in range(1, order + 1):
        t = np.zeros((d,) * k)
        for combo in itertools.combinations_with_replacement(range(d), k):
            val = central(combo, x)
            for perm in set(itertools.permutations(combo)):
                t[perm] = val
        derivs.append(t)
    return jet_from_derivs(x, derivs, order)
