"""Luxemburg gauge functionals and their duals.

The gauge of f under (Phi, u) is inf{lam > 0: int Phi(f/lam) u <= 1}.
For step functions the modular is an exact finite sum over the common
refinement of the f- and u-grids, and the infimum is found by bracket
expansion plus bisection in log-lambda.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import fsum, merge_edges, cell_midpoints
from .space import (
    GridFunction,
    Weight,
    cumulative,
    default_edges,
    prefix_integral_at,
)
from .young import NFunction, complementary

BRACKET_LO = 1e-30
BRACKET_HI = 1e30
BISECT_REL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class GaugeSpec:
    nf: NFunction
    weight: Weight


@dataclass(frozen=True)
class GaugeValue:
    """Gauge evaluation result; value is math.inf when no admissible lambda."""

    value: float
    modular_at_value: float
    iterations: int

    def __float__(self) -> float:
        return self.value

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _merged(f: GridFunction, u: GridFunction):
    """Common refinement over the overlap of supports: (f values, u masses)."""
    lo = max(f.edges[0], u.edges[0])
    hi = min(f.edges[-1], u.edges[-1])
    if not (lo < hi):
        return np.empty(0), np.empty(0)
    edges = merge_edges(f.edges, u.edges)
    edges = edges[(edges >= lo) & (edges <= hi)]
    if len(edges) < 2:
        return np.empty(0), np.empty(0)
    mids = cell_midpoints(edges)
    fv = f.eval_at(mids)
    umass = u.eval_at(mids) * np.diff(edges)
    keep = (fv > 0.0) & (umass > 0.0)
    return fv[keep], umass[keep]


def modular(f: GridFunction, spec: GaugeSpec, lam: float) -> float:
    """Exact cell sum of Phi(f/lam) against the weight's cell masses."""
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    fv, umass = _merged(f, spec.weight.grid)
    if len(fv) == 0:
        return 0.0
    with np.errstate(over="ignore"):
        terms = np.asarray(spec.nf.big(fv / lam), dtype=float) * umass
    if np.any(np.isinf(terms)):
        return math.inf
    return fsum(terms)


def gauge_norm(f: GridFunction, spec: GaugeSpec) -> GaugeValue:
    """Luxemburg gauge by bracket expansion and bisection in log-lambda.

    Homogeneous to ~1e-12 relative; returns 0 for the zero function and an
    infinite marker when the modular exceeds 1 at the bracket cap.
    """
    fv, umass = _merged(f, spec.weight.grid)
    if len(fv) == 0:
        return GaugeValue(0.0, 0.0, 0)

    def mod(lam: float) -> float:
        with np.errstate(over="ignore"):
            terms = np.asarray(spec.nf.big(fv / lam), dtype=float) * umass
        if np.any(np.isinf(terms)):
            return math.inf
        return fsum(terms)

    iters = 0
    hi = 1.0
    while mod(hi) > 1.0:
        hi *= 4.0
        iters += 1
        if hi > BRACKET_HI:
            return GaugeValue(math.inf, mod(BRACKET_HI), iters)
    lo = hi
    while mod(lo) <= 1.0:
        lo /= 4.0
        iters += 1
        if lo < BRACKET_LO:
            return GaugeValue(lo, mod(lo), iters)
    # invariant: mod(lo) > 1 >= mod(hi)
    while hi / lo - 1.0 > BISECT_REL and iters < MAX_ITER:
        mid = math.sqrt(lo * hi)
        if mod(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
        iters += 1
    return GaugeValue(hi, mod(hi), iters)


def dual_gauge(g: GridFunction, spec: GaugeSpec) -> float:
    """Dual gauge rho'(g) = gauge of g/u under the complementary N-function.

    Infinite when the weight vanishes on a set where g is positive.
    """
    u = spec.weight.grid
    lo = min(g.edges[0], u.edges[0])
    hi = max(g.edges[-1], u.edges[-1])
    edges = merge_edges(g.edges, u.edges)
    edges = edges[(edges >= lo) & (edges <= hi)]
    mids = cell_midpoints(edges)
    gv = g.eval_at(mids)
    uv = u.eval_at(mids)
    if np.any((gv > 0.0) & (uv <= 0.0)):
        return math.inf
    ratio = np.where(gv > 0.0, gv / np.where(uv > 0.0, uv, 1.0), 0.0)
    h = GridFunction(edges, ratio)
    psi = complementary(spec.nf)
    return gauge_norm(h, GaugeSpec(psi, spec.weight)).value


def down_dual_gauge(h: GridFunction, nf2: NFunction, u2: Weight,
                    n_cells: int = 2048) -> float:
    """Down-dual evaluation: gauge of x -> (int_0^x h)/U2(x) under (Psi2, u2).

    The ratio of the two prefix integrals is sampled at geometric midpoints
    of a refinement of the h/u2 grids.  Cells where both prefix integrals
    vanish contribute 0.  A warning is attached when u2 does not look
    divergent, where the formula is unvalidated.
    """
    if not u2.divergent:
        warnings.warn(
            "down-dual gauge: weight mass looks finite; result is outside the "
            "validated regime", stacklevel=2)
    lo = u2.edges[0] if u2.edges[0] > 0 else (u2.edges[1] if len(u2.edges) > 2 else 1e-6)
    lo = max(min(lo, h.edges[0] if h.edges[0] > 0 else lo), 1e-30)
    hi = u2.edges[-1]
    base = default_edges((max(lo, 1e-30), hi), n_cells) if lo < hi else u2.edges
    edges = merge_edges(merge_edges(base, h.edges[h.edges > 0]), u2.edges[u2.edges > 0])
    edges = edges[(edges > 0) & (edges <= hi)]
    if len(edges) < 2:
        return 0.0
    mids = cell_midpoints(edges)
    num = prefix_integral_at(h, mids)
    den = cumulative(u2, mids)
    ratio = np.where((num > 0.0) & (den > 0.0), num / np.where(den > 0.0, den, 1.0), 0.0)
    g = GridFunction(edges, ratio)
    psi2 = complementary(nf2)
    return gauge_norm(g, GaugeSpec(psi2, u2)).value
