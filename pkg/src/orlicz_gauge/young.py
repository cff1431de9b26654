"""N-functions: convex Phi(x) = integral of an increasing density phi.

Two families are supported:

* power: Phi(t) = coeff * t^p with p > 1, all maps in closed form;
* sampled: the density is a strictly increasing polyline through knots
  (t_i, phi_i) with power-law tails fitted from the two end cells.  Phi is
  the *exact* integral of the polyline (piecewise quadratic), the inverse
  density is the exact polyline inverse, and the complementary function is
  obtained by swapping knot axes.  Young's inequality and its equality case
  then hold to floating-point accuracy by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import kahan_cumsum, log_uniform_edges

SAMPLE_GRID = (1e-8, 1e8)
SAMPLE_POINTS = 2048


@dataclass(frozen=True)
class _Polyline:
    """Strictly increasing piecewise-linear map with power-law tails."""

    xs: np.ndarray
    ys: np.ndarray
    slope_lo: float
    slope_hi: float

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            out = np.interp(x, self.xs, self.ys)
            lo = x < self.xs[0]
            hi = x > self.xs[-1]
            if lo.any():
                out = np.where(lo, self.ys[0] * (x / self.xs[0]) ** self.slope_lo, out)
            if hi.any():
                out = np.where(hi, self.ys[-1] * (x / self.xs[-1]) ** self.slope_hi, out)
        return out

    def inverse(self) -> "_Polyline":
        return _Polyline(self.ys, self.xs, 1.0 / self.slope_lo, 1.0 / self.slope_hi)


def _fit_slope(x0, x1, y0, y1) -> float:
    return math.log(y1 / y0) / math.log(x1 / x0)


@dataclass(frozen=True)
class _PolyIntegral:
    """Exact antiderivative of a _Polyline density from 0."""

    line: _Polyline
    table: np.ndarray  # integral at line.xs
    head: float        # integral over (0, xs[0])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xs, ys = self.line.xs, self.line.ys
        idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
        x0 = xs[idx]
        d = x - x0
        slope = (ys[idx + 1] - ys[idx]) / (xs[idx + 1] - xs[idx])
        mid = self.table[idx] + ys[idx] * d + 0.5 * slope * d * d
        with np.errstate(over="ignore"):
            s_lo = self.line.slope_lo
            lo_val = self.head * np.where(x > 0, (x / xs[0]), 0.0) ** (s_lo + 1.0)
            s_hi = self.line.slope_hi
            hi_val = self.table[-1] + ys[-1] * xs[-1] / (s_hi + 1.0) * (
                (x / xs[-1]) ** (s_hi + 1.0) - 1.0
            )
        out = np.where(x < xs[0], lo_val, np.where(x > xs[-1], hi_val, mid))
        return out

    def inverse(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        xs, ys = self.line.xs, self.line.ys
        idx = np.clip(np.searchsorted(self.table, s, side="right") - 1, 0, len(xs) - 2)
        rem = s - self.table[idx]
        y0 = ys[idx]
        slope = (ys[idx + 1] - ys[idx]) / (xs[idx + 1] - xs[idx])
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            quad = (np.sqrt(y0 * y0 + 2.0 * slope * rem) - y0) / slope
            lin = rem / y0
            d = np.where(np.abs(slope) * np.maximum(rem, 0.0) > 1e-12 * y0 * y0, quad, lin)
            mid = xs[idx] + np.maximum(d, 0.0)
            s_lo = self.line.slope_lo
            lo_val = xs[0] * np.where(s > 0, s / self.head, 0.0) ** (1.0 / (s_lo + 1.0))
            s_hi = self.line.slope_hi
            top = self.table[-1]
            hi_arg = 1.0 + (s - top) * (s_hi + 1.0) / (ys[-1] * xs[-1])
            hi_val = xs[-1] * np.maximum(hi_arg, 0.0) ** (1.0 / (s_hi + 1.0))
        return np.where(s < self.table[0], lo_val, np.where(s > top, hi_val, mid))


@dataclass(frozen=True)
class NFunction:
    """An N-function with density phi, integral Phi and their inverses.

    kind is "power" (params: p, coeff) or "sampled" (params hold the knot
    polyline).  Instances are immutable and safe to share across scans.
    """

    kind: str
    p: float = 0.0
    coeff: float = 1.0
    line: _Polyline | None = None
    integral: _PolyIntegral | None = None

    # -- density ---------------------------------------------------------
    def phi(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "power":
            with np.errstate(over="ignore"):
                return self.coeff * self.p * y ** (self.p - 1.0)
        return self.line(y)

    def phi_inv(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            with np.errstate(over="ignore"):
                return (s / (self.coeff * self.p)) ** (1.0 / (self.p - 1.0))
        return self.line.inverse()(s)

    # -- integral ---------------------------------------------------------
    def big(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            with np.errstate(over="ignore"):
                return self.coeff * x**self.p
        return self.integral(x)

    def big_inv(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            with np.errstate(over="ignore"):
                return (s / self.coeff) ** (1.0 / self.p)
        return self.integral.inverse(s)


def make_power_nfunction(p: float, coeff: float = 1.0) -> NFunction:
    """Phi(t) = coeff * t^p; rejects p <= 1 (density would not vanish at 0)."""
    if p <= 1.0:
        raise ValueError(f"power N-function needs p > 1, got p={p}")
    if coeff <= 0.0:
        raise ValueError("coeff must be positive")
    return NFunction(kind="power", p=float(p), coeff=float(coeff))


def make_sampled_nfunction(ts: np.ndarray, phis: np.ndarray) -> NFunction:
    """N-function from strictly increasing density samples (t_i, phi_i)."""
    ts = np.asarray(ts, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if len(ts) < 2 or len(ts) != len(phis):
        raise ValueError("need at least two (t, phi) samples of equal length")
    if np.any(ts <= 0.0) or np.any(phis <= 0.0):
        raise ValueError("density samples must be strictly positive")
    if not (np.all(np.diff(ts) > 0.0) and np.all(np.diff(phis) > 0.0)):
        raise ValueError("degenerate density: samples must increase strictly in both columns")
    s_lo = _fit_slope(ts[0], ts[1], phis[0], phis[1])
    s_hi = _fit_slope(ts[-2], ts[-1], phis[-2], phis[-1])
    if s_lo <= 0.0 or s_hi <= 0.0:
        raise ValueError("density tails must be increasing")
    line = _Polyline(ts, phis, s_lo, s_hi)
    head = phis[0] * ts[0] / (s_lo + 1.0)
    table = np.empty(len(ts))
    table[0] = head
    table[1:] = head + kahan_cumsum(0.5 * (phis[:-1] + phis[1:]) * np.diff(ts))
    return NFunction(kind="sampled", line=line, integral=_PolyIntegral(line, table, head))


def sample_density(fn, lo: float = SAMPLE_GRID[0], hi: float = SAMPLE_GRID[1],
                   n: int = SAMPLE_POINTS) -> NFunction:
    """Sample a callable density on a log grid, trimmed to its finite range."""
    ts = np.geomspace(lo, hi, n)
    with np.errstate(over="ignore"):
        vals = np.asarray(fn(ts), dtype=float)
        # keep the integral table representable: trim where phi * t overflows
        ok = np.isfinite(vals) & (vals > 0.0) & (vals * ts < 1e290)
    ts, vals = ts[ok], vals[ok]
    keep = np.concatenate([[True], np.diff(vals) > 0.0])
    return make_sampled_nfunction(ts[keep], vals[keep])


def complementary(nf: NFunction) -> NFunction:
    """Complementary N-function Psi with density phi^-1.

    Closed form for powers: Phi = c*t^p gives Psi = c' * t^p' with
    p' = p/(p-1) and c' = (c*p)^(-1/(p-1)) / p'.  For sampled densities the
    knot axes are swapped (exact polyline inverse), so the double
    complementary returns the original function exactly.
    """
    if nf.kind == "power":
        p_dual = nf.p / (nf.p - 1.0)
        c_dual = (nf.coeff * nf.p) ** (-1.0 / (nf.p - 1.0)) / p_dual
        return make_power_nfunction(p_dual, c_dual)
    return make_sampled_nfunction(nf.line.ys, nf.line.xs)


def normalize_unit(nf: NFunction) -> NFunction:
    """Rescale values so Phi(1) = 1 (density divided by Phi(1))."""
    scale = float(nf.big(1.0))
    if nf.kind == "power":
        return make_power_nfunction(nf.p, nf.coeff / scale)
    return make_sampled_nfunction(nf.line.xs, nf.line.ys / scale)


@dataclass(frozen=True)
class Delta2Report:
    sup_ratio: float
    passed: bool
    decade_sups: np.ndarray


def check_delta2(nf: NFunction, t_grid: np.ndarray | None = None) -> Delta2Report:
    """Doubling check: sup of Phi(2t)/Phi(t) over the grid.

    Pass requires a finite supremum that is stable (within 10%) across the
    top three decades of the grid, which separates genuine doubling from
    slow blow-up hidden by truncation.
    """
    if t_grid is None:
        t_grid = log_uniform_edges(1e-8, 1e8, 256)
    t_grid = np.asarray(t_grid, dtype=float)
    span = math.log10(t_grid[-1] / t_grid[0])
    if span < 8.0:
        raise ValueError("t_grid must span at least 8 decades")
    with np.errstate(over="ignore", invalid="ignore"):
        ratios = np.asarray(nf.big(2.0 * t_grid)) / np.asarray(nf.big(t_grid))
    ratios = np.where(np.isnan(ratios), np.inf, ratios)
    sup = float(np.max(ratios))
    decades = np.floor(np.log10(t_grid)).astype(int)
    tops = np.unique(decades)[-3:]
    decade_sups = np.array([np.max(ratios[decades == d]) for d in tops])
    stable = (
        np.all(np.isfinite(decade_sups))
        and float(np.max(decade_sups) / np.min(decade_sups)) <= 1.10
    )
    passed = bool(np.isfinite(sup) and stable)
    return Delta2Report(sup_ratio=sup, passed=passed, decade_sups=decade_sups)


@dataclass(frozen=True)
class ConvexityReport:
    passed: bool
    worst_slope_drop: float


def check_convex_composition(nf1: NFunction, nf2: NFunction,
                             s_grid: np.ndarray | None = None) -> ConvexityReport:
    """Convexity of s -> Phi1(Phi2^-1(s)) via nondecreasing divided differences."""
    if s_grid is None:
        s_grid = log_uniform_edges(1e-8, 1e8, 128)
    s_grid = np.asarray(s_grid, dtype=float)
    with np.errstate(over="ignore"):
        g = np.asarray(nf1.big(nf2.big_inv(s_grid)), dtype=float)
    slopes = np.diff(g) / np.diff(s_grid)
    finite = np.isfinite(slopes)
    slopes = slopes[finite]
    if len(slopes) < 2:
        return ConvexityReport(passed=True, worst_slope_drop=0.0)
    scale = np.maximum(np.abs(slopes[:-1]), np.abs(slopes[1:]))
    drops = (slopes[:-1] - slopes[1:]) / np.maximum(scale, 1e-300)
    worst = float(np.max(drops))
    return ConvexityReport(passed=bool(worst <= 1e-10), worst_slope_drop=worst)
