"""Piecewise-constant nonnegative functions on a truncated half line.

GridFunction is the universal representation for test functions, weights
and operator outputs.  Cell lengths are stored explicitly (in addition to
edges) so that measure-level operations -- distribution function, exact
nonincreasing rearrangement, equimeasurability -- are exact: they sum the
same float multisets with exactly rounded summation, never re-derived
quantities.

All values are immutable after construction; every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import fsum, kahan_cumsum, log_uniform_edges, cell_midpoints

DEFAULT_WINDOW = (1e-6, 1e6)
DEFAULT_CELLS = 4096


@dataclass(frozen=True)
class GridFunction:
    """Nonnegative step function: values[i] on (edges[i], edges[i+1]), 0 outside.

    ``lengths`` always equals diff(edges) up to last-ulp rounding; it is the
    authoritative array for measure computations, while ``edges`` is
    authoritative for coordinates.
    """

    edges: np.ndarray
    values: np.ndarray
    lengths: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if edges.ndim != 1 or len(edges) < 2:
            raise ValueError("edges must be a 1-D array with at least 2 entries")
        if len(values) != len(edges) - 1:
            raise ValueError("values must have len(edges) - 1 entries")
        if edges[0] < 0.0 or not np.all(np.diff(edges) > 0.0):
            raise ValueError("edges must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(edges)):
            raise ValueError("edges must be finite")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError("values must be finite and nonnegative")
        lengths = self.lengths
        if lengths is None:
            lengths = np.diff(edges)
        else:
            lengths = np.asarray(lengths, dtype=float)
            if len(lengths) != len(values) or np.any(lengths <= 0.0):
                raise ValueError("lengths must be positive, one per cell")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lengths", lengths)

    @property
    def n_cells(self) -> int:
        return len(self.values)

    @property
    def midpoints(self) -> np.ndarray:
        return cell_midpoints(self.edges)

    def eval_at(self, x) -> np.ndarray:
        """Pointwise values; 0 outside the support window."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.edges, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.n_cells) & (x < self.edges[-1])
        out = np.zeros(x.shape)
        out[inside] = self.values[idx[inside]]
        return out

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.edges, values, self.lengths)


def zero_like(window=DEFAULT_WINDOW) -> GridFunction:
    return GridFunction(np.asarray(window, float), np.zeros(1))


def from_callable(fn, edges: np.ndarray) -> GridFunction:
    """Sample fn at cell midpoints of the given edges."""
    edges = np.asarray(edges, dtype=float)
    return GridFunction(edges, np.asarray(fn(cell_midpoints(edges)), dtype=float))


def integrate(f: GridFunction) -> float:
    """Exact integral of the step function (order independent)."""
    return fsum(f.values * f.lengths)


def prefix_integral_edges(f: GridFunction) -> np.ndarray:
    """Cumulative integral at the cell edges, compensated; starts at 0."""
    out = np.empty(len(f.edges))
    out[0] = 0.0
    out[1:] = kahan_cumsum(f.values * f.lengths)
    return out


def prefix_integral_at(f: GridFunction, x) -> np.ndarray:
    """Exact cumulative integral of f over (0, x); piecewise linear in x."""
    x = np.asarray(x, dtype=float)
    table = prefix_integral_edges(f)
    return np.interp(x, f.edges, table, left=0.0, right=table[-1])


def distribution(f: GridFunction, lam: float) -> float:
    """Measure of {f > lam}: exact sum of lengths of cells above the level."""
    if lam < 0.0:
        raise ValueError("level must be nonnegative")
    mask = f.values > lam
    if not mask.any():
        return 0.0
    return fsum(f.lengths[mask])


@dataclass(frozen=True)
class DistributionFunction:
    """Step representation of lam -> |{f > lam}|.

    thresholds: distinct positive values of f, descending.
    measures[j]: |{f >= thresholds[j]}|, i.e. the measure for levels in
    [thresholds[j+1], thresholds[j]); nondecreasing with j.
    """

    thresholds: np.ndarray
    measures: np.ndarray

    def eval(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < 0.0):
            raise ValueError("level must be nonnegative")
        # measure for lam in [thresholds[j+1], thresholds[j]) is measures[j];
        # descending thresholds, so search on the reversed ascending array.
        asc = self.thresholds[::-1]
        cum = self.measures[::-1]
        idx = np.searchsorted(asc, lam, side="left")
        out = np.zeros(lam.shape)
        has = idx < len(asc)
        out[has] = cum[idx[has]]
        return out

    def generalized_inverse(self, t) -> np.ndarray:
        """Right-continuous inverse: f*(t) = inf{lam: mu(lam) <= t}."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.measures, t, side="right")
        out = np.zeros(t.shape)
        has = idx < len(self.thresholds)
        out[has] = self.thresholds[idx[has]]
        return out


def distribution_function(f: GridFunction) -> DistributionFunction:
    order = np.argsort(-f.values, kind="stable")
    vals = f.values[order]
    lens = f.lengths[order]
    pos = vals > 0.0
    vals, lens = vals[pos], lens[pos]
    if len(vals) == 0:
        return DistributionFunction(np.empty(0), np.empty(0))
    cum = kahan_cumsum(lens)
    # collapse ties: keep the last (total) measure per distinct value
    keep = np.nonzero(np.diff(vals, append=-np.inf) != 0.0)[0]
    return DistributionFunction(vals[keep], cum[keep])


def rearrange(f: GridFunction) -> GridFunction:
    """Exact nonincreasing rearrangement, supported on [0, |supp f|].

    Sorts (value, length) pairs by value descending (stable in original cell
    order) and lays the cells out from 0.  Equimeasurable with f exactly:
    the value/length multiset is preserved.
    """
    order = np.argsort(-f.values, kind="stable")
    vals = f.values[order]
    lens = f.lengths[order]
    pos = vals > 0.0
    vals, lens = vals[pos], lens[pos]
    if len(vals) == 0:
        return GridFunction(np.array([0.0, f.edges[-1] - f.edges[0]]), np.zeros(1))
    cum = kahan_cumsum(lens)
    edges = np.concatenate([[0.0], cum])
    # cells whose width falls below one ulp of the running sum collapse in
    # floating point; drop them (their mass is below resolution)
    keep = np.diff(edges) > 0.0
    if not keep.all():
        vals, lens = vals[keep], lens[keep]
        edges = np.concatenate([[0.0], cum[keep]])
    return GridFunction(edges, vals, lens)


def maximal(f: GridFunction, t: float) -> float:
    """Level function f**(t) = t^-1 * integral of f* over (0, t)."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    fstar = rearrange(f)
    return float(prefix_integral_at(fstar, t)) / t


def dilate(f: GridFunction, t: float) -> GridFunction:
    """x -> f(t*x): edges divided by t, values unchanged."""
    if t <= 0.0:
        raise ValueError("dilation factor must be positive")
    return GridFunction(f.edges / t, f.values, f.lengths / t)


def restrict(f: GridFunction, lo: float, hi: float):
    """Clip f to (lo, hi); returns (clipped GridFunction, clipped mass)."""
    if not (lo < hi):
        raise ValueError("empty restriction window")
    total = integrate(f)
    edges = np.unique(np.clip(f.edges, lo, hi))
    if len(edges) < 2:
        return zero_like((lo, hi)), total
    mids = cell_midpoints(edges)
    vals = f.eval_at(mids)
    g = GridFunction(edges, vals)
    return g, total - integrate(g)


def resample(f: GridFunction, edges: np.ndarray) -> GridFunction:
    """Mass-preserving projection (cell averaging) onto the target edges.

    Mass outside the target window is dropped; within it, the projection is
    the exact L1 projection of the step function.
    """
    edges = np.asarray(edges, dtype=float)
    table = prefix_integral_edges(f)
    cum = np.interp(edges, f.edges, table, left=0.0, right=table[-1])
    masses = np.diff(cum)
    lengths = np.diff(edges)
    return GridFunction(edges, np.maximum(masses, 0.0) / lengths)


@dataclass(frozen=True)
class Weight:
    """A GridFunction weight with cached cumulative integral U(x) = int_0^x u.

    ``divergent`` records whether the total mass is treated as infinite for
    hypothesis gates; it is decided by a nested-window growth heuristic at
    construction and can be overridden.
    """

    grid: GridFunction
    cum: np.ndarray
    divergent: bool

    @property
    def edges(self) -> np.ndarray:
        return self.grid.edges

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    def total(self) -> float:
        return float(self.cum[-1])


def _divergence_heuristic(grid: GridFunction) -> bool:
    """Nested-window mass growth: divergent if mass grows >= 2x per decade
    step over [1e-6, 10^k], k = 2..6, without saturating."""
    masses = [prefix_integral_at(grid, 10.0**k) for k in range(2, 7)]
    if masses[0] <= 0.0:
        return False
    ratios = []
    for a, b in zip(masses, masses[1:]):
        if a <= 0.0:
            return False
        ratios.append(b / a)
    return all(r >= 2.0 for r in ratios)


def make_weight(grid: GridFunction, divergent: bool | None = None) -> Weight:
    cum = prefix_integral_edges(grid)
    if divergent is None:
        divergent = _divergence_heuristic(grid)
    return Weight(grid, cum, divergent)


def cumulative(w: Weight, x) -> np.ndarray:
    """U(x): exact prefix integral with linear interpolation inside a cell."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("x must be positive")
    return np.interp(x, w.edges, w.cum, left=0.0, right=w.cum[-1])


def reciprocal_transform(w: Weight) -> Weight:
    """Weight transform u~(y) = u(1/y) / y^2.

    Cell (a, b) with value v maps to cell (1/b, 1/a) with value v*a*b, which
    preserves the cell mass exactly and makes the transform an exact
    involution on any grid with positive edges.
    """
    edges = w.grid.edges
    if edges[0] <= 0.0:
        raise ValueError("reciprocal transform needs strictly positive support")
    new_edges = 1.0 / edges[::-1]
    new_vals = (w.grid.values * edges[:-1] * edges[1:])[::-1]
    return make_weight(GridFunction(new_edges, new_vals), divergent=None)


def default_edges(window=DEFAULT_WINDOW, n_cells: int = DEFAULT_CELLS) -> np.ndarray:
    return log_uniform_edges(window[0], window[1], n_cells)
