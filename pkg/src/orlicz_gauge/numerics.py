"""Low-level numeric helpers shared across the package.

All summation of cell masses goes through `math.fsum` (exactly rounded,
order independent) or `kahan_cumsum` (compensated prefix sums), so that
integrals are reproducible to ~1e-16 regardless of cell order.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "fsum",
    "kahan_cumsum",
    "log_uniform_edges",
    "cell_midpoints",
    "power_tail_integral",
    "power_head_integral",
    "merge_edges",
]


def fsum(values) -> float:
    """Exactly rounded sum of a 1-D array (order independent)."""
    return math.fsum(np.asarray(values, dtype=float).tolist())


def kahan_cumsum(values: np.ndarray) -> np.ndarray:
    """Compensated (Kahan) prefix sums; returns array of the same length."""
    out = np.empty(len(values))
    s = 0.0
    c = 0.0
    for i, v in enumerate(np.asarray(values, dtype=float)):
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i] = s
    return out


def log_uniform_edges(lo: float, hi: float, n_cells: int) -> np.ndarray:
    """n_cells+1 log-uniformly spaced edges over [lo, hi], lo > 0."""
    if not (0.0 < lo < hi):
        raise ValueError(f"window must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    return np.geomspace(lo, hi, n_cells + 1)


def cell_midpoints(edges: np.ndarray) -> np.ndarray:
    """Geometric cell midpoints; arithmetic for a cell whose left edge is 0.

    Geometric midpoints make cell sums of pure y^-2 integrands exact on any
    grid, which several weight transforms rely on.
    """
    lo = edges[:-1]
    hi = edges[1:]
    mids = np.where(lo > 0.0, np.sqrt(lo * hi), 0.5 * (lo + hi))
    return mids


def _log_slope(m0: float, m1: float, g0: float, g1: float) -> float | None:
    if g0 <= 0.0 or g1 <= 0.0 or m0 <= 0.0 or m1 <= 0.0 or m0 == m1:
        return None
    return math.log(g1 / g0) / math.log(m1 / m0)


def power_tail_integral(mids, vals, top: float, margin: float = 0.05):
    """Estimate of the tail integral over (top, infinity) of a sampled integrand.

    Fits a power law through the last two positive samples.  Returns
    (tail, converged).  tail is 0.0 with converged=False when the fitted
    slope does not give an integrable tail (slope >= -1 - margin).
    Exact for integrands that are pure powers sampled at geometric midpoints.
    """
    mids = np.asarray(mids, dtype=float)
    vals = np.asarray(vals, dtype=float)
    pos = np.nonzero(vals > 0.0)[0]
    if len(pos) < 2:
        return 0.0, True
    i0, i1 = pos[-2], pos[-1]
    s = _log_slope(mids[i0], mids[i1], vals[i0], vals[i1])
    if s is None:
        return 0.0, True
    if s >= -1.0 - margin:
        return 0.0, False
    g_top = vals[i1] * (top / mids[i1]) ** s
    return g_top * top / (-s - 1.0), True


def power_head_integral(mids, vals, bottom: float, margin: float = 0.05):
    """Estimate of the head integral over (0, bottom); see power_tail_integral.

    Requires fitted slope > -1 + margin for convergence at 0.
    """
    mids = np.asarray(mids, dtype=float)
    vals = np.asarray(vals, dtype=float)
    pos = np.nonzero(vals > 0.0)[0]
    if len(pos) < 2:
        return 0.0, True
    i0, i1 = pos[0], pos[1]
    s = _log_slope(mids[i0], mids[i1], vals[i0], vals[i1])
    if s is None:
        return 0.0, True
    if s <= -1.0 + margin:
        return 0.0, False
    g_bot = vals[i0] * (bottom / mids[i0]) ** s
    return g_bot * bottom / (s + 1.0), True


def merge_edges(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sorted union of two edge arrays (deduplicated)."""
    return np.unique(np.concatenate([np.asarray(a, float), np.asarray(b, float)]))
