"""Independent oracles the tests check library results against.

Each oracle deliberately avoids the code path it validates: the
rearrangement oracle inverts the distribution function by direct level
counting, the conjugate oracle maximizes s*t - Phi(s) on a grid, and the
quadrature oracles use scipy.integrate.quad.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate as sp_integrate

from orlicz_gauge.numerics import fsum


def rearrangement_value(f, t: float) -> float:
    """f*(t) = sup{lam: |{f > lam}| > t} by direct level counting."""
    vals = np.unique(f.values)
    vals = vals[vals > 0.0]
    best = 0.0
    prev = 0.0
    for v in vals:  # ascending
        mid = 0.5 * (v + prev)
        mu = fsum(f.lengths[f.values > mid])
        if mu > t:
            best = v
        prev = v
    return best


def distribution_value(f, lam: float) -> float:
    return fsum(f.lengths[f.values > lam])


def conjugate_value(big_phi, t: float, s_grid) -> float:
    """Legendre-type conjugate by grid maximization of s*t - Phi(s)."""
    s = np.asarray(s_grid, dtype=float)
    return float(np.max(s * t - np.asarray(big_phi(s), dtype=float)))


def quad(fn, a: float, b: float, **kw) -> float:
    val, _ = sp_integrate.quad(fn, a, b, limit=400, **kw)
    return val


def weighted_p_norm(f, weight_grid, p: float) -> float:
    """Closed-form weighted p-norm of step functions on the merged grid."""
    from orlicz_gauge.numerics import merge_edges, cell_midpoints

    edges = merge_edges(f.edges, weight_grid.edges)
    lo = max(f.edges[0], weight_grid.edges[0])
    hi = min(f.edges[-1], weight_grid.edges[-1])
    edges = edges[(edges >= lo) & (edges <= hi)]
    mids = cell_midpoints(edges)
    fv = f.eval_at(mids)
    uv = weight_grid.eval_at(mids)
    return fsum(fv**p * uv * np.diff(edges)) ** (1.0 / p)
