"""Two-variable kernels, their iterated rearrangement, and the derived operators.

The iterated rearrangement first rearranges every x-row in y (exact sort of
(value, width) pairs laid out from 0), then every s-column in x.  Lines that
are already nonincreasing are copied bitwise, so bimonotone kernels (sum
kernels in particular) are fixed points cell by cell.  Lines that genuinely
reorder are projected mass-preservingly onto the anchored grid with the same
cell widths; on uniform grids the projection is a pure permutation, so the
discrete construction is exact there.

Kernel application uses midpoint-rule cell sums, except for the two Volterra
indicator families (prefix averaging and prefix indicator), whose rows are
integrated exactly so that prefix averages agree with the exact level
function to rounding accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import cell_midpoints, fsum, kahan_cumsum
from .space import (
    DEFAULT_WINDOW,
    GridFunction,
    default_edges,
    prefix_integral_at,
    prefix_integral_edges,
    resample,
)

DEFAULT_KERNEL_N = 1024


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class KernelFamily:
    """Closed-form kernel family: tag, parameters and exact callables.

    profile holds the one-variable generator k (as a GridFunction sample)
    for sum/radial/homogeneous families; profile_fn is the exact callable
    when the profile has a closed form.
    """

    tag: str
    params: dict = field(default_factory=dict)
    profile: GridFunction | None = None
    profile_fn: object | None = None

    def profile_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.profile_fn is not None:
            with np.errstate(over="ignore", divide="ignore"):
                return np.asarray(self.profile_fn(t), dtype=float)
        if self.profile is not None:
            return self.profile.eval_at(t)
        raise ValueError(f"family {self.tag!r} has no profile")

    def kernel_at(self, x, y):
        """Exact kernel values; x and y broadcast."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        tag = self.tag
        with np.errstate(divide="ignore", over="ignore"):
            if tag == "hardy-averaging":
                return np.where(y < x, 1.0 / x, 0.0)
            if tag == "hardy-indicator":
                return np.where(y < x, 1.0, 0.0)
            if tag == "hilbert":
                return 1.0 / (x + y)
            if tag == "sum":
                return self.profile_at(x + y)
            if tag == "radial":
                return self.profile_at(np.sqrt(x * x + y * y))
            if tag == "power-radial":
                lam = self.params["lam"]
                return (x * x + y * y) ** (-0.5 * lam)
            if tag == "homogeneous":
                return self.profile_at(y / x) / x
        raise ValueError(f"unknown kernel family tag {self.tag!r}")


def _check_profile_nonincreasing(profile: GridFunction, tag: str) -> None:
    if np.any(np.diff(profile.values) > 0.0):
        raise ValueError(f"{tag} family requires a nonincreasing profile")


def _doubling_constant(family: KernelFamily) -> float:
    ts = np.geomspace(1e-6, 1e6, 97)
    k_half = family.profile_at(ts / 2.0)
    k_full = family.profile_at(ts)
    pos = k_full > 0.0
    if not pos.any():
        return 1.0
    return float(np.max(k_half[pos] / k_full[pos]))


def hardy_averaging_family() -> KernelFamily:
    return KernelFamily("hardy-averaging")


def hardy_indicator_family() -> KernelFamily:
    return KernelFamily("hardy-indicator")


def hilbert_family() -> KernelFamily:
    fam = KernelFamily("hilbert", profile_fn=lambda t: 1.0 / t)
    return fam


def sum_family(profile: GridFunction, profile_fn=None) -> KernelFamily:
    _check_profile_nonincreasing(profile, "sum")
    return KernelFamily("sum", profile=profile, profile_fn=profile_fn)


def radial_family(profile: GridFunction, profile_fn=None) -> KernelFamily:
    _check_profile_nonincreasing(profile, "radial")
    fam = KernelFamily("radial", profile=profile, profile_fn=profile_fn)
    object.__setattr__(fam, "params", {"doubling": _doubling_constant(fam)})
    return fam


def power_radial_family(lam: float) -> KernelFamily:
    fam = KernelFamily(
        "power-radial", params={"lam": float(lam), "doubling": 2.0**lam},
        profile_fn=lambda t, _l=float(lam): t ** (-_l))
    return fam


def homogeneous_family(profile: GridFunction, profile_fn=None) -> KernelFamily:
    return KernelFamily("homogeneous", profile=profile, profile_fn=profile_fn)


_FAMILY_FLAGS = {
    "hardy-averaging": frozenset({"noninc_y", "volterra", "homogeneous"}),
    "hardy-indicator": frozenset({"noninc_y", "nondec_x", "volterra"}),
    "hilbert": frozenset({"noninc_x", "noninc_y", "sum", "symmetric", "homogeneous"}),
    "sum": frozenset({"noninc_x", "noninc_y", "sum"}),
    "radial": frozenset({"noninc_x", "noninc_y", "radial"}),
    "power-radial": frozenset({"noninc_x", "noninc_y", "radial"}),
    "homogeneous": frozenset({"homogeneous"}),
}


# ---------------------------------------------------------------------------
# the sampled kernel


@dataclass(frozen=True)
class KernelGrid:
    """Kernel sampled at cell midpoints of an x-grid (rows) and y-grid (cols)."""

    x_edges: np.ndarray
    y_edges: np.ndarray
    values: np.ndarray
    family: KernelFamily | None = None
    flags: frozenset = frozenset()

    def __post_init__(self):
        x_edges = np.asarray(self.x_edges, dtype=float)
        y_edges = np.asarray(self.y_edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(x_edges) - 1, len(y_edges) - 1):
            raise ValueError("values shape must be (n_x_cells, n_y_cells)")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError("kernel samples must be finite and nonnegative")
        object.__setattr__(self, "x_edges", x_edges)
        object.__setattr__(self, "y_edges", y_edges)
        object.__setattr__(self, "values", values)
        _verify_flags(self)

    @property
    def x_mids(self) -> np.ndarray:
        return cell_midpoints(self.x_edges)

    @property
    def y_mids(self) -> np.ndarray:
        return cell_midpoints(self.y_edges)


def _verify_flags(K: KernelGrid) -> None:
    """Spot-check declared structure on sampled rows/columns (fixed seed)."""
    if not K.flags:
        return
    rng = np.random.default_rng(20240517)
    n_x, n_y = K.values.shape
    rows = rng.integers(0, n_x, size=min(32, n_x))
    cols = rng.integers(0, n_y, size=min(32, n_y))
    tol = 1e-9 * (np.max(K.values) + 1e-300)
    if "noninc_y" in K.flags:
        for i in rows:
            if np.any(np.diff(K.values[i]) > tol):
                raise ValueError(f"flag noninc_y violated on row {i}")
    if "noninc_x" in K.flags:
        for j in cols:
            if np.any(np.diff(K.values[:, j]) > tol):
                raise ValueError(f"flag noninc_x violated on column {j}")
    if "nondec_x" in K.flags:
        for j in cols:
            if np.any(np.diff(K.values[:, j]) < -tol):
                raise ValueError(f"flag nondec_x violated on column {j}")
    if "homogeneous" in K.flags and K.family is not None:
        lam = rng.uniform(0.2, 5.0, size=100)
        x = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), size=100))
        y = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), size=100))
        base = K.family.kernel_at(x, y)
        scaled = lam * K.family.kernel_at(lam * x, lam * y)
        pos = base > 0.0
        if np.any(np.abs(scaled[pos] - base[pos]) > 1e-6 * base[pos]):
            raise ValueError("flag homogeneous violated on sampled triples")


def make_kernel(family: KernelFamily, window=DEFAULT_WINDOW,
                n: int = DEFAULT_KERNEL_N) -> KernelGrid:
    """Sample a closed-form family on an n-by-n log grid over the window."""
    edges = default_edges(window, n)
    mids = cell_midpoints(edges)
    vals = family.kernel_at(mids[:, None], mids[None, :])
    vals = np.where(np.isfinite(vals), vals, 0.0)
    flags = _FAMILY_FLAGS.get(family.tag, frozenset())
    return KernelGrid(edges, edges, vals, family=family, flags=flags)


def kernel_from_values(x_edges, y_edges, values, flags=frozenset()) -> KernelGrid:
    return KernelGrid(np.asarray(x_edges, float), np.asarray(y_edges, float),
                      np.asarray(values, float), family=None, flags=flags)


def split_signed(x_edges, y_edges, values):
    """Split signed samples into the positive-part pair (K+, K-), K = K+ - K-."""
    values = np.asarray(values, dtype=float)
    plus = np.maximum(values, 0.0)
    minus = np.maximum(-values, 0.0)
    return (kernel_from_values(x_edges, y_edges, plus),
            kernel_from_values(x_edges, y_edges, minus))


# ---------------------------------------------------------------------------
# operator application


def apply(K: KernelGrid, f: GridFunction) -> GridFunction:
    """(T_K f)(x) = int K(x, y) f(y) dy at the x-grid midpoints.

    f is projected onto the kernel's y-grid first.  Volterra indicator
    families integrate their rows exactly (prefix integrals with partial
    cells); general kernels use midpoint-rule cell sums.
    """
    fr = resample(f, K.y_edges)
    xm = K.x_mids
    if K.family is not None and K.family.tag == "hardy-averaging":
        out = prefix_integral_at(fr, xm) / xm
    elif K.family is not None and K.family.tag == "hardy-indicator":
        out = prefix_integral_at(fr, xm)
    else:
        masses = fr.values * fr.lengths
        out = np.sum(K.values * masses[None, :], axis=1)
    return GridFunction(K.x_edges, np.maximum(out, 0.0))


def apply_adjoint(K: KernelGrid, g: GridFunction) -> GridFunction:
    """(T'_K g)(y) = int K(x, y) g(x) dx at the y-grid midpoints."""
    gr = resample(g, K.x_edges)
    ym = K.y_mids
    if K.family is not None and K.family.tag == "hardy-averaging":
        # rows are g(x)/x above y: exact log-cell integrals
        lo = gr.edges[:-1]
        hi = gr.edges[1:]
        with np.errstate(divide="ignore"):
            logs = np.where(lo > 0, np.log(hi / np.maximum(lo, 1e-300)), np.inf)
        full = gr.values * logs
        suffix = np.concatenate([np.cumsum(full[::-1])[::-1], [0.0]])
        idx = np.searchsorted(gr.edges, ym, side="right") - 1
        idx = np.clip(idx, 0, gr.n_cells - 1)
        partial = gr.values[idx] * np.log(np.maximum(hi[idx] / ym, 1.0))
        out = suffix[idx + 1] + np.where(ym < hi[idx], partial, 0.0)
    elif K.family is not None and K.family.tag == "hardy-indicator":
        total = float(prefix_integral_at(gr, gr.edges[-1]))
        out = total - prefix_integral_at(gr, ym)
    else:
        masses = gr.values * gr.lengths
        out = np.sum(K.values * masses[:, None], axis=0)
    return GridFunction(K.y_edges, np.maximum(out, 0.0))


def s_operator(K: KernelGrid, g: GridFunction) -> GridFunction:
    """(Sg)(x) = int_0^x (T'_K g): prefix integral of the adjoint image."""
    adj = apply_adjoint(K, g)
    mids = adj.midpoints
    return GridFunction(adj.edges, prefix_integral_at(adj, mids), adj.lengths)


def hardy_average(f: GridFunction) -> GridFunction:
    """x -> x^-1 int_0^x f, evaluated exactly at the cell midpoints of f.

    Identical arithmetic to the exact level function at those points, and to
    the Volterra-exact kernel application of the averaging family.
    """
    mids = f.midpoints
    pref = prefix_integral_at(f, mids)
    return GridFunction(f.edges, pref / mids, f.lengths)


def h_operator(M: KernelGrid, g: GridFunction) -> GridFunction:
    """(Hg)(y) = int_0^y M(y, x) g(x) dx (Volterra application).

    Inner cells overlapping the integration limit enter with their covered
    fraction, so constant kernels reproduce the exact prefix integral.
    """
    gr = resample(g, M.y_edges)
    masses = gr.values * gr.lengths
    outer = M.x_mids
    lo = M.y_edges[:-1]
    dy = np.diff(M.y_edges)
    frac = np.clip((outer[:, None] - lo[None, :]) / dy[None, :], 0.0, 1.0)
    out = np.sum(M.values * masses[None, :] * frac, axis=1)
    return GridFunction(M.x_edges, np.maximum(out, 0.0))


# ---------------------------------------------------------------------------
# iterated rearrangement


def _rearrange_lines(vals: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Rearrange every row of vals (cell widths lens) onto the anchored grid.

    Rows already nonincreasing are returned bitwise; others are sorted
    exactly and mass-projected onto edges cumsum(lens).
    """
    n_rows, n_cols = vals.shape
    target = np.empty(n_cols + 1)
    target[0] = 0.0
    target[1:] = kahan_cumsum(lens)
    out = np.empty_like(vals)
    for i in range(n_rows):
        row = vals[i]
        if np.all(row[:-1] >= row[1:]):
            out[i] = row
            continue
        order = np.argsort(-row, kind="stable")
        pl = lens[order]
        pv = row[order]
        edges = np.empty(n_cols + 1)
        edges[0] = 0.0
        np.cumsum(pl, out=edges[1:])
        masses = np.empty(n_cols + 1)
        masses[0] = 0.0
        np.cumsum(pv * pl, out=masses[1:])
        cum = np.interp(target, edges, masses)
        out[i] = np.diff(cum) / lens
    return out


def row_rearrangement_exact(K: KernelGrid):
    """First pass only, exact: per x-row sorted (values, widths) layouts.

    Returns (sorted_values, sorted_widths), each of shape (n_x, n_y); row i
    is the exact nonincreasing rearrangement of K(x_i, .) laid out from 0.
    """
    lens = np.diff(K.y_edges)
    order = np.argsort(-K.values, axis=1, kind="stable")
    vals = np.take_along_axis(K.values, order, axis=1)
    widths = lens[order]
    return vals, widths


def iterated_rearrangement(K: KernelGrid) -> KernelGrid:
    """L(t, s): rearrange rows in y, then columns in x; nonincreasing in both.

    Output grids are the input grids anchored at 0 (same cell widths).  Sum
    kernels are bimonotone, so both passes take the bitwise fast path and
    L equals K cell by cell.
    """
    y_len = np.diff(K.y_edges)
    x_len = np.diff(K.x_edges)
    first = _rearrange_lines(K.values, y_len)
    second = _rearrange_lines(np.ascontiguousarray(first.T), x_len).T
    t_edges = K.x_edges - K.x_edges[0]
    s_edges = K.y_edges - K.y_edges[0]
    keep_family = K.family if (K.family is not None and "sum" in K.flags) else None
    flags = {"noninc_x", "noninc_y"}
    if keep_family is not None:
        flags.add("sum")
    return KernelGrid(t_edges, s_edges, np.ascontiguousarray(second),
                      family=keep_family, flags=frozenset(flags))


# ---------------------------------------------------------------------------
# the derived kernel M


def profile_antiderivative(profile: GridFunction):
    """Piecewise-linear concave antiderivative A(t) of a nonincreasing profile.

    The profile is extended by its first value below the grid and by its
    last value above it, keeping it nonincreasing on all of (0, inf); A is
    then concave, which is what the growth condition of the derived kernel
    needs.  Returns a vectorized callable.
    """
    e = profile.edges
    v = profile.values
    cum = np.concatenate([[0.0], kahan_cumsum(v * profile.lengths)])
    if e[0] > 0.0:
        head = v[0] * e[0]
        pts = np.concatenate([[0.0], e])
        vals = np.concatenate([[0.0], head + cum])
    else:
        pts = e
        vals = cum
    far = max(pts[-1], 1.0) * 1e12
    pts = np.concatenate([pts, [far]])
    vals = np.concatenate([vals, [vals[-1] + v[-1] * (far - e[-1])]])

    def A(t):
        return np.interp(np.asarray(t, dtype=float), pts, vals)

    return A


def sum_profile_m(profile: GridFunction):
    """Exact derived kernel of a sum kernel: M(a, b) = A(1/a + 1/b) - A(1/a).

    First argument is the outer (larger) variable.  Exact in the sampled
    profile representation, hence the growth inequality
    M(a, c) <= M(a, b) + M(b, c) for c < b < a holds to rounding accuracy.
    """
    A = profile_antiderivative(profile)

    def M(outer, inner):
        outer = np.asarray(outer, dtype=float)
        inner = np.asarray(inner, dtype=float)
        return A(1.0 / outer + 1.0 / inner) - A(1.0 / outer)

    return M


def m_kernel(L: KernelGrid, window=DEFAULT_WINDOW, n: int = DEFAULT_KERNEL_N,
             info: dict | None = None) -> KernelGrid:
    """Derived kernel M(outer, inner) = int_0^{1/inner} L(1/outer, z) dz.

    For sum-family L the exact profile antiderivative is used.  Otherwise
    rows of L are located at the reciprocal coordinate and prefix-integrated,
    extending beyond the grid with the last cell value; the extrapolated
    share of the integral is reported through ``info``.
    """
    edges = default_edges(window, n)
    mids = cell_midpoints(edges)
    if L.family is not None and "sum" in L.flags:
        M = sum_profile_m(_family_profile_grid(L.family))
        vals = M(mids[:, None], mids[None, :])
        if info is not None:
            info["extrapolated_fraction"] = 0.0
        return KernelGrid(edges, edges, np.maximum(vals, 0.0),
                          flags=frozenset({"gho"}))
    recips = 1.0 / mids
    row_idx = np.clip(np.searchsorted(L.x_edges, recips, side="right") - 1,
                      0, L.values.shape[0] - 1)
    z_len = np.diff(L.y_edges)
    top = L.y_edges[-1]
    extra_frac = 0.0
    vals = np.empty((n, n))
    for i, r in enumerate(row_idx):
        row = L.values[r]
        table = np.concatenate([[0.0], np.cumsum(row * z_len)])
        z = recips[::-1]  # 1/inner for inner = mids ascending -> z descending
        base = np.interp(np.minimum(z, top), L.y_edges, table)
        over = np.maximum(z - top, 0.0) * row[-1]
        tot = base + over
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(tot > 0, over / tot, 0.0)
        extra_frac = max(extra_frac, float(np.max(frac)))
        vals[i] = tot[::-1]
    if info is not None:
        info["extrapolated_fraction"] = extra_frac
    return KernelGrid(edges, edges, np.maximum(vals, 0.0), flags=frozenset())


def _family_profile_grid(family: KernelFamily) -> GridFunction:
    if family.profile is not None:
        return family.profile
    # sample the closed-form profile on a wide log grid
    edges = default_edges((1e-7, 1e7), 4096)
    mids = cell_midpoints(edges)
    vals = family.profile_at(mids)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return GridFunction(edges, vals)
