import numpy as np
import pytest
from hypothesis import given, settings

from orlicz_gauge.space import (
    GridFunction,
    cumulative,
    default_edges,
    dilate,
    distribution,
    distribution_function,
    integrate,
    make_weight,
    maximal,
    rearrange,
    reciprocal_transform,
    resample,
    restrict,
)
from orlicz_gauge.numerics import cell_midpoints, fsum

from conftest import gridfunctions, random_gridfunction
from oracles import distribution_value, rearrangement_value


def chi(a, b):
    return GridFunction(np.array([a, b], dtype=float), np.array([1.0]))


# ---------------------------------------------------------------------------
# distribution


def test_distribution_indicator():
    f = chi(2.0, 5.0)
    assert distribution(f, 0.5) == 3.0
    assert distribution(f, 1.0) == 0.0  # strict inequality at the level


def test_distribution_direct_count():
    f = GridFunction(np.array([0.0, 1.0, 3.0]), np.array([3.0, 1.0]))
    assert distribution(f, 2.0) == 1.0


def test_distribution_rejects_negative_level():
    with pytest.raises(ValueError):
        distribution(chi(0, 1), -0.1)


# ---------------------------------------------------------------------------
# rearrangement


def test_rearrange_indicator_translates():
    fs = rearrange(chi(2.0, 5.0))
    assert np.array_equal(fs.edges, [0.0, 3.0])
    assert np.array_equal(fs.values, [1.0])


def test_rearrange_sorts_values():
    f = GridFunction(np.array([0.0, 1.0, 2.0, 3.0]), np.array([1.0, 3.0, 2.0]))
    fs = rearrange(f)
    assert np.array_equal(fs.values, [3.0, 2.0, 1.0])
    assert np.array_equal(fs.edges, [0.0, 1.0, 2.0, 3.0])


def test_rearrange_fixed_point():
    f = GridFunction(np.array([0.0, 1.0, 2.5]), np.array([2.0, 1.0]))
    fs = rearrange(f)
    assert np.array_equal(fs.values, f.values)
    assert np.array_equal(fs.lengths, f.lengths)


def test_rearrange_zero_function():
    f = GridFunction(np.array([1.0, 4.0]), np.array([0.0]))
    fs = rearrange(f)
    assert integrate(fs) == 0.0


def test_rearrange_matches_distribution_inversion_oracle(rng):
    for _ in range(200):
        f = random_gridfunction(rng)
        fs = rearrange(f)
        mids = cell_midpoints(fs.edges)
        for t, expect in zip(mids, fs.values):
            assert rearrangement_value(f, t) == expect


@settings(max_examples=60, deadline=None)
@given(gridfunctions())
def test_equimeasurable_and_mass_preserving(f):
    fs = rearrange(f)
    for lam in [0.0, 0.1, 0.9, 1.7, 3.4, 7.9]:
        assert distribution(f, lam) == distribution(fs, lam)
    assert integrate(f) == integrate(fs)


@settings(max_examples=40, deadline=None)
@given(gridfunctions())
def test_rearrange_idempotent(f):
    fs = rearrange(f)
    fss = rearrange(fs)
    assert np.array_equal(fs.values, fss.values)
    assert np.array_equal(fs.lengths, fss.lengths)


def test_hardy_littlewood_subset_bound(rng):
    # integral over any union of cells with |E| = t is at most the prefix of f*
    for _ in range(50):
        f = random_gridfunction(rng, zero_prob=0.0)
        pick = rng.uniform(size=f.n_cells) < 0.5
        if not pick.any():
            continue
        t = fsum(f.lengths[pick])
        lhs = fsum((f.values * f.lengths)[pick])
        rhs = maximal(f, t) * t
        assert lhs <= rhs * (1 + 1e-12) + 1e-300


def test_distribution_function_inverse_roundtrip(rng):
    f = random_gridfunction(rng)
    df = distribution_function(f)
    fs = rearrange(f)
    mids = cell_midpoints(fs.edges)
    assert np.array_equal(df.generalized_inverse(mids), fs.values)
    # mu is nonincreasing with thresholds descending
    assert np.all(np.diff(df.measures) >= 0.0)
    assert np.all(np.diff(df.thresholds) < 0.0)


# ---------------------------------------------------------------------------
# maximal function


def test_maximal_indicator_values():
    f = chi(0.0, 1.0)
    assert maximal(f, 2.0) == 0.5
    assert maximal(f, 0.5) == 1.0


def test_maximal_step_arithmetic():
    f = GridFunction(np.array([0.0, 1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0]))
    assert maximal(f, 2.0) == 2.5


def test_maximal_dominates_rearrangement(rng):
    f = random_gridfunction(rng)
    fs = rearrange(f)
    mids = cell_midpoints(fs.edges)
    vals = np.array([maximal(f, t) for t in mids])
    assert np.all(vals >= fs.values - 1e-12 * np.maximum(fs.values, 1.0))
    # and is nonincreasing
    assert np.all(np.diff(vals) <= 1e-12 * np.maximum(vals[:-1], 1e-300))


def test_maximal_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        maximal(chi(0, 1), 0.0)


# ---------------------------------------------------------------------------
# dilation


def test_dilate_scalings():
    f = chi(0.0, 1.0)
    g = dilate(f, 2.0)
    assert np.allclose(g.edges, [0.0, 0.5])
    h = dilate(f, 0.5)
    assert np.allclose(h.edges, [0.0, 2.0])
    same = dilate(f, 1.0)
    assert np.array_equal(same.edges, f.edges)


@settings(max_examples=40, deadline=None)
@given(gridfunctions())
def test_dilate_mass_scaling(f):
    g = dilate(f, 2.0)
    assert integrate(g) == pytest.approx(integrate(f) / 2.0, rel=1e-14)


def test_restrict_reports_clipped_mass():
    f = GridFunction(np.array([0.0, 1.0, 2.0]), np.array([2.0, 1.0]))
    g, lost = restrict(f, 0.5, 1.5)
    assert integrate(g) == pytest.approx(1.5)
    assert lost == pytest.approx(1.5)


# ---------------------------------------------------------------------------
# weights


def test_cumulative_flat_weight():
    w = make_weight(GridFunction(np.array([0.0, 1e6]), np.array([1.0])))
    assert cumulative(w, 3.0) == pytest.approx(3.0, rel=1e-15)


def test_cumulative_power_weight():
    edges = default_edges((1e-6, 1e6), 4096)
    masses = edges[1:] ** 2 - edges[:-1] ** 2
    w = make_weight(GridFunction(edges, masses / np.diff(edges)))
    # exact at cell edges; linear-in-cell interpolation leaves an O(cell^2)
    # gap against the smooth x^2 at interior points
    assert cumulative(w, 2.0) == pytest.approx(4.0, rel=2e-5)
    assert cumulative(w, edges[2048]) == pytest.approx(edges[2048] ** 2, rel=1e-12)


def test_cumulative_indicator_weight():
    w = make_weight(GridFunction(np.array([1.0, 2.0]), np.array([1.0])))
    assert cumulative(w, 5.0) == 1.0


def test_weight_divergence_heuristic():
    flat = make_weight(GridFunction(np.array([1e-6, 1e6]), np.array([1.0])))
    assert flat.divergent
    bump = make_weight(GridFunction(np.array([0.0, 1.0]), np.array([1.0])))
    assert not bump.divergent


def test_cumulative_table_endpoint_matches_integral():
    edges = default_edges((1e-3, 1e3), 128)
    w = make_weight(GridFunction(edges, np.exp(-cell_midpoints(edges))))
    assert w.total() == pytest.approx(integrate(w.grid), rel=1e-14)


# ---------------------------------------------------------------------------
# reciprocal transform


def test_reciprocal_flat_weight_gives_inverse_square():
    edges = default_edges((1e-3, 1e3), 256)
    w = make_weight(GridFunction(edges, np.ones(256)))
    wt = reciprocal_transform(w)
    mids = cell_midpoints(wt.grid.edges)
    assert np.allclose(wt.grid.values, mids**-2.0, rtol=1e-12)


def test_reciprocal_inverse_square_gives_flat():
    edges = default_edges((1e-3, 1e3), 256)
    vals = 1.0 / (edges[:-1] * edges[1:])  # y^-2 sampled at geometric midpoints
    wt = reciprocal_transform(make_weight(GridFunction(edges, vals)))
    assert np.allclose(wt.grid.values, 1.0, rtol=1e-14)


def test_reciprocal_power_weight():
    alpha = 1.0
    edges = default_edges((1e-2, 1e2), 128)
    mids = cell_midpoints(edges)
    w = make_weight(GridFunction(edges, (alpha + 1.0) * mids**alpha))
    wt = reciprocal_transform(w)
    tmids = cell_midpoints(wt.grid.edges)
    assert np.allclose(wt.grid.values, (alpha + 1.0) * tmids ** (-alpha - 2.0),
                       rtol=1e-12)


def test_reciprocal_involution_and_mass(rng):
    edges = default_edges((1e-4, 1e4), 512)
    w = make_weight(GridFunction(edges, rng.uniform(0.1, 2.0, 512)))
    back = reciprocal_transform(reciprocal_transform(w))
    assert np.allclose(back.grid.values, w.grid.values, rtol=1e-12)
    assert integrate(reciprocal_transform(w).grid) == \
        pytest.approx(integrate(w.grid), rel=1e-12)


# ---------------------------------------------------------------------------
# resampling


def test_resample_preserves_mass_on_refinement(rng):
    f = random_gridfunction(rng, zero_prob=0.0)
    fine = np.unique(np.concatenate([f.edges, np.linspace(f.edges[0], f.edges[-1], 37)]))
    g = resample(f, fine)
    assert integrate(g) == pytest.approx(integrate(f), rel=1e-13)
    mids = cell_midpoints(fine)
    assert np.allclose(g.values, f.eval_at(mids), rtol=1e-12, atol=1e-300)


def test_gridfunction_validation():
    with pytest.raises(ValueError):
        GridFunction(np.array([1.0, 0.5]), np.array([1.0]))
    with pytest.raises(ValueError):
        GridFunction(np.array([0.0, 1.0]), np.array([-1.0]))
    with pytest.raises(ValueError):
        GridFunction(np.array([0.0, 1.0]), np.array([np.nan]))
