import numpy as np
import pytest

from orlicz_gauge.young import (
    check_convex_composition,
    check_delta2,
    complementary,
    make_power_nfunction,
    make_sampled_nfunction,
    normalize_unit,
    sample_density,
)

from oracles import conjugate_value, quad


def exp_density():
    return sample_density(lambda t: np.exp(t) - 1.0)


# ---------------------------------------------------------------------------
# power family


def test_power_values():
    P2 = make_power_nfunction(2.0)
    assert P2.big(3.0) == 9.0
    assert P2.phi(3.0) == 6.0
    P4 = make_power_nfunction(4.0)
    assert P4.big_inv(16.0) == pytest.approx(2.0, rel=1e-15)


def test_power_rejects_p_at_most_one():
    with pytest.raises(ValueError):
        make_power_nfunction(1.0)
    with pytest.raises(ValueError):
        make_power_nfunction(0.5)


def test_complementary_of_square():
    psi = complementary(make_power_nfunction(2.0))
    # numeric conjugate oracle: max_s (s t - s^2) = t^2/4
    s_grid = np.linspace(0.0, 50.0, 20001)
    for t in [0.5, 1.0, 2.0, 7.0]:
        assert psi.big(t) == pytest.approx(t * t / 4.0, rel=1e-12)
        assert psi.big(t) == pytest.approx(
            conjugate_value(make_power_nfunction(2.0).big, t, s_grid), rel=1e-6)


def test_complementary_cube_spot_value():
    # density of t^3 is 3t^2, so phi^-1(s) = (s/3)^(1/2); integral over (0, 2)
    psi = complementary(make_power_nfunction(3.0))
    expect = quad(lambda s: np.sqrt(s / 3.0), 0.0, 2.0)
    assert expect == pytest.approx(1.0886621079036347, rel=1e-12)
    assert psi.big(2.0) == pytest.approx(expect, rel=1e-12)


def test_complementary_involution_power():
    P2 = make_power_nfunction(2.0)
    back = complementary(complementary(P2))
    ts = np.geomspace(1e-6, 1e6, 97)
    assert np.allclose(back.big(ts), P2.big(ts), rtol=1e-12)


def test_holder_exponent_from_growth():
    for p in (1.5, 2.0, 3.0, 5.0):
        psi = complementary(make_power_nfunction(p))
        slope = np.log(psi.big(10.0) / psi.big(1.0)) / np.log(10.0)
        assert slope == pytest.approx(p / (p - 1.0), rel=1e-6)


# ---------------------------------------------------------------------------
# sampled family


def test_sampled_matches_callable():
    nf = exp_density()
    for x in [1e-3, 0.1, 1.0, 5.0, 40.0]:
        assert float(nf.big(x)) == pytest.approx(np.exp(x) - x - 1.0, rel=2e-4)
        assert float(nf.phi(x)) == pytest.approx(np.exp(x) - 1.0, rel=2e-4)


def test_sampled_inverse_roundtrip_on_knots():
    nf = exp_density()
    ts = nf.line.xs[::97]
    assert np.allclose(nf.big_inv(nf.big(ts)), ts, rtol=1e-9)
    assert np.allclose(nf.phi_inv(nf.phi(ts)), ts, rtol=1e-12)


def test_sampled_inverse_tables_monotone():
    nf = exp_density()
    s = np.geomspace(1e-10, 1e10, 257)
    assert np.all(np.diff(nf.big_inv(s)) > 0.0)
    assert np.all(np.diff(nf.phi_inv(s)) > 0.0)


def test_young_inequality_and_equality_sampled():
    nf = exp_density()
    psi = complementary(nf)
    grid = np.geomspace(1e-4, 1e2, 64)
    s, t = np.meshgrid(grid, grid, indexing="ij")
    gap = np.asarray(nf.big(s)) + np.asarray(psi.big(t)) - s * t
    scale = np.maximum(np.maximum(np.asarray(nf.big(s)), np.asarray(psi.big(t))), 1.0)
    assert np.min(gap / scale) >= -1e-12
    # equality at t = phi(s)
    ph = np.asarray(nf.phi(grid))
    resid = np.abs(grid * ph - np.asarray(nf.big(grid)) - np.asarray(psi.big(ph)))
    assert np.all(resid <= 1e-8 * grid * ph)


def test_double_complementary_sampled():
    nf = exp_density()
    back = complementary(complementary(nf))
    ts = np.geomspace(1e-6, 1e2, 129)
    assert np.allclose(back.big(ts), nf.big(ts), rtol=1e-9)


def test_degenerate_density_rejected():
    with pytest.raises(ValueError, match="degenerate|increase"):
        make_sampled_nfunction(np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.0, 2.0]))


# ---------------------------------------------------------------------------
# structural checks


def test_delta2_powers():
    rep = check_delta2(make_power_nfunction(2.0))
    assert rep.passed and rep.sup_ratio == pytest.approx(4.0, rel=1e-12)
    rep = check_delta2(make_power_nfunction(5.0))
    assert rep.passed and rep.sup_ratio == pytest.approx(32.0, rel=1e-12)


def test_delta2_fails_for_exponential_growth():
    rep = check_delta2(exp_density(), t_grid=2.0 ** np.arange(-10, 21))
    assert not rep.passed


def test_delta2_requires_wide_grid():
    with pytest.raises(ValueError):
        check_delta2(make_power_nfunction(2.0), t_grid=np.geomspace(1.0, 10.0, 16))


def test_convex_composition_cases():
    P2, P4 = make_power_nfunction(2.0), make_power_nfunction(4.0)
    assert check_convex_composition(P4, P2).passed        # s^2, convex
    assert not check_convex_composition(P2, P4).passed    # s^(1/2), concave
    assert check_convex_composition(P2, P2).passed        # identity


def test_normalize_unit():
    nf = normalize_unit(make_power_nfunction(3.0, coeff=5.0))
    assert float(nf.big(1.0)) == pytest.approx(1.0, rel=1e-14)
    nfs = normalize_unit(exp_density())
    assert float(nfs.big(1.0)) == pytest.approx(1.0, rel=1e-12)
