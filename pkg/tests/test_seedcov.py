"""Covariance kernels against independent quadrature and closed-form oracles."""

import numpy as np
import pytest
from scipy.integrate import quad

import logchaos as lc

LENS_K1 = {
    # (2/pi)(arccos r - r sqrt(1-r^2)), frozen by direct evaluation
    0.25: 0.685037642474,
    0.5: 0.391002218956,
    0.75: 0.144293612814,
}


def lens_k1_scalar(t):
    if t >= 1.0:
        return 0.0
    return (2 / np.pi) * (np.arccos(t) - t * np.sqrt(1 - t * t))


def test_seed_profiles_pin_dimension():
    assert lc.make_seed_covariance(1, "triangle").d == 1
    assert lc.make_seed_covariance(2, "lens").d == 2
    with pytest.raises(ValueError):
        lc.make_seed_covariance(2, "triangle")
    with pytest.raises(ValueError):
        lc.make_seed_covariance(1, "lens")


def test_triangle_k1_is_indicator_self_convolution(tri_seed):
    # (1-r)+ equals the self-convolution of 1_[-1/2,1/2]; quad needs the
    # indicator's breakpoints spelled out to integrate it exactly
    for r in (0.0, 0.3, 0.7, 0.99, 1.0, 1.5):
        breaks = [p for p in (r - 0.5, r + 0.5) if -0.5 < p < 0.5]
        conv, _ = quad(lambda y: 1.0 if abs(r - y) <= 0.5 else 0.0, -0.5, 0.5,
                       points=breaks)
        assert float(tri_seed.k1(r)) == pytest.approx(conv, abs=1e-9)


def test_lens_k1_values(lens_seed):
    assert float(lens_seed.k1(0.0)) == 1.0
    assert float(lens_seed.k1(1.0)) == 0.0
    assert float(lens_seed.k1(1.2)) == 0.0
    for r, want in LENS_K1.items():
        assert float(lens_seed.k1(r)) == pytest.approx(want, abs=1e-9)


def test_k1_unit_support_and_monotone(tri_seed, lens_seed):
    r = np.linspace(0, 2, 401)
    for seed in (tri_seed, lens_seed):
        v = seed.k1(r)
        assert np.all(v[r >= 1] == 0)
        assert np.all(np.diff(v[r <= 1]) <= 1e-12)
        assert np.all(v >= 0)


@pytest.mark.parametrize("eps", [0.5, 0.25, 2.0**-6])
def test_cutoff_variance_is_log_inverse_eps(tri_seed, lens_seed, eps):
    for seed in (tri_seed, lens_seed):
        assert float(lc.cutoff_covariance(seed, eps, 0.0)) == pytest.approx(
            np.log(1 / eps), abs=1e-12
        )


def test_cutoff_vanishes_beyond_unit_separation(tri_seed):
    assert float(lc.cutoff_covariance(tri_seed, 0.25, 1.0)) == 0.0
    assert float(lc.cutoff_covariance(tri_seed, 0.25, 3.0)) == 0.0


def test_cutoff_triangle_closed_form(tri_seed):
    # integral of (1 - s r)/s over [1, 1/eps] while s r < 1
    eps, r = 0.25, 0.1
    want, _ = quad(lambda s: max(0.0, 1 - s * r) / s, 1, 1 / eps)
    got = float(lc.cutoff_covariance(tri_seed, eps, r))
    assert got == pytest.approx(want, abs=1e-10)


def test_cutoff_lens_matches_direct_quadrature(lens_seed):
    eps, r = 0.25, 0.3
    want, _ = quad(lambda s: lens_k1_scalar(s * r) / s, 1, 1 / eps,
                   epsabs=1e-12, epsrel=1e-12, limit=300)
    got = float(lc.cutoff_covariance(lens_seed, eps, r))
    assert got == pytest.approx(want, abs=1e-9)


def test_cutoff_shapes_preserved(tri_seed):
    r = np.array([[0.0, 0.5], [1.0, 0.1]])
    out = lc.cutoff_covariance(tri_seed, 0.25, r)
    assert out.shape == (2, 2)
    assert float(out[0, 0]) == pytest.approx(np.log(4))
    assert float(out[1, 0]) == 0.0


def test_cutoff_rejects_bad_inputs(tri_seed):
    with pytest.raises(ValueError):
        lc.cutoff_covariance(tri_seed, 1.5, 0.1)
    with pytest.raises(ValueError):
        lc.cutoff_covariance(tri_seed, 0.25, -0.1)


def test_cross_cutoff_minimum_rule(tri_seed):
    r = 0.25
    coarse = lc.cutoff_covariance(tri_seed, 0.5, r)
    assert float(lc.cross_cutoff_covariance(tri_seed, 0.5, 0.25, r)) == float(coarse)
    assert float(lc.cross_cutoff_covariance(tri_seed, 0.25, 0.5, r)) == float(coarse)
    # frozen: (triangle, eps=0.5, delta=0.125, r=0.25) -> same as eps=0.5 value
    assert float(lc.cross_cutoff_covariance(tri_seed, 0.5, 0.125, 0.25)) == (
        pytest.approx(0.443147, abs=1e-6)
    )


def test_increment_kernel_telescopes(tri_seed, lens_seed):
    for seed, r in ((tri_seed, 0.2), (lens_seed, 0.35)):
        full = lc.cutoff_covariance(seed, 2.0**-4, r)
        part = lc.cutoff_covariance(seed, 2.0**-2, r)
        inc = lc.increment_kernel(seed, 2.0**-2, 2.0**-4, r)
        assert float(part + inc) == pytest.approx(float(full), abs=1e-9)


def test_increment_kernel_zero_lag(tri_seed):
    assert float(lc.increment_kernel(tri_seed, 0.25, 0.0625, 0.0)) == (
        pytest.approx(np.log(4), abs=1e-12)
    )


def test_increment_kernel_order_validation(tri_seed):
    with pytest.raises(ValueError):
        lc.increment_kernel(tri_seed, 0.0625, 0.25, 0.1)


def test_g_remainder_triangle(tri_seed):
    # k1(t)-1 = -t gives g(r) = r - 1
    assert float(lc.g_remainder(tri_seed, 1.0)) == pytest.approx(0.0, abs=1e-12)
    assert float(lc.g_remainder(tri_seed, 0.25)) == pytest.approx(-0.75, abs=1e-12)
    assert float(lc.g_remainder(tri_seed, 0.1, zero_limit=False)) == (
        pytest.approx(-0.9, abs=1e-12)
    )
    assert float(lc.g_remainder(tri_seed, 0.0, zero_limit=True)) == (
        pytest.approx(-1.0, abs=1e-12)
    )


def test_g_remainder_lens(lens_seed):
    want, _ = quad(lambda t: (lens_k1_scalar(t) - 1) / t, 0.5, 1,
                   epsabs=1e-12, epsrel=1e-12)
    assert float(lc.g_remainder(lens_seed, 0.5)) == pytest.approx(want, abs=1e-9)
    # frozen limit: -(1/2 + ln 2)
    assert float(lc.g_remainder(lens_seed, 0.0, zero_limit=True)) == (
        pytest.approx(-(0.5 + np.log(2)), abs=1e-9)
    )


def test_g_remainder_domain(tri_seed):
    with pytest.raises(ValueError):
        lc.g_remainder(tri_seed, 0.0)
    with pytest.raises(ValueError):
        lc.g_remainder(tri_seed, 1.5)


def test_full_covariance_split(tri_seed, lens_seed):
    # log(1/r) + g(r) equals the eps->0 limit of the cut-off covariance
    for seed in (tri_seed, lens_seed):
        for r in (0.2, 0.5, 0.9):
            full = np.log(1 / r) + float(lc.g_remainder(seed, r))
            approx = float(lc.cutoff_covariance(seed, 1e-9, r))
            assert approx == pytest.approx(full, abs=1e-7)


def test_limit_increment_triangle_closed_form(tri_seed):
    # |u| + |v| - |u-v| whenever all three separations stay within support
    cases = [(0.5, 0.5), (0.25, 0.75), (-0.5, 0.5), (1.0, 0.5), (-0.25, 0.5)]
    for u, v in cases:
        want = abs(u) + abs(v) - abs(u - v)
        got = float(lc.limit_increment_covariance(tri_seed, u, v))
        assert got == pytest.approx(want, abs=1e-9)


def test_limit_increment_beyond_support(tri_seed):
    # |u-v| = 1.5 leaves the closed form; direct quadrature oracle instead
    want, _ = quad(
        lambda t: (max(0.0, 1 - 1.5 * t) - (1 - 0.5 * t) - (1 - t) + 1) / t,
        0, 1,
    )
    got = float(lc.limit_increment_covariance(tri_seed, -0.5, 1.0))
    assert got == pytest.approx(want, abs=1e-9)
    assert got == pytest.approx(0.5 - np.log(1.5), abs=1e-9)


def test_window_increment_converges_to_limit(tri_seed):
    u, v = 0.5, 0.25
    lim = float(lc.limit_increment_covariance(tri_seed, u, v))
    prev = None
    for eps in (0.25, 0.0625, 2.0**-8):
        fin = float(lc.window_increment_covariance(tri_seed, eps, u, v))
        # triangle: finite-eps value is (1-eps) times the limit
        assert fin == pytest.approx((1 - eps) * lim, abs=1e-9)
        gap = abs(fin - lim)
        if prev is not None:
            assert gap < prev
        prev = gap


def test_window_increment_offset_domain(tri_seed):
    with pytest.raises(ValueError):
        lc.window_increment_covariance(tri_seed, 0.25, 1.5, 0.5)
