import numpy as np
import pytest

import logchaos as lc
from logchaos import QualityError
from logchaos.reconstruct import mollifier_from_key


def test_mollifier_discrete_unit_mass():
    for d, n in ((1, 128), (2, 48)):
        grid = lc.GridSpec(d=d, n=n)
        moll = lc.build_mollifier(grid, 0.0625)
        assert np.all(moll.weights >= 0)
        assert moll.weights.sum() * grid.cell_volume == pytest.approx(1.0, abs=1e-14)


def test_mollifier_support_radius():
    grid = lc.GridSpec(d=1, n=256)
    eps = 0.0625
    moll = lc.build_mollifier(grid, eps)
    offsets = np.arange(-moll.half_width, moll.half_width + 1) * grid.h
    assert np.all(np.abs(offsets) < eps)
    # weight decays to zero toward the support edge
    assert moll.weights[0] < moll.weights[moll.half_width]


def test_mollifier_scale_bounded_by_margin():
    grid = lc.GridSpec(d=1, n=128, margin=0.125)
    lc.build_mollifier(grid, 0.125)
    with pytest.raises(ValueError):
        lc.build_mollifier(grid, 0.25)
    with pytest.raises(ValueError):
        lc.build_mollifier(grid, 0.0, profile="quartic-bump")
    with pytest.raises(ValueError):
        lc.build_mollifier(grid, 0.0625, profile="boxcar")


def test_mollifier_key_round_trip(grid128):
    moll = lc.build_mollifier(grid128, 0.03125)
    back = mollifier_from_key(grid128, moll.key)
    assert back.eps == moll.eps
    assert np.array_equal(back.weights, moll.weights)


def test_test_function_support(grid128):
    psi = lc.build_test_function(grid128)
    x = grid128.axis
    assert np.all(psi.values[x < grid128.margin] == 0)
    assert np.all(psi.values[x > 1 - grid128.margin] == 0)
    # cell centers straddle the bump peak, so the max sits just under 1
    assert 0.99 < psi.values.max() <= 1.0
    with pytest.raises(ValueError):
        lc.build_test_function(grid128, center=0.2, radius=0.3)


def test_test_function_2d_support():
    grid = lc.GridSpec(d=2, n=32, margin=0.25)
    psi = lc.build_test_function(grid)
    assert psi.values.shape == (32, 32)
    assert psi.values[0, 16] == 0.0
    assert psi.values[16, 16] > 0.9


def test_log_smoothed_needs_positive_gamma(small_ensemble, grid128):
    eps = 0.125
    nu = lc.gmc_subcritical(small_ensemble.at_scale(eps), np.log(1 / eps),
                            0.5, grid128, eps=eps)
    moll = lc.build_mollifier(grid128, eps)
    with pytest.raises(ValueError):
        lc.log_smoothed_field(nu, 0.0, moll)
    a = lc.log_smoothed_field(nu, 0.5, moll)
    assert a.shape == (nu.n_replicas, grid128.inner_axis().shape[0])


def _deterministic_chaos(grid, phi, gamma):
    masses = grid.cell_volume * np.exp(gamma * phi)[None]
    return lc.ChaosMeasure(grid=grid, gamma=gamma, variant="subcritical",
                           masses=masses)


def _zero_counter(gamma, moll):
    return lc.CounterTerm(gamma=gamma, eps=moll.eps, mollifier_key=moll.key,
                          mode="pooled", values=np.asarray(0.0),
                          se=np.asarray(0.0), n_replicas=1)


def test_deterministic_round_trip_single_cell_mollifier():
    """With support radius h the mollifier reads one cell and the log
    inverts the exponential exactly: machine-precision recovery."""
    grid = lc.GridSpec(d=1, n=256)
    phi = 0.3 * np.sin(2 * np.pi * grid.axis) + 0.1
    gamma = 0.5
    det = _deterministic_chaos(grid, phi, gamma)
    moll = lc.build_mollifier(grid, grid.h)
    psi = lc.build_test_function(grid)
    pair = lc.reconstruct_pairing(det, _zero_counter(gamma, moll), psi)
    truth = psi.pair_with(phi[None])
    assert abs(pair[0] - truth[0]) / abs(truth[0]) < 1e-12


def test_deterministic_round_trip_wide_mollifier():
    """A genuine multi-cell window only adds the mollifier quadrature
    bias, second order in eps; the pairing error shrinks ~ eps^2."""
    grid = lc.GridSpec(d=1, n=1024)
    phi = 0.2 * np.sin(2 * np.pi * grid.axis) + 0.05
    gamma = 0.5
    det = _deterministic_chaos(grid, phi, gamma)
    psi = lc.build_test_function(grid)
    truth = psi.pair_with(phi[None])[0]
    errs = []
    for eps in (2.0**-5, 2.0**-6, 2.0**-7):
        moll = lc.build_mollifier(grid, eps)
        pair = lc.reconstruct_pairing(det, _zero_counter(gamma, moll), psi)[0]
        errs.append(abs(pair - truth) / abs(truth))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_counter_term_split_sample_consistency(small_ensemble, grid128):
    eps = 0.125
    nu = lc.gmc_subcritical(small_ensemble.at_scale(eps), np.log(1 / eps),
                            0.5, grid128, eps=eps)
    moll = lc.build_mollifier(grid128, eps)
    half = nu.n_replicas // 2
    first = lc.ChaosMeasure(grid=grid128, gamma=0.5, variant="subcritical",
                            masses=nu.masses[:half], eps=eps)
    second = lc.ChaosMeasure(grid=grid128, gamma=0.5, variant="subcritical",
                             masses=nu.masses[half:], eps=eps)
    c1 = lc.estimate_counter_term(first, 0.5, moll)
    c2 = lc.estimate_counter_term(second, 0.5, moll)
    combined_se = float(np.hypot(c1.se, c2.se))
    assert abs(float(c1.values) - float(c2.values)) <= 3 * combined_se


def test_counter_term_modes_agree(small_ensemble, grid128):
    eps = 0.125
    nu = lc.gmc_subcritical(small_ensemble.at_scale(eps), np.log(1 / eps),
                            0.5, grid128, eps=eps)
    moll = lc.build_mollifier(grid128, eps)
    pooled = lc.estimate_counter_term(nu, 0.5, moll, mode="pooled")
    per_point = lc.estimate_counter_term(nu, 0.5, moll, mode="per-point",
                                         se_cap=0.2)
    assert float(per_point.values.mean()) == pytest.approx(
        float(pooled.values), abs=1e-10
    )
    table = per_point.table(grid128)
    assert table.shape == (grid128.inner_axis().shape[0],)


def test_counter_term_replica_floor(grid128):
    masses = np.full((50, 128), grid128.cell_volume)
    nu = lc.ChaosMeasure(grid=grid128, gamma=0.5, variant="subcritical",
                         masses=masses)
    moll = lc.build_mollifier(grid128, 0.0625)
    with pytest.raises(ValueError):
        lc.estimate_counter_term(nu, 0.5, moll)


def test_counter_term_se_cap(small_ensemble, grid128):
    eps = 0.125
    nu = lc.gmc_subcritical(small_ensemble.at_scale(eps)[:120],
                            np.log(1 / eps), 0.5, grid128, eps=eps)
    moll = lc.build_mollifier(grid128, eps)
    with pytest.raises(QualityError):
        lc.estimate_counter_term(nu, 0.5, moll, se_cap=1e-4)


def test_gaussian_shift_counter_arithmetic(grid128):
    moll = lc.build_mollifier(grid128, 0.0625)
    base = lc.CounterTerm(gamma=0.5, eps=moll.eps, mollifier_key=moll.key,
                          mode="pooled", values=np.asarray(1.0),
                          se=np.asarray(0.01), n_replicas=200)
    shifted = lc.gaussian_shift_counter(base, 0.5, g_source=-1.0, g_target=-0.4)
    # (gamma/2)(g_S - g_G) = 0.25 * (-0.6)
    assert float(shifted.values) == pytest.approx(1.0 - 0.15)
    with pytest.raises(ValueError):
        lc.gaussian_shift_counter(base, 0.5, g_source=None, g_target=-0.4)
    with pytest.raises(ValueError):
        lc.gaussian_shift_counter(base, 0.7, g_source=-1.0, g_target=-0.4)


def test_pairing_rejects_mismatched_counter(small_ensemble, grid128):
    eps = 0.125
    nu = lc.gmc_subcritical(small_ensemble.at_scale(eps), np.log(1 / eps),
                            0.5, grid128, eps=eps)
    moll = lc.build_mollifier(grid128, eps)
    counter = lc.estimate_counter_term(nu, 0.5, moll)
    other = lc.gmc_subcritical(small_ensemble.at_scale(eps), np.log(1 / eps),
                               0.7, grid128, eps=eps)
    psi = lc.build_test_function(grid128)
    with pytest.raises(ValueError):
        lc.reconstruct_pairing(other, counter, psi)


def test_convergence_study_small(small_ensemble, grid128):
    psi = lc.build_test_function(grid128)
    study = lc.convergence_study(small_ensemble, 0.5, psi)
    assert len(study) >= 1
    eps_seen = [r.eps for r in study]
    assert eps_seen == sorted(eps_seen, reverse=True)
    for res in study:
        assert res.l2.estimate >= 0
        assert res.pairings.shape == res.reference.shape
        assert -1 <= res.corr <= 1
    # errors shrink toward the reference scale
    assert study.results[-1].l2.estimate <= study.results[0].l2.estimate


def test_convergence_study_needs_gap(small_ensemble):
    psi = lc.build_test_function(small_ensemble.grid)
    with pytest.raises(ValueError):
        lc.convergence_study(small_ensemble, 0.5, psi,
                             recon_scales=[0.0625], ref_scale=0.03125)
