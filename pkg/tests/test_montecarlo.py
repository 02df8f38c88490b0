import math

import numpy as np
import pytest
from scipy import integrate, stats

from satrep.link_analysis import mean_interference, p_success_avg, p_success_single
from satrep.montecarlo import (
    DeviceCapExceeded,
    EmpiricalCDF,
    SimConfig,
    estimate_interference,
    estimate_success,
    estimate_zenith_cdf,
    interference_samples,
    sample_active_zenith,
    sample_device_field,
    stream,
    wilson_estimate,
)
from satrep.zenith_distribution import ZenithDistribution

from conftest import make_policy


def test_streams_are_keyed():
    a = stream(1, "x", 0).random(4)
    np.testing.assert_array_equal(a, stream(1, "x", 0).random(4))
    assert not np.array_equal(a, stream(1, "x", 1).random(4))
    assert not np.array_equal(a, stream(1, "y", 0).random(4))
    assert not np.array_equal(a, stream(2, "x", 0).random(4))


def test_field_count_is_poisson(geom, channel):
    pol = make_policy(geom, a=5e-5)
    expected = ZenithDistribution(geom, channel, pol).expected_count()
    rng = np.random.default_rng(11)
    counts = np.array([sample_device_field(geom, channel, pol, rng).size for _ in range(4000)])
    # Poisson: mean == variance == expected count
    se = math.sqrt(expected / counts.size)
    assert abs(counts.mean() - expected) < 4 * se
    assert counts.var(ddof=1) == pytest.approx(expected, rel=0.1)


def test_field_annulus_counts(geom, channel):
    pol = make_policy(geom, a=5e-5)
    dist = ZenithDistribution(geom, channel, pol)
    rng = np.random.default_rng(5)
    phi = np.concatenate([sample_device_field(geom, channel, pol, rng) for _ in range(3000)])
    edges = np.linspace(0, pol.phi_max_rad, 6)
    hist, _ = np.histogram(phi, edges)
    expect = np.diff([dist.expected_count(e) for e in edges]) * 3000
    chi2 = np.sum((hist - expect) ** 2 / expect)
    assert stats.chi2.sf(chi2, df=len(hist) - 1) > 1e-3


def test_device_cap(geom, channel):
    pol = make_policy(geom, a=5e-5)
    with pytest.raises(DeviceCapExceeded):
        sample_device_field(geom, channel, pol, np.random.default_rng(0), n_devices_cap=0)


def test_active_zenith_matches_distribution(geom, channel):
    pol = make_policy(geom, a=1e-5)
    phi = sample_active_zenith(geom, channel, pol, np.random.default_rng(2), 50_000)
    dist = ZenithDistribution(geom, channel, pol)
    assert stats.kstest(phi, dist.cdf).pvalue > 1e-3


def test_empirical_cdf():
    emp = EmpiricalCDF(np.array([0.1, 0.2, 0.3, 0.4]))
    assert emp(0.25) == 0.5
    assert emp(0.0) == 0.0 and emp(1.0) == 1.0
    assert emp.table([0.1, 0.4]).tolist() == [[0.1, 0.25], [0.4, 1.0]]


def test_zenith_cdf_estimate_close(geom, channel):
    pol = make_policy(geom, a=5e-5)
    emp = estimate_zenith_cdf(geom, channel, pol, SimConfig(seed=3, n_realizations=20_000))
    dist = ZenithDistribution(geom, channel, pol)
    assert stats.kstest(emp.samples, dist.cdf).statistic < 0.02


def test_interference_estimate(geom, channel, budget):
    pol = make_policy(geom, a=5e-5)
    est = estimate_interference(geom, channel, pol, budget, SimConfig(seed=9, n_realizations=4000))
    ref = mean_interference(geom, channel, pol, budget)
    assert est.n == 4000
    assert est.z_score(ref) < 4


def test_std_error_scales_with_sqrt_n(geom, channel, budget):
    pol = make_policy(geom, a=5e-5)
    small = estimate_interference(geom, channel, pol, budget, SimConfig(seed=4, n_realizations=1000))
    big = estimate_interference(geom, channel, pol, budget, SimConfig(seed=4, n_realizations=16000))
    assert small.std_error / big.std_error == pytest.approx(4.0, rel=0.25)


def test_interference_deterministic(geom, channel, budget):
    pol = make_policy(geom, a=5e-5)
    sim = SimConfig(seed=21, n_realizations=500)
    np.testing.assert_array_equal(interference_samples(geom, channel, pol, budget, sim),
                                  interference_samples(geom, channel, pol, budget, sim))


def test_wilson_estimate():
    e = wilson_estimate(50, 100)
    assert e.value == 0.5
    assert e.std_error == pytest.approx(0.05 / (1 + 1 / 100) * math.sqrt(1 + 1 / 100), rel=1e-12)
    zero = wilson_estimate(0, 1000)
    assert zero.value == 0.0 and zero.std_error > 0
    assert wilson_estimate(1000, 1000).std_error > 0


def test_success_estimates(geom, channel, budget):
    pol = make_policy(geom, a=5e-5)
    i = mean_interference(geom, channel, pol, budget)
    sim = SimConfig(seed=8, n_realizations=20_000)
    phi = 0.8 * pol.phi_max_rad
    single = estimate_success(geom, channel, pol, budget, sim, phi, single=True, mean_interference_w=i)
    assert single.z_score(p_success_single(geom, channel, pol, budget, phi, i)) < 4
    avg = estimate_success(geom, channel, pol, budget, sim, mean_interference_w=i)
    assert avg.z_score(p_success_avg(geom, channel, pol, budget, i)) < 4


def test_resampled_interference_runs(geom, channel, budget):
    pol = make_policy(geom, a=5e-5)
    sim = SimConfig(seed=8, n_realizations=2000, resample_interference=True)
    est = estimate_success(geom, channel, pol, budget, sim, 0.1)
    assert 0.0 <= est.value <= 1.0


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(seed=-1)
    with pytest.raises(ValueError):
        SimConfig(n_realizations=0)


def test_std_error_halves_when_n_quadruples(geom, channel, budget):
    pol = make_policy(geom, a=5e-5, theta_min_deg=15.0)
    se = [estimate_interference(geom, channel, pol, budget, SimConfig(seed=31, n_realizations=n)).std_error
          for n in (4000, 16000)]
    assert se[0] / se[1] == pytest.approx(2.0, rel=0.2)
    sim = [SimConfig(seed=31, n_realizations=n) for n in (5000, 20000)]
    se_p = [estimate_success(geom, channel, pol, budget, s, 0.9 * pol.phi_max_rad, single=True).std_error
            for s in sim]
    assert se_p[0] / se_p[1] == pytest.approx(2.0, rel=0.2)


def test_uniform_field_counts_chi_square(geom, channel):
    # a = 0: counts are Poisson with the closed-form cap mean
    pol = make_policy(geom, a=0.0, lambda0=2e-7)
    mean = 2 * math.pi * geom.earth_radius_m**2 * pol.lambda0 * pol.d0 * (1 - math.cos(pol.phi_max_rad))
    rng = np.random.default_rng(17)
    counts = np.array([sample_device_field(geom, channel, pol, rng).size for _ in range(3000)])
    top = int(stats.poisson.ppf(0.999, mean))
    observed = np.bincount(np.minimum(counts, top), minlength=top + 1)
    expected = stats.poisson.pmf(np.arange(top + 1), mean) * counts.size
    expected[-1] += stats.poisson.sf(top, mean) * counts.size
    keep = expected >= 5
    obs, exp = observed[keep], expected[keep]
    if not keep.all():  # lump the sparse tail into one bin
        obs = np.append(obs, observed[~keep].sum())
        exp = np.append(exp, expected[~keep].sum())
    chi2 = np.sum((obs - exp) ** 2 / exp)
    assert stats.chi2.sf(chi2, df=obs.size - 1) > 1e-3


def test_deterministic_channel_small_case(geom, budget):
    # no fading (sigma = mu = 0), no repetition: E[I] = kappa p_t E[count] l averaged over the cap
    from satrep.channel import ChannelParams, fspl_gain
    params = ChannelParams(mu_los_db=0.0, sigma_los_db=0.0, mu_nlos_db=0.0, sigma_nlos_db=0.0)
    pol = make_policy(geom, a=0.0, theta_min_deg=60.0)
    est = estimate_interference(geom, params, pol, budget, SimConfig(seed=3, n_realizations=20_000))
    phi = np.linspace(0, pol.phi_max_rad, 20001)
    w = np.sin(phi)
    mean_l = integrate.simpson(w * fspl_gain(geom, params, phi), x=phi) / integrate.simpson(w, x=phi)
    count = 2 * math.pi * geom.earth_radius_m**2 * pol.lambda0 * pol.d0 * (1 - math.cos(pol.phi_max_rad))
    hand = budget.kappa * budget.tx_power_w * count * mean_l
    assert est.z_score(hand) < 3
    assert mean_interference(geom, params, pol, budget) == pytest.approx(hand, rel=1e-6)
