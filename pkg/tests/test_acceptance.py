"""Acceptance criteria of the coverage model.

Each test checks one criterion at its stated tolerance and reports the
measured figure through the ``verdict`` fixture; a PASS/FAIL summary is
printed at the end of the run. Run on its own with::

    pytest tests/test_acceptance.py -s
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from satrep.channel import ChannelParams, excess_gain_cdf, excess_gain_sf, p_los
from satrep.cli import main
from satrep.geometry import elevation_from_zenith, make_geometry, zenith_from_elevation
from satrep.link_analysis import (
    LinkBudget,
    mean_interference,
    p_spot,
    p_success_avg,
    p_success_repeated,
    p_success_single,
)
from satrep.montecarlo import SimConfig, estimate_interference, estimate_success, estimate_zenith_cdf
from satrep.repetition import RepetitionPolicy, repetitions
from satrep.scenario import Scenario, phi_max_for
from satrep.sweep import SweepGrid, run_sweep
from satrep.zenith_distribution import ZenithDistribution, avg_point_count

from conftest import make_policy

pytestmark = pytest.mark.slow


@pytest.mark.acceptance(1, "zenith/elevation round trip and orbit constants")
def test_geometry_roundtrip(verdict):
    start = time.perf_counter()
    geom = make_geometry(6371e3, 550e3)
    phi = np.linspace(0.0, geom.phi_horizon_rad, 10_000)
    err = float(np.max(np.abs(zenith_from_elevation(geom, elevation_from_zenith(geom, phi)) - phi)))
    theta = np.linspace(0.0, math.pi / 2, 10_000)
    err_t = float(np.max(np.abs(elevation_from_zenith(geom, zenith_from_elevation(geom, theta)) - theta)))
    elapsed = time.perf_counter() - start
    ok = (err < 1e-12 and err_t < 1e-12
          and abs(geom.alpha - 6371 / 6921) < 1e-15 and abs(geom.alpha - 0.920532) < 5e-7
          and abs(geom.phi_horizon_rad - math.acos(6371 / 6921)) < 1e-15
          and elapsed < 1.0)
    assert verdict(ok, f"max |err| phi->theta->phi {err:.2e}, theta->phi->theta {err_t:.2e} rad; "
                       f"alpha={geom.alpha:.6f}, phi_h={geom.phi_horizon_rad:.6f} rad; {elapsed:.3f} s")


@pytest.mark.acceptance(2, "closed-form uniform-cap checks with a = 0")
def test_uniform_cap_closed_forms(verdict, geom, channel):
    start = time.perf_counter()
    pol = make_policy(geom, a=0.0)
    dist = ZenithDistribution(geom, channel, pol)
    phi = np.linspace(0.0, pol.phi_max_rad, 1001)
    closed = (1 - np.cos(phi)) / (1 - math.cos(pol.phi_max_rad))
    cdf_err = float(np.max(np.abs(dist.cdf(phi) - closed)))
    rel = []
    for p in phi[1::50]:
        k_closed = 2 * math.pi * geom.earth_radius_m**2 * pol.lambda0 * pol.d0 * (1 - math.cos(p))
        rel.append(abs(avg_point_count(geom, channel, pol, p) / k_closed - 1))
    k_err = max(rel)
    elapsed = time.perf_counter() - start
    ok = cdf_err < 1e-9 and k_err < 1e-9 and elapsed < 1.0
    assert verdict(ok, f"CDF max err {cdf_err:.2e}, K rel err {k_err:.2e}; {elapsed:.3f} s")


@pytest.mark.acceptance(3, "zenith CDF vs 1e6 Monte Carlo samples (KS < 0.01)")
def test_zenith_distribution_ks(verdict, geom, channel):
    start = time.perf_counter()
    ks = {}
    for a in (0.0, 1e-5, 1.0):
        pol = make_policy(geom, a=a, theta_min_deg=10.0)
        emp = estimate_zenith_cdf(geom, channel, pol, SimConfig(seed=2024, n_realizations=10**6))
        assert emp.samples.size == 10**6
        ks[a] = stats.kstest(emp.samples, ZenithDistribution(geom, channel, pol).cdf).statistic
    elapsed = time.perf_counter() - start
    ok = max(ks.values()) < 0.01 and elapsed < 30
    text = ", ".join(f"a={a:g}: {d:.4f}" for a, d in ks.items())
    assert verdict(ok, f"KS {text}; {elapsed:.1f} s")


@pytest.mark.acceptance(4, "mean interference vs Monte Carlo within 5%, increasing in a")
def test_interference_validation(verdict, geom, channel, budget):
    start = time.perf_counter()
    a_values = np.logspace(-6, -3, 6)
    worst, monotone, lines = 0.0, True, []
    for theta in (5.0, 10.0, 15.0):
        analytic = []
        for a in a_values:
            pol = make_policy(geom, a=float(a), theta_min_deg=theta)
            i_an = mean_interference(geom, channel, pol, budget)
            expected_devices = ZenithDistribution(geom, channel, pol).expected_count()
            # enough fields that the mean is resolved well inside 5%
            n = int(max(2000, math.ceil(2e6 / max(expected_devices, 1.0))))
            est = estimate_interference(geom, channel, pol, budget, SimConfig(seed=7, n_realizations=n))
            assert est.n >= 2000
            worst = max(worst, abs(est.value / i_an - 1))
            analytic.append(i_an)
        monotone &= bool(np.all(np.diff(analytic) > 0))
        lines.append(f"th{theta:g}")
    elapsed = time.perf_counter() - start
    ok = worst < 0.05 and monotone and elapsed < 300
    assert verdict(ok, f"worst relative gap {100 * worst:.2f}% over 18 cases; "
                       f"strictly increasing in a: {monotone}; {elapsed:.1f} s")


@pytest.mark.acceptance(5, "success probabilities vs Monte Carlo within 3 SE (1e5 trials)")
def test_success_validation(verdict, geom, channel, budget):
    start = time.perf_counter()
    worst, cases = 0.0, 0
    for a in (0.0, 5e-5, 2e-4):
        pol = make_policy(geom, a=a, theta_min_deg=10.0)
        i_mean = mean_interference(geom, channel, pol, budget)
        sim = SimConfig(seed=99, n_realizations=100_000)
        for frac in (0.0, 0.5, 0.95):
            phi = frac * pol.phi_max_rad
            est = estimate_success(geom, channel, pol, budget, sim, phi, single=True,
                                   mean_interference_w=i_mean)
            worst = max(worst, est.z_score(p_success_single(geom, channel, pol, budget, phi, i_mean)))
            cases += 1
        est = estimate_success(geom, channel, pol, budget, sim, mean_interference_w=i_mean)
        worst = max(worst, est.z_score(p_success_avg(geom, channel, pol, budget, i_mean)))
        cases += 1
    elapsed = time.perf_counter() - start
    ok = worst < 3.0 and elapsed < 300
    assert verdict(ok, f"max |z| = {worst:.2f} over {cases} comparisons; {elapsed:.1f} s")


@pytest.mark.acceptance(6, "repetition raises the averaged success probability")
def test_repetition_benefit(verdict):
    scn = Scenario.default(theta_min_rad=math.radians(10.0), a=5e-5)
    assert scn.budget.sinr_threshold == pytest.approx(0.1)
    with_rep = scn.coverage().p_success_avg
    without = scn.with_policy(a=0.0).coverage().p_success_avg
    assert verdict(with_rep > without, f"p_avg a=5e-5: {with_rep:.4f} > a=0: {without:.4f}")


def _is_interior(values, i):
    return 0 < i < len(values) - 1


@pytest.mark.acceptance(7, "interior optimum of p_global over theta_min and over (a, theta_min)")
def test_tradeoff_and_optimum(verdict):
    start = time.perf_counter()
    scn = Scenario.default()
    thetas = list(range(1, 46))
    curve = [scn.with_policy(a=5e-5, theta_min_rad=math.radians(t)).coverage(n_table=2).p_global
             for t in thetas]
    i_best = int(np.argmax(curve))
    diffs = np.diff(curve)
    non_monotone = bool(np.any(diffs > 0) and np.any(diffs < 0))

    grid = SweepGrid.default(k=10)
    res = run_sweep(scn, grid)
    opt = res.optimum
    ia = grid.a_values.index(opt.a)
    it = grid.theta_min_values.index(opt.theta_min_rad)
    elapsed = time.perf_counter() - start
    ok = (non_monotone and _is_interior(thetas, i_best)
          and _is_interior(grid.a_values, ia) and _is_interior(grid.theta_min_values, it)
          and not res.failures and elapsed < 120)
    assert verdict(ok, f"1-D peak at theta_min={thetas[i_best]} deg (p_global={curve[i_best]:.4f}); "
                       f"2-D optimum a={opt.a:.3g}, theta_min={math.degrees(opt.theta_min_rad):g} deg, "
                       f"p_s={opt.p_s:.4f} (grid index {ia},{it}); {elapsed:.1f} s")


@pytest.mark.acceptance(8, "simulate and sweep outputs are byte-identical across runs")
def test_determinism(verdict, tmp_path):
    runs = {
        "simulate": (["simulate", "--sim.seed=5"], ["simulate.csv"]),
        "simulate-json": (["simulate", "--sim.seed=5", "-f", "json"], ["simulate.json"]),
        "sweep": (["sweep"], ["sweep_surface.csv", "sweep_frontier.csv"]),
    }
    same = {}
    for name, (args, files) in runs.items():
        outs = []
        for rep in ("first", "second"):
            d = tmp_path / name / rep
            assert main(args + ["-o", str(d)]) == 0
            outs.append([(d / f).read_bytes() for f in files])
        same[name] = outs[0] == outs[1]
    ok = all(same.values())
    assert verdict(ok, ", ".join(f"{k}: {'identical' if v else 'DIFFERENT'}" for k, v in same.items()))


def _random_config(rng):
    geom = make_geometry(rng.uniform(6000e3, 7000e3), rng.uniform(300e3, 2000e3))
    mu_los = rng.uniform(-5, 10)
    channel = ChannelParams(beta=rng.uniform(0.01, 3), mu_los_db=mu_los,
                            sigma_los_db=rng.uniform(0, 6), mu_nlos_db=mu_los + rng.uniform(0, 30),
                            sigma_nlos_db=rng.uniform(0, 12), frequency_hz=rng.uniform(0.4e9, 30e9))
    theta_min = math.radians(rng.uniform(0, 80))
    a = 0.0 if rng.random() < 0.1 else 10 ** rng.uniform(-8, 0)
    policy = RepetitionPolicy(d0=10 ** rng.uniform(-7, 0), a=a, phi_max_rad=phi_max_for(geom, theta_min),
                              lambda0=10 ** rng.uniform(-10, -4))
    budget = LinkBudget.from_db(rng.uniform(0, 40), rng.uniform(-150, -100), rng.uniform(-20, 20),
                                rng.uniform(0.01, 1))
    return geom, channel, policy, budget


@pytest.mark.acceptance(9, "probabilities in [0, 1] and p(N) >= p(1) over 1e4 fuzzed configurations")
def test_probability_sanity(verdict):
    rng = np.random.default_rng(20241016)
    bad, checked = [], 0
    for i in range(10_000):
        geom, channel, policy, budget = _random_config(rng)
        phi = np.concatenate(([0.0, policy.phi_max_rad], rng.uniform(0, policy.phi_max_rad, 6)))
        i_mean = mean_interference(geom, channel, policy, budget)
        x = 10 ** rng.uniform(-6, 2, phi.size)
        p1 = np.asarray(p_success_single(geom, channel, policy, budget, phi, i_mean))
        pn = np.asarray(p_success_repeated(geom, channel, policy, budget, phi, i_mean))
        probs = {
            "p_los": p_los(geom, channel, phi),
            "gain_cdf": excess_gain_cdf(geom, channel, phi, x),
            "gain_sf": excess_gain_sf(geom, channel, phi, x),
            "zenith_cdf": ZenithDistribution(geom, channel, policy).cdf(phi),
            "p_single": p1,
            "p_repeated": pn,
            "p_avg": p_success_avg(geom, channel, policy, budget, i_mean),
            "p_spot": p_spot(geom, 1, policy.phi_max_rad),
        }
        for name, v in probs.items():
            v = np.asarray(v)
            if not np.all((v >= 0) & (v <= 1)):
                bad.append((i, name))
        if not np.all(pn >= p1):
            bad.append((i, "p(N) < p(1)"))
        if np.any(np.asarray(repetitions(geom, channel, policy, phi)) < 1):
            bad.append((i, "N < 1"))
        checked += 1
    ok = not bad and checked == 10_000
    assert verdict(ok, f"{checked} configurations x {len(probs)} operations, {len(bad)} violations"
                       + (f" (first: {bad[0]})" if bad else ""))
