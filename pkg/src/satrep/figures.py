"""Plot-ready tables for each figure and for ad-hoc sweeps.

Figure-specific settings (tuning factors, admittance angles) follow the
figure captions; every other parameter comes from the configuration.
Points outside a curve's admittance region are written as ``nan``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from satrep import channel as ch
from satrep import link_analysis as la
from satrep import montecarlo as mc
from satrep import repetition as rep
from satrep.config import ScenarioConfig
from satrep.geometry import zenith_from_elevation
from satrep.output import Table
from satrep.scenario import Scenario
from satrep.sweep import SweepGrid, run_sweep

FIG23_A = (1e-5, 2e-4, 1.0)
FIG23_THETA_MIN_DEG = (5.0, 10.0, 15.0)
FIG4_A = (0.0, 1e-5, 1.0)
FIG4_THETA_MIN_DEG = 10.0
FIG5_THETA_MIN_DEG = (5.0, 10.0, 15.0)
FIG5_A = tuple(np.logspace(-6, -3, 13))
FIG6_A = 2e-4
FIG6_THETA_MIN_DEG = (5.0, 10.0, 15.0)
FIG789_A = 5e-5
THETA_MIN_AXIS_DEG = tuple(range(1, 46))

FIGURES = tuple(f"figure{n}" for n in range(2, 10))


def label(x: float) -> str:
    """Compact numeric label for column names: 1e-05 -> 1e-5, 0.0002 -> 2e-4."""
    if x == 0:
        return "0"
    if x == int(x) and abs(x) < 1e4:
        return str(int(x))
    mant, exp = f"{x:.6e}".split("e")
    mant = mant.rstrip("0").rstrip(".")
    return f"{mant}e{int(exp)}"


def table_metadata(cfg: ScenarioConfig, **extra):
    out = {"config_hash": cfg.config_hash(), "seed": cfg.get("sim", "seed"),
           "config": cfg.model_values()}
    out.update(extra)
    return out


def _theta_grid():
    return np.linspace(0.0, 90.0, 181)


def _masked(scn: Scenario, theta_deg, func):
    """Evaluate ``func(phi)`` where ``theta >= theta_min``; ``nan`` elsewhere."""
    phi = np.asarray(zenith_from_elevation(scn.geom, np.radians(theta_deg)))
    inside = phi <= scn.policy.phi_max_rad
    out = np.full(phi.shape, math.nan)
    if inside.any():
        out[inside] = np.asarray(func(phi[inside]), dtype=float)
    return out


def _duty_or_reps(cfg, which):
    base = cfg.scenario()
    theta = _theta_grid()
    data = {"theta_deg": theta,
            "phi_deg": np.degrees(zenith_from_elevation(base.geom, np.radians(theta)))}
    fn = rep.effective_duty_cycle if which == "D" else rep.repetitions
    for a in FIG23_A:
        for tmin in FIG23_THETA_MIN_DEG:
            scn = base.with_policy(a=a, theta_min_rad=math.radians(tmin))
            data[f"{which}_a{label(a)}_th{label(tmin)}"] = _masked(
                scn, theta, lambda p: fn(scn.geom, scn.channel, scn.policy, p))
    return data


def figure2(cfg):
    return [Table.from_columns("figure2", _duty_or_reps(cfg, "D"), table_metadata(cfg))]


def figure3(cfg):
    return [Table.from_columns("figure3", _duty_or_reps(cfg, "N"), table_metadata(cfg))]


def figure4(cfg):
    base = cfg.scenario().with_policy(theta_min_rad=math.radians(FIG4_THETA_MIN_DEG))
    sim = cfg.sim()
    phi = np.linspace(0.0, base.policy.phi_max_rad, 201)
    data = {"phi_deg": np.degrees(phi)}
    mc_cols, ks = {}, {}
    for a in FIG4_A:
        scn = base.with_policy(a=a)
        dist = scn.zenith_distribution()
        data[f"cdf_analytic_a{label(a)}"] = dist.cdf(phi)
        emp = mc.estimate_zenith_cdf(scn.geom, scn.channel, scn.policy, sim)
        mc_cols[f"cdf_mc_a{label(a)}"] = emp(phi)
        ks[label(a)] = float(stats.kstest(emp.samples, dist.cdf).statistic)
    data.update(mc_cols)
    return [Table.from_columns("figure4", data, table_metadata(
        cfg, theta_min_deg=FIG4_THETA_MIN_DEG, mc_samples=sim.n_realizations, ks_distance=ks))]


def figure5(cfg):
    base = cfg.scenario()
    sim = cfg.sim()
    data = {"a": np.array(FIG5_A)}
    for tmin in FIG5_THETA_MIN_DEG:
        an, mean, se = [], [], []
        for a in FIG5_A:
            scn = base.with_policy(a=a, theta_min_rad=math.radians(tmin))
            args = (scn.geom, scn.channel, scn.policy, scn.budget)
            an.append(la.mean_interference(*args))
            est = mc.estimate_interference(*args, sim)
            mean.append(est.value)
            se.append(est.std_error)
        t = label(tmin)
        data[f"I_analytic_th{t}_w"] = an
        data[f"I_mc_th{t}_w"] = mean
        data[f"I_mc_se_th{t}_w"] = se
    return [Table.from_columns("figure5", data, table_metadata(cfg, mc_realizations=sim.n_realizations))]


def figure6(cfg):
    base = cfg.scenario()
    theta = _theta_grid()
    data = {"theta_deg": theta,
            "phi_deg": np.degrees(zenith_from_elevation(base.geom, np.radians(theta)))}
    curves = [(FIG6_A, t, "rep") for t in FIG6_THETA_MIN_DEG] + [(0.0, 10.0, "norep")]
    for a, tmin, kind in curves:
        scn = base.with_policy(a=a, theta_min_rad=math.radians(tmin))
        i_mean = la.mean_interference(scn.geom, scn.channel, scn.policy, scn.budget)
        col = f"p_{kind}_a{label(a)}_th{label(tmin)}"
        data[col] = _masked(scn, theta, lambda p: la.p_success_repeated(
            scn.geom, scn.channel, scn.policy, scn.budget, p, i_mean))
    return [Table.from_columns("figure6", data, table_metadata(cfg))]


def _theta_min_curve(cfg, a):
    """Coverage results along the theta_min axis at a fixed tuning factor."""
    base = cfg.scenario()
    return [base.with_policy(a=a, theta_min_rad=math.radians(t)).coverage(n_table=2)
            for t in THETA_MIN_AXIS_DEG]


def figure7(cfg):
    data = {"theta_min_deg": np.array(THETA_MIN_AXIS_DEG, dtype=float)}
    for a, kind in ((FIG789_A, "rep"), (0.0, "norep")):
        data[f"p_avg_{kind}_a{label(a)}"] = [r.p_success_avg for r in _theta_min_curve(cfg, a)]
    return [Table.from_columns("figure7", data, table_metadata(cfg))]


def figure8(cfg):
    res = _theta_min_curve(cfg, FIG789_A)
    data = {
        "theta_min_deg": np.array(THETA_MIN_AXIS_DEG, dtype=float),
        f"p_global_a{label(FIG789_A)}": [r.p_global for r in res],
        "p_spot": [r.p_spot for r in res],
        f"p_avg_a{label(FIG789_A)}": [r.p_success_avg for r in res],
    }
    return [Table.from_columns("figure8", data, table_metadata(cfg, k=cfg.get("constellation", "k")))]


def sweep_tables(cfg, grid: SweepGrid | None = None, n_jobs: int = 1, name="figure9"):
    grid = grid or SweepGrid.default(k=cfg.get("constellation", "k"))
    scn = cfg.scenario()
    res = run_sweep(scn, grid, n_jobs=n_jobs)
    surface = Table(
        f"{name}_surface",
        ["a", "theta_min_deg", "p_s", "p_spot", "p_avg", "mean_interference_w", "error"],
        [[p.a, math.degrees(p.theta_min_rad), p.p_s, p.p_spot, p.p_avg, p.mean_interference_w,
          p.error or ""] for p in res.surface],
    )
    frontier = Table(
        f"{name}_frontier",
        ["theta_min_deg", "a_best", "p_s_best"],
        [[math.degrees(p.theta_min_rad), p.a, p.p_s] for p in res.frontier],
    )
    opt = res.optimum
    optimum = None if opt is None else {
        "a": opt.a, "theta_min_deg": math.degrees(opt.theta_min_rad), "p_s": opt.p_s}
    meta = table_metadata(cfg, k=grid.k, optimum=optimum, sweep=res.meta,
                 failed_points=[[p.a, math.degrees(p.theta_min_rad), p.error] for p in res.failures])
    surface.metadata = meta
    frontier.metadata = dict(meta)
    return [surface, frontier], res


def figure9(cfg, n_jobs=1):
    return sweep_tables(cfg, n_jobs=n_jobs)[0]


def _zenith_fn(func):
    return lambda s, phi: func(s.geom, s.channel, s.policy, phi)


_PHI_QUANTITIES = {
    "p_los": lambda s, phi: ch.p_los(s.geom, s.channel, phi),
    "fspl_gain": lambda s, phi: ch.fspl_gain(s.geom, s.channel, phi),
    "mean_excess_gain": lambda s, phi: ch.mean_excess_gain(s.geom, s.channel, phi),
    "duty_cycle": _zenith_fn(rep.effective_duty_cycle),
    "repetitions": _zenith_fn(rep.repetitions),
    "effective_density": _zenith_fn(rep.effective_density),
    "zenith_cdf": lambda s, phi: s.zenith_distribution().cdf(phi),
    "zenith_pdf": lambda s, phi: s.zenith_distribution().pdf(phi),
    "p_success_single": lambda s, phi: la.p_success_single(s.geom, s.channel, s.policy, s.budget, phi),
    "p_success_repeated": lambda s, phi: la.p_success_repeated(s.geom, s.channel, s.policy, s.budget, phi),
}
_SCENARIO_QUANTITIES = {
    "mean_interference": lambda s: la.mean_interference(s.geom, s.channel, s.policy, s.budget),
    "p_success_avg": lambda s: la.p_success_avg(s.geom, s.channel, s.policy, s.budget),
    "p_spot": lambda s: la.p_spot(s.geom, s.k, s.policy.phi_max_rad),
    "p_global": lambda s: s.coverage(n_table=2).p_global,
}
CUSTOM_QUANTITIES = tuple(_PHI_QUANTITIES) + tuple(_SCENARIO_QUANTITIES)
CUSTOM_VARIABLES = ("theta_deg", "phi_deg", "a", "theta_min_deg")


def custom(cfg, quantity, over, start, stop, num, log=False):
    """Evaluate one quantity along one swept variable.

    Zenith-resolved quantities sweep ``theta_deg`` or ``phi_deg``; angles
    outside the admittance region are recorded as failed rows. Scenario-level quantities sweep ``a`` or ``theta_min_deg``.
    """
    if quantity not in CUSTOM_QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {', '.join(CUSTOM_QUANTITIES)}")
    if over not in CUSTOM_VARIABLES:
        raise ValueError(f"unknown variable {over!r}; choose from {', '.join(CUSTOM_VARIABLES)}")
    xs = np.logspace(math.log10(start), math.log10(stop), num) if log else np.linspace(start, stop, num)
    base = cfg.scenario()
    values, errors = [], []
    if quantity in _PHI_QUANTITIES:
        if over not in ("theta_deg", "phi_deg"):
            raise ValueError(f"{quantity} is resolved in zenith angle; sweep theta_deg or phi_deg")
        scn = base
        func = _PHI_QUANTITIES[quantity]
        for x in xs:
            phi = (zenith_from_elevation(scn.geom, math.radians(x)) if over == "theta_deg"
                   else math.radians(x))
            try:
                values.append(float(func(scn, phi)))
                errors.append("")
            except ValueError as exc:
                values.append(math.nan)
                errors.append(str(exc))
    else:
        if over not in ("a", "theta_min_deg"):
            raise ValueError(f"{quantity} is a scenario-level quantity; sweep a or theta_min_deg")
        func = _SCENARIO_QUANTITIES[quantity]
        for x in xs:
            try:
                scn = (base.with_policy(a=x) if over == "a"
                       else base.with_policy(theta_min_rad=math.radians(x)))
                values.append(float(func(scn)))
                errors.append("")
            except (ValueError, ArithmeticError) as exc:
                values.append(math.nan)
                errors.append(str(exc))
    tab = Table.from_columns("custom", {over: xs, quantity: values, "error": errors},
                             table_metadata(cfg, quantity=quantity, over=over))
    return [tab]


def run_scenario(cfg: ScenarioConfig, command: str, **kwargs):
    """Build the tables for ``figure2`` ... ``figure9`` or ``custom``."""
    builders = {"figure2": figure2, "figure3": figure3, "figure4": figure4, "figure5": figure5,
                "figure6": figure6, "figure7": figure7, "figure8": figure8, "figure9": figure9,
                "custom": custom}
    if command not in builders:
        raise ValueError(f"unknown command {command!r}")
    return builders[command](cfg, **kwargs)

