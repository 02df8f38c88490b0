"""Command-line entry point.

Examples::

    satrep analytic -c scenario.ini
    satrep simulate --sim.realizations=200000
    satrep sweep --refine 3 --jobs 4
    satrep figure 4 -o out/
    satrep custom --quantity p_los --over theta_deg --start 0 --stop 90 --num 91
    satrep validate-config -c scenario.ini

Any configuration key can be overridden with ``--section.key=value``.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from scipy import stats

from satrep import link_analysis as la
from satrep import montecarlo as mc
from satrep._version import __version__
from satrep.config import default_config, dump_config, load_config, parse_overrides
from satrep.errors import ConfigError, NumericalError
from satrep.figures import (
    CUSTOM_QUANTITIES,
    CUSTOM_VARIABLES,
    run_scenario,
    sweep_tables,
    table_metadata,
)
from satrep.geometry import elevation_from_zenith
from satrep.output import Table, emit_result
from satrep.sweep import SweepGrid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, help="scenario file (defaults apply if omitted)")
    common.add_argument("-o", "--output-dir", type=Path, help="overrides output.directory")
    common.add_argument("-f", "--format", choices=("csv", "json"), help="overrides output.format")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="satrep", description=__doc__.split("\n")[0],
                                epilog="Override any key with --section.key=value.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("analytic", parents=[common], help="analytic coverage of the configured scenario")
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimates next to analytic values")
    s.add_argument("--realizations", type=int, help="overrides sim.realizations")
    s = sub.add_parser("sweep", parents=[common], help="grid search over a and theta_min")
    s.add_argument("--refine", type=int, default=0, help="local refinement levels")
    s.add_argument("--jobs", type=int, default=1)
    s = sub.add_parser("figure", parents=[common], help="plot-ready data for figure 2..9")
    s.add_argument("number", type=int, choices=range(2, 10))
    s.add_argument("--jobs", type=int, default=1, help="worker processes for figure 9")
    s = sub.add_parser("custom", parents=[common], help="one quantity along one swept variable")
    s.add_argument("--quantity", required=True, choices=CUSTOM_QUANTITIES)
    s.add_argument("--over", required=True, choices=CUSTOM_VARIABLES)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--num", type=int, default=50)
    s.add_argument("--log", action="store_true", help="log-spaced sweep")
    sub.add_parser("validate-config", parents=[common], help="check a scenario file and print it")
    return p


def _load(args, overrides):
    cfg = load_config(args.config) if args.config else default_config()
    extra = dict(overrides)
    if args.output_dir is not None:
        extra["output.directory"] = str(args.output_dir)
    if args.format is not None:
        extra["output.format"] = args.format
    if getattr(args, "realizations", None) is not None:
        extra["sim.realizations"] = str(args.realizations)
    return cfg.with_overrides(extra) if extra else cfg


def _analytic_table(cfg):
    scn = cfg.scenario()
    res = scn.coverage()
    tab = res.p_success_conditional
    theta = elevation_from_zenith(scn.geom, tab["phi_rad"])
    return Table.from_columns(
        "analytic",
        {"phi_deg": [math.degrees(x) for x in tab["phi_rad"]],
         "theta_deg": [math.degrees(x) for x in theta],
         "repetitions": tab["repetitions"],
         "p_single": tab["p_single"],
         "p_repeated": tab["p_repeated"]},
        table_metadata(cfg, mean_interference_w=res.mean_interference_w,
                       p_success_avg=res.p_success_avg, p_spot=res.p_spot, p_global=res.p_global,
                       method=res.method, **res.meta),
    )


def _simulate_table(cfg):
    scn = cfg.scenario()
    sim = cfg.sim()
    args = (scn.geom, scn.channel, scn.policy, scn.budget)
    i_an = la.mean_interference(*args)
    i_mc = mc.estimate_interference(*args, sim)
    avg_an = la.p_success_avg(*args, mean_interference_w=i_an)
    avg_mc = mc.estimate_success(*args, sim, mean_interference_w=i_an)
    spot = la.p_spot(scn.geom, scn.k, scn.policy.phi_max_rad)
    emp = mc.estimate_zenith_cdf(scn.geom, scn.channel, scn.policy, sim)
    ks = stats.kstest(emp.samples, scn.zenith_distribution().cdf).statistic
    rows = [
        ["mean_interference_w", i_an, i_mc.value, i_mc.std_error, i_mc.n],
        ["p_success_avg", avg_an, avg_mc.value, avg_mc.std_error, avg_mc.n],
        ["p_global", spot * avg_an, spot * avg_mc.value, spot * avg_mc.std_error, avg_mc.n],
        ["zenith_cdf_ks_distance", 0.0, float(ks), math.nan, emp.samples.size],
    ]
    return Table("simulate", ["quantity", "analytic", "mc_value", "mc_std_error", "n"], rows,
                 table_metadata(cfg, method="montecarlo", realizations=sim.n_realizations))


def _write(cfg, tables):
    outdir = Path(cfg.get("output", "directory"))
    outdir.mkdir(parents=True, exist_ok=True)
    fmt = cfg.get("output", "format")
    paths = []
    for t in tables:
        paths.append(emit_result(t, fmt, outdir / f"{t.name}.{fmt}"))
    return paths


def main(argv=None) -> int:
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args, parse_overrides(rest))
        if args.command == "validate-config":
            sys.stdout.write(dump_config(cfg))
            print(f"# config_hash: {cfg.config_hash()}")
            return EXIT_OK
        if args.command == "analytic":
            tables = [_analytic_table(cfg)]
        elif args.command == "simulate":
            tables = [_simulate_table(cfg)]
        elif args.command == "sweep":
            grid = SweepGrid.default(k=cfg.get("constellation", "k"), refine_levels=args.refine)
            tables, _ = sweep_tables(cfg, grid, n_jobs=args.jobs, name="sweep")
        elif args.command == "figure":
            kwargs = {"n_jobs": args.jobs} if args.number == 9 else {}
            tables = run_scenario(cfg, f"figure{args.number}", **kwargs)
        else:
            tables = run_scenario(cfg, "custom", quantity=args.quantity, over=args.over,
                                  start=args.start, stop=args.stop, num=args.num, log=args.log)
        for path in _write(cfg, tables):
            print(path)
        for t in tables:
            for key in ("p_global", "optimum"):
                if key in t.metadata:
                    print(f"{t.name}: {key} = {t.metadata[key]}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # invalid command arguments that survived argparse (e.g. custom axis mismatch)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
