"""Grid search over the tuning factor and the minimum elevation angle."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from satrep.errors import NumericalError, SpotOverlapError
from satrep.scenario import Scenario

log = logging.getLogger(__name__)

Objective = Callable[[float, float], float]

REFINE_POINTS = 5
REFINE_SHRINK = 4.0
REFINE_MIN_GAIN = 1e-6


@dataclass(frozen=True)
class SweepGrid:
    """Sorted tuning factors and minimum elevation angles (radians)."""

    a_values: tuple
    theta_min_values: tuple
    k: int = 10
    refine_levels: int = 0

    def __post_init__(self):
        a = np.asarray(self.a_values, dtype=float)
        th = np.asarray(self.theta_min_values, dtype=float)
        if a.size == 0 or th.size == 0:
            raise ValueError("sweep grid axes must be non-empty")
        if np.any(a < 0) or np.any(a > 1) or np.any(np.diff(a) <= 0):
            raise ValueError("a_values must be strictly increasing within [0, 1]")
        if np.any(th < 0) or np.any(th >= math.pi / 2) or np.any(np.diff(th) <= 0):
            raise ValueError("theta_min_values must be strictly increasing within [0, pi/2)")
        if self.refine_levels < 0:
            raise ValueError("refine_levels must be >= 0")
        object.__setattr__(self, "a_values", tuple(float(x) for x in a))
        object.__setattr__(self, "theta_min_values", tuple(float(x) for x in th))

    @classmethod
    def from_degrees(cls, a_values, theta_min_deg, k=10, refine_levels=0):
        return cls(tuple(a_values), tuple(math.radians(t) for t in theta_min_deg), k, refine_levels)

    @classmethod
    def default(cls, k=10, refine_levels=0):
        return cls.from_degrees(np.logspace(-6, -2, 25), range(1, 46), k, refine_levels)


@dataclass(frozen=True)
class SweepPoint:
    a: float
    theta_min_rad: float
    p_s: float
    p_spot: float = math.nan
    p_avg: float = math.nan
    mean_interference_w: float = math.nan
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and math.isfinite(self.p_s)


@dataclass
class SweepResult:
    """Evaluated surface with its argmax and per-angle best tuning factor.

    Ties are broken by smallest ``theta_min`` and then smallest ``a``.
    """

    surface: list
    optimum: SweepPoint | None
    frontier: list
    meta: dict = field(default_factory=dict)

    @property
    def failures(self) -> list:
        return [p for p in self.surface if not p.ok]


def evaluate_point(target: Union[Scenario, Objective], a: float, theta_min_rad: float,
                   k: int | None = None) -> SweepPoint:
    """Global success at one ``(a, theta_min)``; failures are captured, not raised."""
    try:
        if isinstance(target, Scenario):
            scenario = target.with_policy(a=a, theta_min_rad=theta_min_rad)
            if k is not None:
                scenario = Scenario(scenario.geom, scenario.channel, scenario.policy, scenario.budget, k)
            res = scenario.coverage(n_table=2)
            return SweepPoint(a, theta_min_rad, res.p_global, res.p_spot, res.p_success_avg,
                              res.mean_interference_w)
        return SweepPoint(a, theta_min_rad, float(target(a, theta_min_rad)))
    except (NumericalError, SpotOverlapError, ValueError, FloatingPointError) as exc:
        log.warning("sweep point a=%g theta_min=%g rad failed: %s", a, theta_min_rad, exc)
        return SweepPoint(a, theta_min_rad, math.nan, error=f"{type(exc).__name__}: {exc}")


def _evaluate_many(target, pairs, k, n_jobs):
    if n_jobs == 1 or not isinstance(target, Scenario):
        return [evaluate_point(target, a, t, k) for a, t in pairs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        a_list, t_list = zip(*pairs)
        return list(pool.map(evaluate_point, [target] * len(pairs), a_list, t_list,
                             [k] * len(pairs), chunksize=8))


def _best(points):
    good = [p for p in points if p.ok]
    if not good:
        return None
    # max p_s; ties -> smallest theta, then smallest a
    return min(good, key=lambda p: (-p.p_s, p.theta_min_rad, p.a))


def _frontier(points):
    by_theta = {}
    for p in points:
        by_theta.setdefault(p.theta_min_rad, []).append(p)
    out = []
    for theta in sorted(by_theta):
        best = _best(by_theta[theta])
        if best is not None:
            out.append(best)
    return out


def run_sweep(target: Union[Scenario, Objective], grid: SweepGrid, n_jobs: int = 1) -> SweepResult:
    """Evaluate the global success probability over the full grid.

    ``target`` is a :class:`Scenario` (analytic evaluation, ``grid.k``
    satellites) or any callable ``f(a, theta_min_rad) -> p_s``. Results are
    in fixed grid order (theta-major) whatever the evaluation order.
    """
    pairs = [(a, t) for t in grid.theta_min_values for a in grid.a_values]
    k = grid.k if isinstance(target, Scenario) else None
    surface = _evaluate_many(target, pairs, k, n_jobs)
    result = SweepResult(
        surface=surface,
        optimum=_best(surface),
        frontier=_frontier(surface),
        meta={"tie_break": "max p_s, then smallest theta_min, then smallest a",
              "n_points": len(surface),
              "n_failed": sum(not p.ok for p in surface)},
    )
    if grid.refine_levels and result.optimum is not None:
        result = refine_optimum(target, result, grid.refine_levels, grid=grid)
    return result


def _axis_step(values, x):
    """Distance from ``x`` to its nearest neighbour on a sorted axis."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return None
    i = int(np.argmin(np.abs(values - x)))
    gaps = []
    if i > 0:
        gaps.append(values[i] - values[i - 1])
    if i < values.size - 1:
        gaps.append(values[i + 1] - values[i])
    return max(gaps)


def refine_optimum(target: Union[Scenario, Objective], coarse: SweepResult, levels: int,
                   grid: SweepGrid | None = None) -> SweepResult:
    """Local grid refinement around the coarse argmax.

    The tuning factor is searched in ``log10(a)`` (linear when the incumbent
    is ``a = 0``). Each level evaluates a 5 x 5 grid spanning the current box
    centred on the incumbent, then shrinks the box 4-fold. Refinement stops
    early once a level improves ``p_s`` by less than ``1e-6``.
    """
    if levels <= 0 or coarse.optimum is None:
        return coarse
    best = coarse.optimum
    a_axis = grid.a_values if grid else sorted({p.a for p in coarse.surface})
    t_axis = grid.theta_min_values if grid else sorted({p.theta_min_rad for p in coarse.surface})
    k = (grid.k if grid else None) if isinstance(target, Scenario) else None

    log_a = best.a > 0
    if log_a:
        positive = [a for a in a_axis if a > 0]
        half_u = _axis_step(np.log10(positive), math.log10(best.a)) or 0.5
    else:
        positive = [a for a in a_axis if a > 0]
        half_u = positive[0] if positive else 1e-6
    half_t = _axis_step(t_axis, best.theta_min_rad) or math.radians(1.0)

    explored = list(coarse.surface)
    history = [best.p_s]
    for _ in range(levels):
        if log_a:
            centre = math.log10(best.a)
            us = np.linspace(centre - half_u, centre + half_u, REFINE_POINTS)
            a_vals = np.clip(10.0 ** us, 0.0, 1.0)
        else:
            a_vals = np.clip(np.linspace(best.a - half_u, best.a + half_u, REFINE_POINTS), 0.0, 1.0)
        t_vals = np.clip(np.linspace(best.theta_min_rad - half_t, best.theta_min_rad + half_t,
                                     REFINE_POINTS), 0.0, math.radians(89.999))
        pairs = [(float(a), float(t)) for t in np.unique(t_vals) for a in np.unique(a_vals)]
        points = _evaluate_many(target, pairs, k, 1)
        explored.extend(points)
        candidate = _best(points + [best])
        gain = candidate.p_s - best.p_s
        best = candidate
        history.append(best.p_s)
        half_u /= REFINE_SHRINK
        half_t /= REFINE_SHRINK
        if gain < REFINE_MIN_GAIN:
            break
    meta = dict(coarse.meta)
    meta.update({"refine_levels_run": len(history) - 1, "refine_history": history,
                 "final_half_width_theta_rad": half_t * REFINE_SHRINK,
                 "final_half_width_a": half_u * REFINE_SHRINK,
                 "a_axis": "log10" if log_a else "linear"})
    return SweepResult(surface=coarse.surface, optimum=best, frontier=coarse.frontier,
                       meta=dict(meta, n_refine_points=len(explored) - len(coarse.surface)))
