"""Monte Carlo validation engine.

Device fields are simulated independently of the quadrature path: candidate
points are a homogeneous Poisson field on the admittance cap with intensity
``lambda0 * D(phi_max)``, each kept with probability ``D(phi) / D(phi_max)``
(exact Poisson thinning to intensity ``lambda0 * D(phi)``).

Randomness comes from counter-based Philox streams keyed by
``(seed, purpose, block)``, where a block is a fixed-size run of
realizations or trials. Results therefore do not depend on evaluation
order, and blocks can be computed in any order or in parallel.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from satrep.channel import ChannelParams, fspl_gain, sample_excess_gain
from satrep.geometry import OrbitGeometry
from satrep.link_analysis import LinkBudget, mean_interference, sinr_gain_threshold
from satrep.repetition import RepetitionPolicy, effective_duty_cycle, repetitions

# target number of candidate points (or gain draws) handled per block
BLOCK_POINTS = 1 << 20
MAX_BLOCK_REALIZATIONS = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run settings.

    ``n_realizations`` counts field realizations for interference, trials
    for success probabilities and samples for the zenith CDF.
    ``n_devices_cap`` bounds the candidate count of any single realization.
    ``resample_interference`` tests each repeat against a freshly drawn
    interference field instead of the spatial mean (sensitivity runs only).
    """

    seed: int = 1
    n_realizations: int = 10_000
    n_devices_cap: int | None = None
    resample_interference: bool = False

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an integer in [0, 2**64)")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.n_devices_cap is not None and self.n_devices_cap < 0:
            raise ValueError("n_devices_cap must be >= 0")


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n: int

    def z_score(self, reference: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.value == reference else math.inf
        return abs(self.value - reference) / self.std_error


class DeviceCapExceeded(RuntimeError):
    pass


def stream(seed: int, purpose: str, block: int) -> np.random.Generator:
    """Independent generator for one ``(seed, purpose, block)`` triple."""
    tag = zlib.crc32(purpose.encode())
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag, int(block)))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(n_total: int, per_block: int):
    per_block = max(1, int(per_block))
    for b, start in enumerate(range(0, n_total, per_block)):
        yield b, min(per_block, n_total - start)


def _dominating_intensity(geom, params, policy):
    d_max = float(effective_duty_cycle(geom, params, policy, policy.phi_max_rad))
    area = 2.0 * math.pi * geom.earth_radius_m**2 * 2.0 * math.sin(policy.phi_max_rad / 2) ** 2
    return policy.lambda0 * d_max * area, d_max


def _uniform_cap(rng, phi_max, size):
    # cos(phi) uniform on [cos(phi_max), 1]
    u = rng.random(size)
    return 2.0 * np.arcsin(np.sqrt(u) * math.sin(phi_max / 2))


def _thin(geom, params, policy, rng, phi, d_max):
    return rng.random(phi.shape) * d_max < np.asarray(effective_duty_cycle(geom, params, policy, phi))


def _sample_fields(geom, params, policy, rng, n_fields, cap=None):
    """Active-device zenith angles for ``n_fields`` realizations.

    Returns ``(phi, owner)`` where ``owner[i]`` is the realization index.
    """
    mean_candidates, d_max = _dominating_intensity(geom, params, policy)
    counts = rng.poisson(mean_candidates, size=n_fields)
    if cap is not None and n_fields and counts.max() > cap:
        raise DeviceCapExceeded(f"realization with {counts.max()} candidate devices exceeds cap {cap}")
    owner = np.repeat(np.arange(n_fields), counts)
    phi = _uniform_cap(rng, policy.phi_max_rad, owner.size)
    keep = _thin(geom, params, policy, rng, phi, d_max)
    return phi[keep], owner[keep]


def sample_device_field(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy,
                        rng: np.random.Generator, n_devices_cap=None) -> np.ndarray:
    """Zenith angles of the concurrently active devices in one realization."""
    phi, _ = _sample_fields(geom, params, policy, rng, 1, cap=n_devices_cap)
    return phi


def sample_active_zenith(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy,
                         rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` i.i.d. zenith angles of active devices, by rejection from the cap."""
    _, d_max = _dominating_intensity(geom, params, policy)
    parts, have = [], 0
    while have < n:
        phi = _uniform_cap(rng, policy.phi_max_rad, 2 * (n - have) + 16)
        kept = phi[_thin(geom, params, policy, rng, phi, d_max)]
        parts.append(kept)
        have += kept.size
    return np.concatenate(parts)[:n]


def _realizations_per_block(mean_points):
    return int(min(MAX_BLOCK_REALIZATIONS, max(1, BLOCK_POINTS // max(mean_points, 1.0))))


def _field_powers(geom, params, policy, budget, rng, n_fields, cap=None):
    phi, owner = _sample_fields(geom, params, policy, rng, n_fields, cap=cap)
    zeta = sample_excess_gain(geom, params, phi, rng)
    power = budget.kappa * budget.tx_power_w * zeta * np.asarray(fspl_gain(geom, params, phi))
    return np.bincount(owner, weights=power, minlength=n_fields)


def interference_samples(geom, params, policy, budget, sim: SimConfig, purpose="interference"):
    """Aggregate interference power of each of ``sim.n_realizations`` fields."""
    mean_candidates, _ = _dominating_intensity(geom, params, policy)
    per_block = _realizations_per_block(mean_candidates)
    parts = [
        _field_powers(geom, params, policy, budget, stream(sim.seed, purpose, b), n, sim.n_devices_cap)
        for b, n in _blocks(sim.n_realizations, per_block)
    ]
    return np.concatenate(parts)


def _mean_estimate(x) -> Estimate:
    x = np.asarray(x, dtype=float)
    n = x.size
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return Estimate(float(np.sum(x) / n), se, n)


def estimate_interference(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy,
                          budget: LinkBudget, sim: SimConfig) -> Estimate:
    """Mean aggregate interference (watts) over independent field realizations."""
    return _mean_estimate(interference_samples(geom, params, policy, budget, sim))


def wilson_estimate(successes: int, n: int, z: float = 1.0) -> Estimate:
    """Proportion with the Wilson-interval half-width at ``z`` as standard error."""
    p = successes / n
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return Estimate(p, half, n)


def _trial_success(geom, params, budget, phi, counts, rng, interference):
    """Success flag per trial; trial ``i`` sends ``counts[i]`` copies from ``phi[i]``."""
    owner = np.repeat(np.arange(phi.size), counts)
    phi_rep = phi[owner]
    zeta = np.asarray(sample_excess_gain(geom, params, phi_rep, rng))
    i_rep = interference(owner.size) if callable(interference) else interference
    passed = zeta > sinr_gain_threshold(geom, params, budget, phi_rep, i_rep)
    return np.bincount(owner, weights=passed, minlength=phi.size) > 0


def estimate_success(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy,
                     budget: LinkBudget, sim: SimConfig, phi_o=None, *, single=False,
                     mean_interference_w=None) -> Estimate:
    """Frame success probability from ``sim.n_realizations`` independent trials.

    With ``phi_o`` the device sits at that zenith angle; otherwise each trial
    draws an active device's zenith angle. Every copy draws its own excess
    gain and the frame succeeds if any copy clears the SINR threshold.
    ``single=True`` sends one copy regardless of ``N(phi)``.
    """
    if mean_interference_w is None:
        mean_interference_w = mean_interference(geom, params, policy, budget)

    if phi_o is not None:
        n_rep = 1 if single else int(repetitions(geom, params, policy, phi_o))
        mean_copies = n_rep
    elif single:
        n_rep, mean_copies = 1, 1.0
    else:
        n_rep = None
        grid = np.linspace(0, policy.phi_max_rad, 64)
        mean_copies = float(np.mean(repetitions(geom, params, policy, grid)))
    per_block = int(min(MAX_BLOCK_REALIZATIONS, max(1, BLOCK_POINTS // max(mean_copies, 1.0))))
    successes = 0
    for b, n in _blocks(sim.n_realizations, per_block):
        rng = stream(sim.seed, "success", b)
        if sim.resample_interference:
            field_rng = stream(sim.seed, "success-field", b)

            def interference(m):
                return _field_powers(geom, params, policy, budget, field_rng, m, sim.n_devices_cap)
        else:
            interference = mean_interference_w
        if phi_o is None:
            phi = sample_active_zenith(geom, params, policy, rng, n)
        else:
            phi = np.full(n, float(phi_o))
        if n_rep is None:
            counts = np.asarray(repetitions(geom, params, policy, phi))
        else:
            counts = np.full(n, n_rep, dtype=np.int64)
        passed = _trial_success(geom, params, budget, phi, counts, rng, interference)
        successes += int(np.count_nonzero(passed))
    return wilson_estimate(successes, sim.n_realizations)


@dataclass(frozen=True)
class EmpiricalCDF:
    """Sorted zenith samples with step-function evaluation."""

    samples: np.ndarray

    def __call__(self, phi):
        return np.searchsorted(self.samples, np.asarray(phi, dtype=float), side="right") / self.samples.size

    def table(self, grid):
        grid = np.asarray(grid, dtype=float)
        return np.column_stack((grid, self(grid)))


def estimate_zenith_cdf(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy,
                        sim: SimConfig) -> EmpiricalCDF:
    """Empirical zenith CDF from ``sim.n_realizations`` active-device samples."""
    parts = []
    for b, n in _blocks(sim.n_realizations, BLOCK_POINTS):
        parts.append(sample_active_zenith(geom, params, policy, stream(sim.seed, "zenith", b), n))
    return EmpiricalCDF(np.sort(np.concatenate(parts)))
