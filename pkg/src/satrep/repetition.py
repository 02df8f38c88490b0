"""Elevation-dependent repetition policy.

Devices further from the sub-satellite point (lower LoS probability)
inflate their duty cycle from ``d0`` towards one; the number of frame
copies is the inflation ratio rounded up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from satrep.channel import ChannelParams
from satrep.geometry import (
    OrbitGeometry,
    _as_output,
    check_zenith,
    elevation_cotangent,
    zenith_from_elevation,
)

# |x - round(x)| below this is treated as an exact integer before ceil()
CEIL_SNAP = 1e-9


@dataclass(frozen=True)
class RepetitionPolicy:
    """Base duty cycle, tuning factor, admittance bound and device density.

    ``lambda0`` is the ground density of devices per square metre.
    """

    d0: float
    a: float
    phi_max_rad: float
    lambda0: float

    def __post_init__(self):
        if not (math.isfinite(self.d0) and 0 < self.d0 <= 1):
            raise ValueError("d0 must lie in (0, 1]")
        if not (math.isfinite(self.a) and 0 <= self.a <= 1):
            raise ValueError("tuning factor a must lie in [0, 1]")
        if not (math.isfinite(self.phi_max_rad) and self.phi_max_rad > 0):
            raise ValueError("phi_max_rad must be > 0")
        if not (math.isfinite(self.lambda0) and self.lambda0 > 0):
            raise ValueError("lambda0 must be > 0")

    def validate_for(self, geom: OrbitGeometry) -> None:
        if self.phi_max_rad > geom.phi_horizon_rad:
            raise ValueError("phi_max_rad exceeds the horizon zenith angle")


def _shaping(geom, params, policy, phi):
    """``1 - exp(-a beta cot(theta))``, the repetition shaping term."""
    if policy.a == 0:
        return np.zeros_like(np.asarray(phi, dtype=float))
    cot = np.asarray(elevation_cotangent(geom, phi))
    return -np.expm1(-policy.a * params.beta * cot)


def effective_duty_cycle(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy, phi):
    phi = check_zenith(geom, phi, upper=policy.phi_max_rad)
    d = policy.d0 + (1.0 - policy.d0) * _shaping(geom, params, policy, phi)
    return _as_output(np.clip(d, policy.d0, 1.0))


def _ceil_snapped(x):
    r = np.round(x)
    x = np.where(np.abs(x - r) < CEIL_SNAP, r, x)
    return np.ceil(x)


def repetitions(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy, phi):
    """Number of frame transmissions ``ceil(D(phi) / d0)`` as integers."""
    ratio = np.asarray(effective_duty_cycle(geom, params, policy, phi)) / policy.d0
    n = np.maximum(_ceil_snapped(ratio), 1.0).astype(np.int64)
    return int(n) if n.ndim == 0 else n


def effective_density(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy, phi):
    """Density of concurrently on-air devices, ``lambda0 * D(phi)``."""
    return _as_output(policy.lambda0 * np.asarray(effective_duty_cycle(geom, params, policy, phi)))


def repetition_breakpoints(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy,
                           max_count=None):
    """Zenith angles inside ``(0, phi_max)`` where the repetition count steps up.

    The count changes from ``n`` to ``n + 1`` where ``D(phi) = n * d0``.
    Returns the sorted angles for ``n = 2, 3, ...`` (``n = 1`` sits at
    ``phi = 0``), truncated to the first ``max_count`` when given.
    """
    if policy.a == 0 or policy.d0 == 1:
        return np.empty(0)
    n_max = repetitions(geom, params, policy, policy.phi_max_rad)
    top = n_max - 1
    if max_count is not None:
        top = min(top, max_count + 1)
    n = np.arange(2, top + 1, dtype=float)
    if n.size == 0:
        return np.empty(0)
    frac = (n - 1.0) * policy.d0 / (1.0 - policy.d0)
    frac = frac[frac < 1.0]
    cot = -np.log1p(-frac) / (policy.a * params.beta)
    theta = np.arctan2(1.0, cot)
    phi = np.asarray(zenith_from_elevation(geom, theta), dtype=float)
    return np.sort(phi[(phi > 0) & (phi < policy.phi_max_rad)])
