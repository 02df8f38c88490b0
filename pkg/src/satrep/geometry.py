"""Spherical geometry of a satellite over a spherical Earth.

All angles are radians. ``phi`` is the zenith angle measured at the Earth
centre between the sub-satellite point and the device; ``theta`` is the
elevation of the satellite above the device's local horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EARTH_RADIUS_M = 6_371_000.0

_DOMAIN_SLACK = 1e-12


def _as_output(x):
    """Return a Python float for 0-d results, the array otherwise."""
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class OrbitGeometry:
    """Earth radius and satellite altitude with the derived quantities.

    Attributes
    ----------
    earth_radius_m, altitude_m : float
        Lengths in metres.
    alpha : float
        ``R / (R + h)``.
    phi_horizon_rad : float
        Zenith angle at which the satellite sits on the horizon, ``acos(alpha)``.
    """

    earth_radius_m: float
    altitude_m: float
    alpha: float = field(init=False)
    phi_horizon_rad: float = field(init=False)

    def __post_init__(self):
        for name in ("earth_radius_m", "altitude_m"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        alpha = self.earth_radius_m / (self.earth_radius_m + self.altitude_m)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "phi_horizon_rad", math.acos(alpha))

    @property
    def orbit_radius_m(self) -> float:
        return self.earth_radius_m + self.altitude_m


def make_geometry(earth_radius_m: float = EARTH_RADIUS_M, altitude_m: float = 550e3) -> OrbitGeometry:
    return OrbitGeometry(float(earth_radius_m), float(altitude_m))


def check_zenith(geom: OrbitGeometry, phi, upper=None):
    """Validate ``0 <= phi <= upper`` (default the horizon angle) and return an array."""
    upper = geom.phi_horizon_rad if upper is None else upper
    phi = np.asarray(phi, dtype=float)
    # one pass in the common case; NaN fails both comparisons
    if not ((phi >= -_DOMAIN_SLACK) & (phi <= upper + _DOMAIN_SLACK)).all():
        if not np.all(np.isfinite(phi)):
            raise ValueError("zenith angle must be finite")
        raise ValueError(f"zenith angle outside [0, {upper!r}] rad")
    return np.clip(phi, 0.0, upper)


def elevation_cotangent(geom: OrbitGeometry, phi):
    """``cot(theta) = sin(phi) / (cos(phi) - alpha)``; +inf at the horizon."""
    phi = check_zenith(geom, phi)
    den = np.cos(phi) - geom.alpha
    with np.errstate(divide="ignore"):
        out = np.where(den > 0, np.sin(phi) / np.where(den > 0, den, 1.0), np.inf)
    return _as_output(out)


def elevation_from_zenith(geom: OrbitGeometry, phi):
    """Elevation angle seen by a device at zenith angle ``phi``.

    Evaluated as ``acot(x) = atan2(1, x)`` with ``x`` the elevation
    cotangent, written as ``atan2(cos(phi) - alpha, sin(phi))`` so the
    horizon maps to exactly zero.
    """
    phi = check_zenith(geom, phi)
    theta = np.arctan2(np.cos(phi) - geom.alpha, np.sin(phi))
    return _as_output(np.clip(theta, 0.0, math.pi / 2))


def zenith_from_elevation(geom: OrbitGeometry, theta):
    """Inverse of :func:`elevation_from_zenith`.

    From the law of sines in the Earth-centre/device/satellite triangle,
    ``phi = pi/2 - theta - asin(alpha * cos(theta))``.
    """
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("elevation angle must be finite")
    if np.any(theta < -_DOMAIN_SLACK) or np.any(theta > math.pi / 2 + _DOMAIN_SLACK):
        raise ValueError("elevation angle outside [0, pi/2] rad")
    theta = np.clip(theta, 0.0, math.pi / 2)
    phi = math.pi / 2 - theta - np.arcsin(geom.alpha * np.cos(theta))
    return _as_output(np.clip(phi, 0.0, geom.phi_horizon_rad))


def slant_range(geom: OrbitGeometry, phi):
    """Device-to-satellite distance in metres (law of cosines)."""
    phi = check_zenith(geom, phi)
    r, rs = geom.earth_radius_m, geom.orbit_radius_m
    # 1 - cos(phi) = 2 sin^2(phi/2) keeps d(0) == h exactly
    d2 = geom.altitude_m**2 + 4.0 * r * rs * np.sin(phi / 2) ** 2
    return _as_output(np.sqrt(d2))


def cap_fraction(phi_max):
    """Fraction of the sphere covered by a cap of half-angle ``phi_max``."""
    phi_max = np.asarray(phi_max, dtype=float)
    if np.any(phi_max < 0) or np.any(phi_max > math.pi):
        raise ValueError("cap half-angle outside [0, pi]")
    return _as_output(np.sin(phi_max / 2) ** 2)
