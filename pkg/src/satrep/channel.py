"""Satellite-to-ground channel: LoS probability, free-space gain, excess gain.

The excess path gain is a two-component log-normal mixture. The component
is LoS with probability ``p_los(phi)``; the excess *loss* in dB is then
Gaussian with the component's mean and standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from satrep.geometry import (
    OrbitGeometry,
    _as_output,
    check_zenith,
    elevation_cotangent,
    slant_range,
)

SPEED_OF_LIGHT = 299_792_458.0

# dB -> natural-log scale factor
RHO = math.log(10.0) / 10.0


def db_to_linear(x_db):
    return _as_output(10.0 ** (np.asarray(x_db, dtype=float) / 10.0))


def linear_to_db(x):
    return _as_output(10.0 * np.log10(np.asarray(x, dtype=float)))


def dbm_to_watt(x_dbm):
    return _as_output(10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0))


@dataclass(frozen=True)
class ChannelParams:
    """Clutter and excess-loss parameters.

    The defaults are placeholder suburban-like values; the figures they are
    meant to reproduce do not publish the exact numbers.
    """

    beta: float = 0.3
    mu_los_db: float = 1.0
    sigma_los_db: float = 2.0
    mu_nlos_db: float = 20.0
    sigma_nlos_db: float = 8.0
    frequency_hz: float = 2.0e9

    def __post_init__(self):
        vals = (self.beta, self.mu_los_db, self.sigma_los_db, self.mu_nlos_db,
                self.sigma_nlos_db, self.frequency_hz)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("channel parameters must be finite")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.sigma_los_db < 0 or self.sigma_nlos_db < 0:
            raise ValueError("excess-loss standard deviations must be >= 0")
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be > 0")
        if self.mu_nlos_db < self.mu_los_db:
            raise ValueError("mu_nlos_db must be >= mu_los_db")


def p_los(geom: OrbitGeometry, params: ChannelParams, phi):
    """LoS probability ``exp(-beta * cot(theta))``; zero at the horizon."""
    cot = np.asarray(elevation_cotangent(geom, phi))
    return _as_output(np.exp(-params.beta * cot))


def fspl_gain(geom: OrbitGeometry, params: ChannelParams, phi):
    """Reciprocal free-space path loss ``(c / (4 pi d f))**2``."""
    d = np.asarray(slant_range(geom, phi))
    return _as_output((SPEED_OF_LIGHT / (4.0 * math.pi * d * params.frequency_hz)) ** 2)


def _component_means(params: ChannelParams):
    m_los = math.exp(-RHO * params.mu_los_db + (RHO * params.sigma_los_db) ** 2 / 2)
    m_nlos = math.exp(-RHO * params.mu_nlos_db + (RHO * params.sigma_nlos_db) ** 2 / 2)
    return m_los, m_nlos


def mean_excess_gain(geom: OrbitGeometry, params: ChannelParams, phi):
    """Mean of the excess-gain mixture at zenith angle ``phi``."""
    q = np.asarray(p_los(geom, params, phi))
    m_los, m_nlos = _component_means(params)
    return _as_output(q * m_los + (1.0 - q) * m_nlos)


def _lognormal_cdf(log_x, mu_db, sigma_db):
    # gain = exp(-RHO * loss_db), loss_db ~ N(mu_db, sigma_db)
    loc = -RHO * mu_db
    if sigma_db == 0:
        return (log_x >= loc).astype(float)
    with np.errstate(over="ignore"):  # tiny sigma: +-inf is the right limit
        return ndtr((log_x - loc) / (RHO * sigma_db))


def excess_gain_cdf(geom: OrbitGeometry, params: ChannelParams, phi, x):
    """``P(zeta <= x)`` for the excess-gain mixture.

    ``phi`` and ``x`` broadcast against each other. A zero standard
    deviation degenerates to a point mass (right-continuous step).
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("excess gain argument must be > 0")
    q = np.asarray(p_los(geom, params, phi))
    log_x = np.log(x)
    f_los = _lognormal_cdf(log_x, params.mu_los_db, params.sigma_los_db)
    f_nlos = _lognormal_cdf(log_x, params.mu_nlos_db, params.sigma_nlos_db)
    return _as_output(np.clip(q * f_los + (1.0 - q) * f_nlos, 0.0, 1.0))


def excess_gain_sf(geom: OrbitGeometry, params: ChannelParams, phi, x):
    """Survival function ``1 - F(x)``, computed without cancellation."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("excess gain argument must be > 0")
    q = np.asarray(p_los(geom, params, phi))
    log_x = np.log(x)

    def sf(mu_db, sigma_db):
        loc = -RHO * mu_db
        if sigma_db == 0:
            return (log_x < loc).astype(float)
        with np.errstate(over="ignore"):
            return ndtr(-(log_x - loc) / (RHO * sigma_db))

    out = q * sf(params.mu_los_db, params.sigma_los_db) + (1.0 - q) * sf(
        params.mu_nlos_db, params.sigma_nlos_db)
    return _as_output(np.clip(out, 0.0, 1.0))


def sample_excess_gain(geom: OrbitGeometry, params: ChannelParams, phi, rng: np.random.Generator,
                       size=None):
    """Draw excess gains at zenith angle(s) ``phi``.

    With ``size=None`` one gain is drawn per element of ``phi``; otherwise
    ``size`` must broadcast with ``phi``.
    """
    phi = check_zenith(geom, phi)
    shape = phi.shape if size is None else np.broadcast_shapes(phi.shape, np.shape(np.empty(size)))
    q = np.broadcast_to(np.asarray(p_los(geom, params, phi)), shape)
    is_los = rng.random(shape) < q
    z = rng.standard_normal(shape)
    mu = np.where(is_los, params.mu_los_db, params.mu_nlos_db)
    sigma = np.where(is_los, params.sigma_los_db, params.sigma_nlos_db)
    loss_db = mu + sigma * z
    return _as_output(np.exp(-RHO * loss_db))
