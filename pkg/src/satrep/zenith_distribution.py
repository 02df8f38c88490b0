"""Distribution of the serving-satellite zenith angle over active devices.

Active devices form a Poisson field with intensity ``lambda0 * D(phi)`` on
the admittance cap, so the zenith angle of a randomly picked active device
has density proportional to ``sin(phi) * D(phi)`` on ``[0, phi_max]``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from satrep.channel import ChannelParams
from satrep.errors import NumericalError
from satrep.geometry import OrbitGeometry, _as_output, check_zenith
from satrep.repetition import RepetitionPolicy, effective_duty_cycle

QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-14
TABLE_PANELS = 1024

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _weight(geom, params, policy, phi):
    """``sin(phi) * D(phi) / d0``; scaled by ``1/d0`` so values are O(phi)."""
    phi = np.asarray(phi, dtype=float)
    d = np.asarray(effective_duty_cycle(geom, params, policy, phi))
    return np.sin(phi) * d / policy.d0


def _quad(func, lo, hi, rtol=QUAD_RTOL, atol=QUAD_ATOL):
    value, err = integrate.quad(func, lo, hi, epsabs=atol, epsrel=rtol, limit=200)
    if err > max(atol, rtol * abs(value)) * 10:
        raise NumericalError(f"quadrature on [{lo}, {hi}] reached error {err:.3g} for value {value:.6g}")
    return value, err


def avg_point_count(geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy, phi,
                    rtol=QUAD_RTOL):
    """Expected number of active devices with zenith angle in ``[0, phi]``."""
    phi = float(check_zenith(geom, phi, upper=policy.phi_max_rad))
    if phi == 0:
        return 0.0
    scaled, _ = _quad(lambda p: _weight(geom, params, policy, p), 0.0, phi, rtol=rtol)
    return 2.0 * math.pi * geom.earth_radius_m**2 * policy.lambda0 * policy.d0 * scaled


def _gl_integral(geom, params, policy, lo, hi):
    """Vectorised 10-point Gauss-Legendre integral of the weight on ``[lo, hi]``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[..., None] + half[..., None] * _GL_X
    vals = _weight(geom, params, policy, nodes)
    return half * (vals @ _GL_W)


class ZenithDistribution:
    """CDF, PDF and inverse-CDF sampler of the active-device zenith angle.

    Parameters
    ----------
    geom, params, policy
        Model inputs; ``policy.phi_max_rad`` bounds the support.
    quadrature_tolerance : float
        Relative tolerance for the adaptive normaliser integral.

    Notes
    -----
    The cumulative integral is tabulated on ``TABLE_PANELS`` equal panels
    (10-point Gauss-Legendre per panel, exact to rounding for this smooth
    integrand) and cross-checked against adaptive quadrature of the full
    range. Values between nodes add one more Gauss-Legendre panel.
    """

    def __init__(self, geom: OrbitGeometry, params: ChannelParams, policy: RepetitionPolicy,
                 quadrature_tolerance: float = QUAD_RTOL):
        policy.validate_for(geom)
        self.geom = geom
        self.params = params
        self.policy = policy
        self.quadrature_tolerance = quadrature_tolerance
        self.phi_max_rad = policy.phi_max_rad

        scaled, err = _quad(lambda p: _weight(geom, params, policy, p), 0.0, self.phi_max_rad,
                            rtol=quadrature_tolerance)
        self.normalizer = scaled * policy.d0
        self.normalizer_error = err * policy.d0

        self._nodes = np.linspace(0.0, self.phi_max_rad, TABLE_PANELS + 1)
        panels = _gl_integral(geom, params, policy, self._nodes[:-1], self._nodes[1:])
        self._cum = np.concatenate(([0.0], np.cumsum(panels)))
        total = self._cum[-1]
        if not total > 0:
            raise NumericalError("zenith distribution normaliser is not positive")
        if abs(total - scaled) > max(10 * err, 1e-9 * scaled):
            raise NumericalError(
                f"tabulated normaliser {total!r} disagrees with adaptive quadrature {scaled!r}")
        self._total = total

    def _scaled_cum(self, phi):
        k = np.clip(np.searchsorted(self._nodes, phi, side="right") - 1, 0, TABLE_PANELS - 1)
        return self._cum[k] + _gl_integral(self.geom, self.params, self.policy, self._nodes[k], phi)

    def cdf(self, phi):
        phi = check_zenith(self.geom, phi, upper=self.phi_max_rad)
        out = np.clip(self._scaled_cum(phi) / self._total, 0.0, 1.0)
        out = np.where(phi >= self.phi_max_rad, 1.0, out)
        return _as_output(out)

    def pdf(self, phi):
        phi = check_zenith(self.geom, phi, upper=self.phi_max_rad)
        return _as_output(_weight(self.geom, self.params, self.policy, phi) / self._total)

    def expected_count(self, phi=None):
        """Expected number of active devices in ``[0, phi]`` (whole cap by default)."""
        frac = 1.0 if phi is None else np.asarray(self.cdf(phi))
        scale = 2.0 * math.pi * self.geom.earth_radius_m**2 * self.policy.lambda0 * self.normalizer
        return _as_output(scale * frac)

    def quantile(self, u, tol=1e-12, max_iter=100):
        """Inverse CDF by safeguarded Newton iteration inside table brackets."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u > 1)):
            raise ValueError("quantile level outside [0, 1]")
        shape = u.shape
        target = u.ravel() * self._total
        k = np.clip(np.searchsorted(self._cum, target, side="right") - 1, 0, TABLE_PANELS - 1)
        lo = self._nodes[k].copy()
        hi = self._nodes[k + 1].copy()
        c_lo, c_hi = self._cum[k], self._cum[k + 1]
        span = np.where(c_hi > c_lo, c_hi - c_lo, 1.0)
        x = lo + (target - c_lo) / span * (hi - lo)
        active = np.ones(x.shape, dtype=bool)
        for _ in range(max_iter):
            if not active.any():
                break
            xa = x[active]
            f = self._scaled_cum(xa) - target[active]
            lo_a, hi_a = lo[active], hi[active]
            lo_a = np.where(f <= 0, xa, lo_a)
            hi_a = np.where(f > 0, xa, hi_a)
            dens = _weight(self.geom, self.params, self.policy, xa)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(dens > 0, f / dens, np.inf)
            xn = xa - step
            bad = ~((xn > lo_a) & (xn < hi_a))
            xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
            done = (np.abs(xn - xa) <= tol) | (hi_a - lo_a <= tol)
            x[active] = xn
            lo[active], hi[active] = lo_a, hi_a
            idx = np.flatnonzero(active)
            active[idx[done]] = False
        if active.any():
            raise NumericalError("inverse-CDF iteration did not converge")
        return _as_output(np.clip(x, 0.0, self.phi_max_rad).reshape(shape))

    def sample(self, rng: np.random.Generator, size=None):
        """Draw zenith angles by inverse-CDF sampling."""
        return self.quantile(rng.random(size))


def cdf(dist: ZenithDistribution, phi_o):
    return dist.cdf(phi_o)


def pdf(dist: ZenithDistribution, phi_o):
    return dist.pdf(phi_o)


def sample_zenith(dist: ZenithDistribution, rng: np.random.Generator, size=None):
    return dist.sample(rng, size)
