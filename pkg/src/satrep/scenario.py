"""A complete model configuration in SI-linear-radian units."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from satrep.channel import ChannelParams
from satrep.geometry import OrbitGeometry, make_geometry, zenith_from_elevation
from satrep.link_analysis import CoverageResult, LinkBudget, p_global
from satrep.repetition import RepetitionPolicy
from satrep.zenith_distribution import ZenithDistribution

# phi_max is kept this far inside the horizon, where D(phi) is singular
HORIZON_GUARD_RAD = 1e-9


def phi_max_for(geom: OrbitGeometry, theta_min_rad: float) -> float:
    """Admittance zenith bound for a minimum elevation angle."""
    phi = float(zenith_from_elevation(geom, theta_min_rad))
    return min(phi, geom.phi_horizon_rad - HORIZON_GUARD_RAD)


@dataclass(frozen=True)
class Scenario:
    geom: OrbitGeometry
    channel: ChannelParams
    policy: RepetitionPolicy
    budget: LinkBudget
    k: int = 10

    @classmethod
    def default(cls, theta_min_rad=math.radians(10.0), a=5e-5, lambda0=0.05e-6):
        geom = make_geometry()
        return cls(
            geom=geom,
            channel=ChannelParams(),
            policy=RepetitionPolicy(d0=1e-6, a=a, phi_max_rad=phi_max_for(geom, theta_min_rad),
                                    lambda0=lambda0),
            budget=LinkBudget.from_db(),
        )

    def __post_init__(self):
        self.policy.validate_for(self.geom)
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("satellite count k must be a positive integer")

    @property
    def theta_min_rad(self) -> float:
        from satrep.geometry import elevation_from_zenith

        return float(elevation_from_zenith(self.geom, self.policy.phi_max_rad))

    def with_policy(self, *, a=None, theta_min_rad=None, lambda0=None) -> "Scenario":
        changes = {}
        if a is not None:
            changes["a"] = float(a)
        if theta_min_rad is not None:
            changes["phi_max_rad"] = phi_max_for(self.geom, theta_min_rad)
        if lambda0 is not None:
            changes["lambda0"] = float(lambda0)
        return replace(self, policy=replace(self.policy, **changes))

    def with_budget(self, **changes) -> "Scenario":
        return replace(self, budget=replace(self.budget, **changes))

    def zenith_distribution(self) -> ZenithDistribution:
        return ZenithDistribution(self.geom, self.channel, self.policy)

    def coverage(self, n_table: int = 64) -> CoverageResult:
        return p_global(self.geom, self.channel, self.policy, self.budget, self.k, n_table=n_table)
