"""Frame-repetition coverage model for IoT-over-satellite uplinks."""

from satrep.channel import ChannelParams
from satrep.errors import ConfigError, NumericalError, SpotOverlapError
from satrep.geometry import OrbitGeometry, make_geometry
from satrep.link_analysis import CoverageResult, LinkBudget
from satrep.repetition import RepetitionPolicy
from satrep.scenario import Scenario
from satrep.zenith_distribution import ZenithDistribution

from satrep._version import __version__

__all__ = [
    "ChannelParams",
    "ConfigError",
    "CoverageResult",
    "LinkBudget",
    "NumericalError",
    "OrbitGeometry",
    "RepetitionPolicy",
    "Scenario",
    "SpotOverlapError",
    "ZenithDistribution",
    "make_geometry",
    "__version__",
]
