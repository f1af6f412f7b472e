"""Trade-off bounds for radar/communication coexistence with rate-splitting uplink access."""

from .bounds import AlphaOpt, PowerSplit, RatePoint, Scheme, StreamRates
from .linkbudget import DerivedParams, SystemParams, derive

__all__ = [
    "AlphaOpt",
    "DerivedParams",
    "PowerSplit",
    "RatePoint",
    "Scheme",
    "StreamRates",
    "SystemParams",
    "derive",
]
