"""Connectivity-aware incentive contracts for wireless blockchain devices.

The package couples a Monte Carlo fork-race simulator (how a device's degree
centrality changes the odds that its block survives a two-prong fork) with a
contract-theoretic solver that designs a salary + per-block bonus menu under
adverse selection and moral hazard.
"""

from .params import (
    Capability,
    ChannelParams,
    EconParams,
    FitParams,
    NetworkParams,
    DEFAULT_FIT,
)
from .validation import ValidationError

__version__ = "0.1.0"

__all__ = [
    "Capability",
    "ChannelParams",
    "EconParams",
    "FitParams",
    "NetworkParams",
    "DEFAULT_FIT",
    "ValidationError",
    "__version__",
]
