"""Immutable parameter records.

Defaults reproduce the reference deployment: 100 devices, link probability
0.2, a Bitcoin-like 600 s block interval, 1000-bit blocks sent at 2000 bit/s
over a 2 MHz channel.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .validation import (
    ValidationError,
    check_greater,
    check_int_at_least,
    check_positive,
    check_probability,
)


@dataclass(frozen=True)
class Capability:
    """A device's hash power ``h``, raw neighbour count ``c`` and transmit power ``p``."""

    h: float
    c: float
    p: float

    def __post_init__(self):
        check_positive("h", self.h)
        check_positive("p", self.p)
        if float(self.c) < 1:
            raise ValidationError("c", f"must be >= 1, got {self.c!r}")


@dataclass(frozen=True)
class NetworkParams:
    z: int = 100
    p_l: float = 0.2
    tau: float = 600.0
    block_size: float = 1000.0
    rate: float = 2000.0
    p_fork: float = 0.5
    mean_hash: float = 12.5

    def __post_init__(self):
        check_int_at_least("z", self.z, 2)
        check_probability("p_l", self.p_l, open_low=True)
        check_positive("tau", self.tau)
        check_positive("block_size", self.block_size)
        check_positive("rate", self.rate)
        check_probability("p_fork", self.p_fork)
        check_positive("mean_hash", self.mean_hash)

    def check_capability(self, cap: Capability) -> None:
        if cap.c > self.z - 1:
            raise ValidationError("c", f"connectivity {cap.c} exceeds z - 1 = {self.z - 1}")


@dataclass(frozen=True)
class ChannelParams:
    bandwidth: float = 2e6
    noise_power: float = 3.98e-3
    fading_scale: float = 1.0

    def __post_init__(self):
        check_positive("bandwidth", self.bandwidth)
        check_positive("noise_power", self.noise_power)
        check_positive("fading_scale", self.fading_scale)


@dataclass(frozen=True)
class EconParams:
    theta: float = 1.5
    epsilon: float = 400.0
    gamma: float = 1e-4

    def __post_init__(self):
        # theta - 1 divides every salary term
        check_greater("theta", self.theta, 1.0)
        check_positive("epsilon", self.epsilon)
        check_positive("gamma", self.gamma)


@dataclass(frozen=True)
class FitParams:
    """Coefficients of ``P_c = beta1 - beta2 * ln(c_norm + beta3)``.

    ``z`` and ``p_l`` record the network the coefficients were fitted under
    (``None`` when unknown).
    """

    beta1: float
    beta2: float
    beta3: float
    adj_r_squared: float | None = None
    rmse: float | None = None
    z: int | None = None
    p_l: float | None = None

    def __post_init__(self):
        check_positive("beta3", self.beta3)

    def to_dict(self) -> dict:
        return asdict(self)


# beta2 carries the sign that makes P_c increase with connectivity
DEFAULT_FIT = FitParams(beta1=0.97575, beta2=-0.03006, beta3=0.00411, z=100, p_l=0.2)

# Hash power h, raw connectivity c, transmit power p of the 48-type reference grid.
GRID_H = (11.0, 12.0, 13.0)
GRID_C = (3.0, 10.0, 15.0, 20.0)
GRID_P = (5.0, 10.0, 15.0, 20.0)


def reference_grid() -> list[Capability]:
    return [Capability(h, c, p) for h in GRID_H for c in GRID_C for p in GRID_P]
