"""Closed-form energy, confirmation-probability and utility formulas.

Every function here is pure. Connectivity appears in two conventions: the raw
neighbour count ``c`` (energy spent broadcasting scales with it) and the
normalised degree centrality ``c / (z - 1)`` that the fitted confirmation
curve consumes. :func:`normalize_connectivity` converts between them.
"""

from __future__ import annotations

import math

from .params import Capability, ChannelParams, EconParams, FitParams, NetworkParams
from .validation import ValidationError, check_positive


def normalize_connectivity(c: float, z: int) -> float:
    return float(c) / (z - 1)


def energy_per_block(cap: Capability, net: NetworkParams) -> float:
    """Hashing energy ``h * tau`` plus broadcast energy ``(a / r) * p * c``."""
    return cap.h * net.tau + (net.block_size / net.rate) * cap.p * cap.c


def hash_confirm_prob(h_i: float, net: NetworkParams) -> float:
    """Probability that device ``i``'s prong wins a fork on hash power alone.

    The remaining ``z - 2`` devices are assumed split evenly between the two
    prongs, each contributing the mean hash power, so the probability is
    ``(0.5 (z - 2) hbar + h_i) / (z hbar)``.
    """
    check_positive("h_i", h_i)
    if net.z < 2:
        raise ValidationError("z", "hash race needs at least two devices")
    # same value rearranged so that h_i == hbar gives exactly 0.5 in floating point
    return 0.5 + (h_i - net.mean_hash) / (net.z * net.mean_hash)


def outage_prob(p: float, ch: ChannelParams, rate: float) -> float:
    """Rayleigh-fading outage: ``Pr{|alpha|^2 < (2^(r/B) - 1) / rho}``."""
    check_positive("p", p)
    threshold = math.expm1(rate / ch.bandwidth * math.log(2.0))
    snr = p / ch.noise_power
    return -math.expm1(-threshold / (snr * ch.fading_scale))


def connectivity_confirm_prob(c_norm: float, fit: FitParams) -> float:
    arg = c_norm + fit.beta3
    if arg <= 0:
        raise ValidationError("c_norm", f"c_norm + beta3 must be > 0, got {arg!r}")
    value = fit.beta1 - fit.beta2 * math.log(arg)
    return min(1.0, max(0.0, value))


def total_confirm_prob(
    cap: Capability, net: NetworkParams, ch: ChannelParams, fit: FitParams
) -> float:
    """Overall confirmation probability ``G`` of a block proposed by ``cap``.

    A fork happens with probability ``p_fork``; then the hash race decides.
    Independently the block must win on propagation (``P_c``) and survive the
    channel (``1 - P_out``).
    """
    net.check_capability(cap)
    p_h = hash_confirm_prob(cap.h, net)
    p_c = connectivity_confirm_prob(normalize_connectivity(cap.c, net.z), fit)
    p_out = outage_prob(cap.p, ch, net.rate)
    g = (net.p_fork * p_h + (1.0 - net.p_fork)) * p_c * (1.0 - p_out)
    return min(1.0, max(0.0, g))


def energy_cost_coeff(cap: Capability, net: NetworkParams, econ: EconParams) -> float:
    return econ.gamma * energy_per_block(cap, net)


def type_lambda_from(g: float, f: float) -> float:
    return g * g / (2.0 * f)


def type_lambda(
    cap: Capability,
    net: NetworkParams,
    ch: ChannelParams,
    fit: FitParams,
    econ: EconParams,
) -> float:
    """Scalar preference order ``G^2 / (2F)`` collapsing (h, c, p) to one axis."""
    g = total_confirm_prob(cap, net, ch, fit)
    return type_lambda_from(g, energy_cost_coeff(cap, net, econ))


def optimal_block_count(profile, b: float) -> float:
    """Effort ``G * b / F`` that maximises the device's utility at unit bonus ``b``."""
    if b < 0:
        raise ValidationError("b", f"unit bonus must be >= 0, got {b!r}")
    return profile.g * b / profile.f


def raw_device_utility(salary, unit_bonus, blocks, g, f, theta):
    """Device utility before effort is optimised out.

    ``s + G b e - F e^2 / 2 - theta s``; works elementwise on arrays.
    """
    return salary + g * unit_bonus * blocks - 0.5 * f * blocks**2 - theta * salary


def device_utility(item, profile, econ: EconParams) -> float:
    """Utility ``lambda b^2 - (theta - 1) s`` of ``profile`` taking ``item``.

    This is the value of :func:`raw_device_utility` at the optimal effort.
    """
    return profile.lam * item.unit_bonus**2 - (econ.theta - 1.0) * item.salary
