"""Conversion of (h, c, p) capabilities into ordered scalar types."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from . import model
from .params import (
    DEFAULT_FIT,
    GRID_C,
    GRID_H,
    GRID_P,
    Capability,
    ChannelParams,
    EconParams,
    FitParams,
    NetworkParams,
)
from .validation import ValidationError, check_int_at_least


@dataclass(frozen=True)
class TypeProfile:
    """One contract type.

    ``lam`` is the preference order ``g**2 / (2 f)``; ``q`` its probability
    mass. ``representative`` is the capability the type stands for, or None
    when the type was specified directly by its ``lam``.
    """

    index: int
    lam: float
    q: float
    g: float
    f: float
    representative: Capability | None = None


def profiles_from_lambdas(lams, q, g=None) -> list[TypeProfile]:
    """Build sorted, tie-merged profiles from raw ``lam`` values and masses.

    Without ``g`` every type gets ``g = 1`` and ``f = 1 / (2 lam)``; only the
    ratio ``g**2 / f`` matters to the contract.
    """
    lams = np.asarray(lams, dtype=float)
    q = np.asarray(q, dtype=float)
    g = np.ones_like(lams) if g is None else np.asarray(g, dtype=float)
    if not (lams.shape == q.shape == g.shape) or lams.ndim != 1 or len(lams) == 0:
        raise ValidationError("lams", "lams, q and g must be equal-length 1-D arrays")
    if np.any(lams <= 0):
        raise ValidationError("lams", "every type needs lam > 0")
    if np.any(q < 0) or q.sum() <= 0:
        raise ValidationError("q", "masses must be nonnegative with a positive total")
    raw = [
        TypeProfile(0, float(l), float(m), float(gg), float(gg * gg / (2.0 * l)))
        for l, m, gg in zip(lams, q, g)
    ]
    return finalize_profiles(raw)


def finalize_profiles(profiles: list[TypeProfile]) -> list[TypeProfile]:
    """Drop massless types, merge equal ``lam``, normalise ``q``, sort and index."""
    kept = sorted((p for p in profiles if p.q > 0), key=lambda p: p.lam)
    merged: list[TypeProfile] = []
    for p in kept:
        if merged and np.isclose(p.lam, merged[-1].lam, rtol=1e-12, atol=0.0):
            last = merged[-1]
            merged[-1] = TypeProfile(0, last.lam, last.q + p.q, last.g, last.f, last.representative)
        else:
            merged.append(p)
    total = sum(p.q for p in merged)
    return [
        TypeProfile(i + 1, p.lam, p.q / total, p.g, p.f, p.representative)
        for i, p in enumerate(merged)
    ]


def _nearest(value: float, grid) -> float:
    return min(grid, key=lambda g: (abs(g - value), g))


def _profile_for(cap, net, channel, fit, econ, q) -> TypeProfile:
    g = model.total_confirm_prob(cap, net, channel, fit)
    f = model.energy_cost_coeff(cap, net, econ)
    return TypeProfile(0, model.type_lambda_from(g, f), q, g, f, cap)


def build_types(
    population: list[Capability],
    n_types: int = 48,
    mode: str = "grid",
    *,
    net: NetworkParams,
    channel: ChannelParams,
    fit: FitParams,
    econ: EconParams,
    weights=None,
) -> list[TypeProfile]:
    """Partition a device population into contract types sorted by ``lam``.

    ``mode="grid"`` snaps every capability coordinate-wise to the nearest
    point of the 3 x 4 x 4 reference grid (``n_types`` is ignored) and uses
    empirical frequencies as masses. ``mode="quantile"`` sorts devices by
    ``lam`` and cuts them into ``n_types`` equal-frequency groups; a group is
    represented by its mean ``lam``, mean ``g`` and mean capability, with
    ``f`` set so that ``lam = g**2 / (2 f)`` holds exactly.
    """
    if not population:
        raise ValidationError("population", "must not be empty")
    check_int_at_least("n_types", n_types, 1)
    w = np.ones(len(population)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(population),) or np.any(w < 0):
        raise ValidationError("weights", "need one nonnegative weight per device")

    if mode == "grid":
        mass: dict[Capability, float] = {}
        for cap, wt in zip(population, w):
            snapped = Capability(
                _nearest(cap.h, GRID_H), _nearest(cap.c, GRID_C), _nearest(cap.p, GRID_P)
            )
            mass[snapped] = mass.get(snapped, 0.0) + wt
        raw = [_profile_for(cap, net, channel, fit, econ, m) for cap, m in mass.items()]
        return finalize_profiles(raw)

    if mode == "quantile":
        if weights is not None:
            raise ValidationError("weights", "quantile mode takes an unweighted population")
        devices = [_profile_for(cap, net, channel, fit, econ, 1.0) for cap in population]
        lams = np.array([d.lam for d in devices])
        distinct = len(np.unique(lams))
        if n_types > distinct:
            raise ValidationError(
                "n_types", f"{n_types} types requested but only {distinct} distinct lam values"
            )
        order = np.argsort(lams, kind="stable")
        raw = []
        for group in np.array_split(order, n_types):
            members = [devices[i] for i in group]
            lam = float(np.mean([m.lam for m in members]))
            g = float(np.mean([m.g for m in members]))
            rep = Capability(
                float(np.mean([m.representative.h for m in members])),
                float(np.mean([m.representative.c for m in members])),
                float(np.mean([m.representative.p for m in members])),
            )
            raw.append(TypeProfile(0, lam, len(group) / len(population), g, g * g / (2 * lam), rep))
        return finalize_profiles(raw)

    raise ValidationError("mode", f"expected 'grid' or 'quantile', got {mode!r}")


def sample_population(n: int, seed: int, *, h=(10.0, 15.0), c=(1.0, 20.0), p=(5.0, 20.0)):
    """Draw ``n`` devices with independent uniform (h, c, p)."""
    rng = np.random.default_rng(seed)
    hs = rng.uniform(*h, size=n)
    cs = rng.uniform(*c, size=n)
    ps = rng.uniform(*p, size=n)
    return [Capability(float(a), float(b), float(d)) for a, b, d in zip(hs, cs, ps)]


class TypeConverter(TransformerMixin, BaseEstimator):
    """Map capability rows ``(h, c, p)`` to the scalar type ``lam``.

    Stateless: :meth:`fit` only validates the environment parameters.
    ``None`` parameters fall back to the package defaults.
    """

    def __init__(self, network=None, channel=None, pc_fit=None, econ=None):
        self.network = network
        self.channel = channel
        self.pc_fit = pc_fit
        self.econ = econ

    def _resolved(self):
        return (
            self.network or NetworkParams(),
            self.channel or ChannelParams(),
            self.pc_fit or DEFAULT_FIT,
            self.econ or EconParams(),
        )

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] != 3:
            raise ValidationError("X", f"expected columns (h, c, p), got {X.shape[1]} columns")
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        X = check_array(X)
        net, ch, fit, econ = self._resolved()
        out = np.empty((X.shape[0], 1))
        for k, (h, c, p) in enumerate(X):
            out[k, 0] = model.type_lambda(Capability(h, c, p), net, ch, fit, econ)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["lambda"], dtype=object)
