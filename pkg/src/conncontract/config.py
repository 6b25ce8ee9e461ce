"""Run configuration: one flat JSON document, validated before any work starts."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import jsonschema

from .params import ChannelParams, EconParams, FitParams, NetworkParams
from .validation import (
    ValidationError,
    check_int_at_least,
    check_positive,
    check_probability,
)

DEFAULTS = {
    "z": 100,
    "p_l": 0.2,
    "tau": 600.0,
    "block_size": 1000.0,
    "rate": 2000.0,
    "p_fork": 0.5,
    "mean_hash": 12.5,
    "bandwidth": 2e6,
    "noise_power": 3.98e-3,
    "fading_scale": 1.0,
    "theta": 1.5,
    "epsilon": 400.0,
    "gamma": 1e-4,
    "beta1": 0.97575,
    "beta2": -0.03006,
    "beta3": 0.00411,
    "type_mode": "grid",
    "n_types": 48,
    "population_size": 10000,
    "seed": 0,
    "trials": 2000,
    "buckets": 20,
    "eps_min": 100.0,
    "eps_max": 550.0,
    "eps_step": 50.0,
    "sweep_z": [100, 200, 300],
    "sweep_p_l": [0.1, 0.2, 0.3, 0.4],
    "sweep_trials": 200,
    "sweep_pc": False,
    "fixed_pow_quantile": 0.5,
    "fixed_pow_salary": 0.0,
}

_NUM = {"type": "number"}
_INT = {"type": "integer"}
SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        **{k: _NUM for k, v in DEFAULTS.items() if isinstance(v, float)},
        **{k: _INT for k, v in DEFAULTS.items() if isinstance(v, int) and not isinstance(v, bool)},
        "type_mode": {"enum": ["grid", "quantile"]},
        "sweep_z": {"type": "array", "items": _INT, "minItems": 1},
        "sweep_p_l": {"type": "array", "items": _NUM, "minItems": 1},
        "sweep_pc": {"type": "boolean"},
    },
}


@dataclass(frozen=True)
class RunConfig:
    network: NetworkParams
    channel: ChannelParams
    econ: EconParams
    fit: FitParams
    values: dict = field(repr=False)

    def __getitem__(self, key):
        return self.values[key]

    def to_dict(self) -> dict:
        return dict(self.values)

    def config_hash(self) -> str:
        canonical = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, raw: dict | None = None, **overrides) -> "RunConfig":
        raw = dict(raw or {})
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = ".".join(str(p) for p in exc.absolute_path) or "config"
            raise ValidationError(where, exc.message) from None
        values = {**DEFAULTS, **raw, **{k: v for k, v in overrides.items() if v is not None}}
        # ints are acceptable wherever a real is expected
        for key, default in DEFAULTS.items():
            if isinstance(default, float):
                values[key] = float(values[key])

        network = NetworkParams(
            z=values["z"], p_l=values["p_l"], tau=values["tau"],
            block_size=values["block_size"], rate=values["rate"],
            p_fork=values["p_fork"], mean_hash=values["mean_hash"],
        )
        channel = ChannelParams(values["bandwidth"], values["noise_power"], values["fading_scale"])
        econ = EconParams(values["theta"], values["epsilon"], values["gamma"])
        fit = FitParams(values["beta1"], values["beta2"], values["beta3"])
        check_int_at_least("n_types", values["n_types"], 1)
        check_int_at_least("population_size", values["population_size"], 1)
        check_int_at_least("seed", values["seed"], 0)
        check_int_at_least("trials", values["trials"], 1)
        check_int_at_least("buckets", values["buckets"], 1)
        check_int_at_least("sweep_trials", values["sweep_trials"], 1)
        check_positive("eps_min", values["eps_min"])
        check_positive("eps_step", values["eps_step"])
        if values["eps_max"] < values["eps_min"]:
            raise ValidationError("eps_max", "must be >= eps_min")
        for z in values["sweep_z"]:
            check_int_at_least("sweep_z", z, 2)
        for p in values["sweep_p_l"]:
            check_probability("sweep_p_l", p, open_low=True)
        check_probability("fixed_pow_quantile", values["fixed_pow_quantile"], open_low=True)
        if values["fixed_pow_salary"] < 0:
            raise ValidationError("fixed_pow_salary", "must be >= 0")
        return cls(network, channel, econ, fit, values)

    @classmethod
    def load(cls, path, **overrides) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError("config", f"not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ValidationError("config", "top level must be a JSON object")
        return cls.from_dict(raw, **overrides)
