"""Small input-validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import math

import numpy as np


class ValidationError(ValueError):
    """Raised when a parameter violates a documented invariant.

    ``field`` names the offending parameter so the CLI can report it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _finite(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(name, f"expected a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValidationError(name, f"must be finite, got {value!r}")
    return value


def check_positive(name: str, value) -> float:
    value = _finite(name, value)
    if value <= 0:
        raise ValidationError(name, f"must be > 0, got {value!r}")
    return value


def check_greater(name: str, value, bound: float) -> float:
    value = _finite(name, value)
    if value <= bound:
        raise ValidationError(name, f"must be > {bound}, got {value!r}")
    return value


def check_probability(name: str, value, *, open_low: bool = False) -> float:
    """Validate ``value`` in [0, 1], or (0, 1] when ``open_low``."""
    value = _finite(name, value)
    if open_low and not 0 < value <= 1:
        raise ValidationError(name, f"must lie in (0, 1], got {value!r}")
    if not 0 <= value <= 1:
        raise ValidationError(name, f"must lie in [0, 1], got {value!r}")
    return value


def check_int_at_least(name: str, value, low: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(name, f"expected an integer, got {value!r}")
    if value < low:
        raise ValidationError(name, f"must be >= {low}, got {value!r}")
    return int(value)


def check_1d(name: str, values, *, min_len: int = 1) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValidationError(name, f"expected a 1-D array, got shape {arr.shape}")
    if len(arr) < min_len:
        raise ValidationError(name, f"needs at least {min_len} entries, got {len(arr)}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(name, "contains non-finite values")
    return arr
