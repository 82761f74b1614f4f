import math
from typing import Iterable, Optional

import numpy as np

from .errors import ValidationError

CRORE = 1e7
LAKH = 1e5
LITERS_PER_TONNE = 1000.0          # 1 L of milk taken as 1 kg

UNIT_FACTORS = {
    "rupees": 1.0,
    "lakh": LAKH,
    "crore": CRORE,
}


def _check_finite(name: str, value) -> float:
    """
    Normalize and validate a numeric scalar.

    Accepts int, float or numpy scalars. Rejects bool, NaN and infinities.

    :param name: Field name (shown in the error message)
    :param value: Value to validate
    :return: The value as float
    """
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise ValidationError(f"'{name}' must be a number, got {type(value).__name__}.")
    value = float(value)
    if math.isnan(value):
        raise ValidationError(f"'{name}' is NaN.")
    if math.isinf(value):
        raise ValidationError(f"'{name}' is infinite.")
    return value


def _check_nonnegative(name: str, value) -> float:
    value = _check_finite(name, value)
    if value < 0:
        raise ValidationError(f"'{name}' must be nonnegative, got {value}.")
    return value


def _check_positive(name: str, value) -> float:
    value = _check_finite(name, value)
    if value <= 0:
        raise ValidationError(f"'{name}' must be greater than 0, got {value}.")
    return value


def _check_fraction(name: str, value) -> float:
    value = _check_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"'{name}' must be a fraction in [0, 1], got {value}.")
    return value


def _check_fractions(name: str, values: Iterable) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"'{name}' must be a one-dimensional sequence.")
    if np.any(~np.isfinite(arr)) or np.any((arr < 0) | (arr > 1)):
        raise ValidationError(f"'{name}' must only contain fractions in [0, 1].")
    return arr


def _safe_ratio(num: float, den: float) -> Optional[float]:
    """num/den, or None when the denominator is 0 (undefined flag)."""
    if den == 0:
        return None
    return num / den


def to_unit(value: float, unit: str = "crore") -> float:
    """
    Convert a ₹ amount to the report unit.

    :param value: Amount in rupees
    :param unit: 'rupees', 'lakh' or 'crore'
    """
    if unit not in UNIT_FACTORS:
        raise ValidationError(f"Unknown currency unit '{unit}'. Use one of {sorted(UNIT_FACTORS)}.")
    return value / UNIT_FACTORS[unit]
