"""Small input-validation helpers used across modules."""

from __future__ import annotations

import numpy as np

from .errors import InvalidValue, ShapeError


def as_float_1d(x, name: str = "signal") -> np.ndarray:
    """Coerce to a 1-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def as_float_2d(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def require_finite(x: np.ndarray, name: str = "value") -> None:
    if not np.all(np.isfinite(x)):
        raise InvalidValue(f"{name} contains non-finite entries")


def require(condition: bool, message: str) -> None:
    """Raise InvalidValue unless ``condition`` holds."""
    if not condition:
        raise InvalidValue(message)
