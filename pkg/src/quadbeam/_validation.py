"""Input validation helpers shared by the public API."""
import numbers

import numpy as np

from .exceptions import DomainError


def check_order(value, name, max_order):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 0 or value > max_order:
        raise DomainError(f"{name}={value} outside operating range [0, {max_order}]")
    return int(value)


def check_integer(value, name):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    return int(value)


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_finite_array(x, name, max_abs=None):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    if max_abs is not None and x.size and np.max(np.abs(x)) > max_abs:
        raise DomainError(f"|{name}| exceeds operating range {max_abs:g}")
    return x


def check_positions(positions, name="positions"):
    """Coerce ``positions`` to a float array with a trailing axis of length 3.

    A single point ``(X, Y, Z)`` gives shape ``(3,)``; ``n`` points give ``(n, 3)``.
    """
    arr = np.asarray(positions, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise ValueError(f"{name} must have a trailing dimension of 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
