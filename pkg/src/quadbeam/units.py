"""Parsing of SI quantities written with a unit suffix, e.g. ``"675nm"``."""
import re

import numpy as np

from . import constants as const

_UNITS = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9, "pm": 1e-12},
    "intensity": {"W/m2": 1.0, "W/m^2": 1.0, "W/cm2": 1e4, "W/cm^2": 1e4,
                  "mW/cm2": 10.0, "kW/cm2": 1e7},
    "rate": {"1/s": 1.0, "s-1": 1.0, "/s": 1.0, "rad/s": 1.0, "Hz": 2 * np.pi,
             "kHz": 2e3 * np.pi, "MHz": 2e6 * np.pi, "GHz": 2e9 * np.pi},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "angle": {"rad": 1.0, "mrad": 1e-3, "deg": np.pi / 180},
    "mass": {"kg": 1.0, "u": 1.66053906660e-27, "amu": 1.66053906660e-27},
    "quadrupole": {"Cm2": 1.0, "C m2": 1.0, "C*m^2": 1.0, "C m^2": 1.0,
                   "ea0^2": const.e * const.a0 ** 2, "e a0^2": const.e * const.a0 ** 2,
                   "ea02": const.e * const.a0 ** 2},
    "velocity": {"m/s": 1.0, "mm/s": 1e-3, "cm/s": 1e-2},
}

_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(value, kind, context=None):
    """Convert ``value`` to an SI float.

    Plain numbers pass through unchanged. Strings may carry a unit of the
    given ``kind``; ``context`` may supply relative units, e.g.
    ``{"w0": waist}`` for lengths or ``{"gamma": gamma_q}`` for rates.

    >>> parse_quantity("675nm", "length")
    6.75e-07
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a {kind}, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a {kind}, got {value!r}")
    m = _NUM.match(value)
    if not m:
        raise ValueError(f"cannot parse {kind} {value!r}")
    number, unit = float(m.group(1)), m.group(2)
    if not unit:
        return number
    table = dict(_UNITS.get(kind, {}))
    if context:
        table.update({k: v for k, v in context.items() if v is not None})
    if unit not in table:
        raise ValueError(f"unknown {kind} unit {unit!r} in {value!r}; known: {', '.join(table)}")
    return number * table[unit]


def parse_vector(value, kind, context=None):
    """Three quantities from a list or a comma-separated string."""
    if isinstance(value, str):
        value = [v for v in value.split(",")]
    if len(value) != 3:
        raise ValueError(f"expected three components, got {value!r}")
    return np.array([parse_quantity(v, kind, context) for v in value])
