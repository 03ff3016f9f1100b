"""Grid sampling of field observables with CSV and PPM export.

Grid values are stored with shape ``(ny, nx)``: row ``j`` is ``y[j]`` and
column ``i`` is ``x[i]``, so a row-major walk has x varying fastest.
"""
import csv
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .beams import Family, evaluate_field, rabi_scale
from .dynamics import trap_potential, trap_potential_approx
from . import constants as const
from .exceptions import DomainError, SingularInputError

logger = logging.getLogger(__name__)

OBSERVABLES = ("rabi_sq_rel", "phase", "potential", "potential_approx",
               "force_x", "force_y", "force_magnitude")
_NEEDS_DETUNING = {"potential", "potential_approx", "force_x", "force_y", "force_magnitude"}
MAX_GRID = 8192


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid in the plane ``Z = z_plane``.

    With ``units="waist"`` the x/y bounds (not ``z_plane``) are in beam
    waists; use :meth:`to_si` to resolve them against a beam.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = 256
    ny: int = 256
    z_plane: float = 0.0
    units: str = "m"

    def __post_init__(self):
        if not self.x_max > self.x_min or not self.y_max > self.y_min:
            raise ValueError("grid bounds must satisfy max > min on each axis")
        for n, name in ((self.nx, "nx"), (self.ny, "ny")):
            if int(n) != n or not 2 <= n <= MAX_GRID:
                raise ValueError(f"{name} must be an integer in [2, {MAX_GRID}]")
        if self.units not in ("m", "waist"):
            raise ValueError("units must be 'm' or 'waist'")

    def to_si(self, spec):
        if self.units == "m":
            return self
        w = spec.waist
        return GridSpec(self.x_min * w, self.x_max * w, self.y_min * w, self.y_max * w,
                        self.nx, self.ny, self.z_plane, "m")

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, int(self.nx))

    @property
    def y(self):
        return np.linspace(self.y_min, self.y_max, int(self.ny))

    def positions(self):
        X, Y = np.meshgrid(self.x, self.y)
        return np.stack([X, Y, np.full_like(X, self.z_plane)], axis=-1)


@dataclass
class FieldGrid:
    grid: GridSpec
    observable: str
    values: np.ndarray          # (ny, nx)
    scale: float
    singular_mask: np.ndarray   # (ny, nx)

    def argmax(self):
        """``(x, y, value)`` of the largest unmasked cell."""
        v = np.where(self.singular_mask, -np.inf, self.values)
        j, i = np.unravel_index(np.argmax(v), v.shape)
        return self.grid.x[i], self.grid.y[j], self.values[j, i]

    def summary(self):
        ok = self.values[~self.singular_mask]
        if ok.size == 0:
            return f"{self.observable}: all cells masked"
        x, y, vmax = self.argmax()
        return (f"{self.observable}: min={ok.min():.6g} max={vmax:.6g} "
                f"argmax=({x:.6g}, {y:.6g}) masked={int(self.singular_mask.sum())}")


def default_grid(spec, n=256):
    """Default display grid for a beam.

    ``+-3 w0`` at ``Z = 0`` for LG and HG (widened for high-order LG rings so
    the annulus fits); ``+-6/k_perp`` at ``Z = Z_max`` for Bessel, widened
    with the order so the first ring of ``J_m`` is inside.
    """
    if spec.family is Family.BESSEL:
        half = max(6.0, 6.0 + 1.5 * spec.bessel_m) / spec.k_perp
        return GridSpec(-half, half, -half, half, n, n, spec.z_max)
    if spec.family is Family.LAGUERRE_GAUSSIAN:
        ring = np.sqrt(0.5 * (abs(spec.lg_l) + 2 * spec.lg_p + 1))
        half = max(3.0, 1.6 * ring) * spec.waist
        return GridSpec(-half, half, -half, half, n, n, 0.0)
    half = 3.0 * spec.waist
    return GridSpec(-half, half, -half, half, n, n, 0.0)


def sample_grid(spec, atom, grid, observable="rabi_sq_rel", det=None):
    """Evaluate one observable over ``grid``.

    ``rabi_sq_rel`` is ``|Omega / Omega_0|**2``; potentials are in joules and
    forces (gradient plus spontaneous, atom at rest) in newtons. Cells where
    the quantity is undefined are masked, never fatal.
    """
    if observable not in OBSERVABLES:
        raise ValueError(f"unknown observable {observable!r}; choose from {', '.join(OBSERVABLES)}")
    if observable in _NEEDS_DETUNING and det is None:
        raise ValueError(f"observable {observable!r} requires a detuning")
    grid = grid.to_si(spec)
    pos = grid.positions()
    shape = pos.shape[:2]
    try:
        fa = evaluate_field(spec, atom, pos)
    except (DomainError, SingularInputError) as exc:
        logger.warning("grid plane outside field domain: %s", exc)
        return FieldGrid(grid, observable, np.full(shape, np.nan), 1.0, np.ones(shape, bool))

    scale = 1.0
    mask = np.zeros(shape, bool)
    if observable == "rabi_sq_rel":
        scale = rabi_scale(spec, atom) ** 2
        values = fa.rabi_sq / scale
    elif observable == "phase":
        values = np.asarray(fa.phase, float)
        mask = fa.phase_singular.copy()
    elif observable == "potential":
        values = trap_potential(atom, det, fa.rabi_sq)
    elif observable == "potential_approx":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            values = trap_potential_approx(atom, det, fa.rabi_sq)
    else:
        d0 = det.delta0
        den = d0 * d0 + 2.0 * fa.rabi_sq + atom.gamma_q ** 2
        force = (-const.hbar * d0 * fa.rabi_sq_gradient
                 + 2.0 * const.hbar * atom.gamma_q * fa.rabi_sq[..., None] * fa.phase_gradient
                 ) / den[..., None]
        mask = fa.phase_singular.copy()
        if observable == "force_x":
            values = force[..., 0]
        elif observable == "force_y":
            values = force[..., 1]
        else:
            values = np.sqrt(np.sum(force ** 2, axis=-1))
    values = np.asarray(values, float)
    mask |= ~np.isfinite(values)
    values = np.where(mask, np.nan, values)
    return FieldGrid(grid, observable, values, float(scale), mask)


# -- CSV ------------------------------------------------------------------------

def _fmt(v, digits):
    return "nan" if np.isnan(v) else f"{v:.{digits}g}"


def export_csv(grid, path, digits=12):
    """Write ``x,y,value,singular`` rows, x varying fastest.

    Numbers use ``digits`` significant digits (17 round-trips doubles exactly).
    """
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("x,y,value,singular\n")
            xs, ys = grid.grid.x, grid.grid.y
            for j, y in enumerate(ys):
                sy = _fmt(y, digits)
                for i, x in enumerate(xs):
                    sing = bool(grid.singular_mask[j, i])
                    val = np.nan if sing else grid.values[j, i]
                    fh.write(f"{_fmt(x, digits)},{sy},{_fmt(val, digits)},{'true' if sing else 'false'}\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path):
    """Read a CSV written by :func:`export_csv`; returns ``(x, y, values, mask)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["x", "y", "value", "singular"]:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    data = rows[1:]
    x = np.array(sorted({float(r[0]) for r in data}))
    y = np.array(sorted({float(r[1]) for r in data}))
    nx, ny = len(x), len(y)
    vals = np.array([float(r[2]) for r in data]).reshape(ny, nx)
    mask = np.array([r[3] == "true" for r in data]).reshape(ny, nx)
    return x, y, vals, mask


# -- PPM ------------------------------------------------------------------------

# Anchor colours, linearly interpolated between equally spaced stops.
COLORMAPS = {
    "gray": [(0, 0, 0), (255, 255, 255)],
    "inferno": [(0, 0, 4), (40, 11, 84), (101, 21, 110), (159, 42, 99),
                (212, 72, 66), (245, 125, 21), (250, 193, 39), (252, 255, 164)],
    "viridis": [(68, 1, 84), (70, 50, 127), (54, 92, 141), (39, 127, 142),
                (31, 161, 135), (74, 194, 109), (159, 218, 58), (253, 231, 37)],
}


def _lut(name):
    try:
        stops = np.array(COLORMAPS[name], float)
    except KeyError:
        raise ValueError(f"unknown colormap {name!r}; choose from {', '.join(COLORMAPS)}") from None
    pos = np.linspace(0.0, 1.0, len(stops))
    u = np.linspace(0.0, 1.0, 256)
    return np.stack([np.interp(u, pos, stops[:, c]) for c in range(3)], axis=-1).round().astype(np.uint8)


def render_heatmap(grid, path, colormap="inferno"):
    """Write a binary PPM (P6) with linear min-max scaling; masked cells are black.

    The top image row is ``y_max``. A constant grid renders at mid-scale with
    a warning.
    """
    vals = grid.values
    mask = grid.singular_mask
    ny, nx = vals.shape
    lut = _lut(colormap)
    ok = vals[~mask]
    if ok.size == 0 or ok.max() == ok.min():
        warnings.warn("degenerate grid rendered at mid-scale", RuntimeWarning, stacklevel=2)
        idx = np.full(vals.shape, 128)
    else:
        lo, hi = ok.min(), ok.max()
        norm = (np.where(mask, lo, vals) - lo) / (hi - lo)
        idx = np.clip(np.floor(norm * 255 + 0.5), 0, 255).astype(int)
    rgb = lut[idx]
    rgb[mask] = 0
    rgb = rgb[::-1]
    try:
        with open(path, "wb") as fh:
            fh.write(f"P6 {nx} {ny} 255\n".encode("ascii"))
            fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write PPM {path}: {exc}") from exc


def read_ppm(path):
    """Read a P6 image written by :func:`render_heatmap` as a ``(ny, nx, 3)`` array."""
    with open(path, "rb") as fh:
        data = fh.read()
    header, _, body = data.partition(b"\n")
    magic, nx, ny, maxval = header.split()
    if magic != b"P6" or maxval != b"255":
        raise ValueError(f"{path}: not an 8-bit P6 image")
    return np.frombuffer(body, np.uint8).reshape(int(ny), int(nx), 3)
