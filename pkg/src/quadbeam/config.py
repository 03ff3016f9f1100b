"""Run configuration: JSON documents resolved against a named preset.

Every quantity may be a plain SI number or a string with a unit suffix
(``"675nm"``, ``"1e9W/m2"``). Lengths also accept ``w0`` (waists),
``zR`` (Rayleigh ranges), ``zmax`` and ``/kperp``; rates accept ``gamma``.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .beams import AtomSpec, BeamSpec, Family, get_preset
from .dynamics import DetuningSpec
from .exceptions import ConfigError
from .fieldmap import OBSERVABLES, GridSpec, default_grid
from .units import parse_quantity, parse_vector

FORMATS = ("csv", "ppm")


@dataclass
class TrajectoryConfig:
    position: np.ndarray
    velocity: np.ndarray
    dt: float
    steps: int
    conservative: bool = False


@dataclass
class OutputSpec:
    path: str
    format: str = "csv"
    observable: str = "rabi_sq_rel"
    colormap: str = "inferno"


@dataclass
class RunConfig:
    preset: str
    beam: BeamSpec
    atom: AtomSpec
    detuning: DetuningSpec
    grid: GridSpec = None
    point: np.ndarray = None
    velocity: np.ndarray = None
    trajectory: TrajectoryConfig = None
    outputs: list = field(default_factory=list)


def load_json(path):
    """Parse a JSON config file; syntax errors report line and column."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}", str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", str(path))
    return data


def _get(d, key, kind, where, context=None, default=None):
    if key not in d:
        return default
    try:
        return parse_quantity(d[key], kind, context)
    except ValueError as exc:
        raise ConfigError(str(exc), f"{where}.{key}") from exc


def _int(d, key, where, default):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"expected an integer, got {v!r}", f"{where}.{key}")
    return int(v)


_BEAM_KEYS = {"family", "l", "p", "m", "n", "full_phase", "cone_angle", "z_max", "sigma_sign",
              "refractive_index", "propagation_sign", "wavelength", "waist", "intensity"}


def _beam(raw, preset):
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", "beam")
    unknown = set(raw) - _BEAM_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "beam")
    try:
        family = Family(raw.get("family", "lg"))
    except ValueError:
        raise ConfigError(f"unknown family {raw.get('family')!r}; use lg, bessel or hg", "beam.family") from None
    lam = _get(raw, "wavelength", "length", "beam", default=preset.wavelength)
    w0 = _get(raw, "waist", "length", "beam", {"lambda": lam}, default=preset.waist)
    inten = _get(raw, "intensity", "intensity", "beam", default=preset.intensity)
    kw = dict(wavelength=lam, waist=w0, intensity=inten,
              propagation_sign=_int(raw, "propagation_sign", "beam", 1))
    try:
        if family is Family.LAGUERRE_GAUSSIAN:
            return BeamSpec.laguerre_gaussian(_int(raw, "l", "beam", 1), _int(raw, "p", "beam", 0),
                                              lg_full_phase=bool(raw.get("full_phase", False)), **kw)
        if family is Family.BESSEL:
            alpha = _get(raw, "cone_angle", "angle", "beam", default=preset.cone_angle)
            zmax = _get(raw, "z_max", "length", "beam", {"w0": w0})
            return BeamSpec.bessel(_int(raw, "m", "beam", 0), alpha, zmax,
                                   bessel_sigma_sign=_int(raw, "sigma_sign", "beam", 1), **kw)
        return BeamSpec.hermite_gaussian(
            _int(raw, "n", "beam", 0), _int(raw, "m", "beam", 0),
            refractive_index=_get(raw, "refractive_index", "dimensionless", "beam", default=1.0), **kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), "beam") from exc


def _atom(raw, preset):
    if raw is None or isinstance(raw, str):
        name = raw or preset.name
        try:
            return get_preset(name).atom
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), "atom") from None
    if not isinstance(raw, dict):
        raise ConfigError("expected a preset name or an object", "atom")
    base = preset.atom
    try:
        return AtomSpec(
            q_xx=_get(raw, "q_xx", "quadrupole", "atom", default=base.q_xx),
            q_xy=_get(raw, "q_xy", "quadrupole", "atom", default=base.q_xy),
            q_xz=_get(raw, "q_xz", "quadrupole", "atom", default=base.q_xz),
            gamma_q=_get(raw, "gamma_q", "rate", "atom", default=base.gamma_q),
            transition_wavelength=_get(raw, "transition_wavelength", "length", "atom",
                                       default=base.transition_wavelength),
            mass=_get(raw, "mass", "mass", "atom", default=base.mass),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "atom") from exc


def length_context(beam):
    ctx = {"w0": beam.waist, "lambda": beam.wavelength}
    if beam.family is Family.BESSEL:
        ctx.update({"zmax": beam.z_max, "/kperp": 1.0 / beam.k_perp})
    else:
        ctx["zR"] = beam.rayleigh_range
    return ctx


def _grid(raw, beam):
    if raw is None:
        return None
    if raw == "default":
        return default_grid(beam)
    if not isinstance(raw, dict):
        raise ConfigError("expected 'default' or an object", "grid")
    if raw.get("default"):
        g = default_grid(beam, _int(raw, "n", "grid", 256))
        if "z_plane" in raw:
            g = GridSpec(g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny,
                         _get(raw, "z_plane", "length", "grid", length_context(beam)))
        return g
    ctx = length_context(beam)
    try:
        vals = {k: _get(raw, k, "length", "grid", ctx) for k in ("x_min", "x_max", "y_min", "y_max")}
        missing = [k for k, v in vals.items() if v is None]
        if missing:
            raise ConfigError(f"missing {missing}", "grid")
        z = _get(raw, "z_plane", "length", "grid", ctx,
                 default=beam.z_max if beam.family is Family.BESSEL else 0.0)
        n = _int(raw, "n", "grid", 256)
        return GridSpec(nx=_int(raw, "nx", "grid", n), ny=_int(raw, "ny", "grid", n), z_plane=z, **vals)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), "grid") from exc


def _vector(raw, key, kind, where, ctx=None):
    if raw is None:
        return None
    try:
        return parse_vector(raw, kind, ctx)
    except ValueError as exc:
        raise ConfigError(str(exc), f"{where}{key}") from exc


def _outputs(raw):
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError("expected a list", "outputs")
    outs = []
    for i, o in enumerate(raw):
        where = f"outputs[{i}]"
        if not isinstance(o, dict) or "path" not in o:
            raise ConfigError("expected an object with a 'path'", where)
        fmt = o.get("format") or ("ppm" if str(o["path"]).endswith(".ppm") else "csv")
        if fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}", f"{where}.format")
        obs = o.get("observable", "rabi_sq_rel")
        if obs not in OBSERVABLES:
            raise ConfigError(f"unknown observable {obs!r}", f"{where}.observable")
        outs.append(OutputSpec(str(o["path"]), fmt, obs, o.get("colormap", "inferno")))
    return outs


def resolve_config(raw):
    """Validate a raw config mapping and resolve it to SI objects."""
    name = raw.get("preset", "cs-6s-5d")
    try:
        preset = get_preset(name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), "preset") from None
    beam = _beam(raw.get("beam", {}), preset)
    atom = _atom(raw.get("atom"), preset)
    det_raw = raw.get("detuning", {})
    if not isinstance(det_raw, dict):
        raise ConfigError("expected an object", "detuning")
    delta0 = _get(det_raw, "delta0", "rate", "detuning", {"gamma": atom.gamma_q}, default=preset.delta0)
    ctx = length_context(beam)
    traj = None
    if raw.get("trajectory") is not None:
        t = raw["trajectory"]
        if not isinstance(t, dict):
            raise ConfigError("expected an object", "trajectory")
        for key in ("position", "dt", "steps"):
            if key not in t:
                raise ConfigError("missing", f"trajectory.{key}")
        dt = _get(t, "dt", "time", "trajectory")
        if not dt > 0:
            raise ConfigError("must be positive", "trajectory.dt")
        steps = _int(t, "steps", "trajectory", 0)
        if steps < 0:
            raise ConfigError("must be non-negative", "trajectory.steps")
        traj = TrajectoryConfig(
            position=_vector(t["position"], "position", "length", "trajectory.", ctx),
            velocity=_vector(t.get("velocity", [0, 0, 0]), "velocity", "velocity", "trajectory."),
            dt=dt, steps=steps, conservative=bool(t.get("conservative", False)))
    return RunConfig(
        preset=name, beam=beam, atom=atom, detuning=DetuningSpec(delta0),
        grid=_grid(raw.get("grid"), beam),
        point=_vector(raw.get("point"), "point", "length", "", ctx),
        velocity=_vector(raw.get("velocity"), "velocity", "velocity", ""),
        trajectory=traj, outputs=_outputs(raw.get("outputs")),
    )


def config_to_dict(cfg):
    """JSON-ready mapping, in SI numbers, that resolves back to ``cfg``."""
    b = cfg.beam
    beam = {"family": b.family.value, "wavelength": b.wavelength, "waist": b.waist,
            "intensity": b.intensity, "propagation_sign": b.propagation_sign}
    if b.family is Family.LAGUERRE_GAUSSIAN:
        beam.update(l=b.lg_l, p=b.lg_p, full_phase=b.lg_full_phase)
    elif b.family is Family.BESSEL:
        beam.update(m=b.bessel_m, cone_angle=b.cone_angle, z_max=b.z_max, sigma_sign=b.bessel_sigma_sign)
    else:
        beam.update(n=b.hg_n, m=b.hg_m, refractive_index=b.refractive_index)
    a = cfg.atom
    out = {
        "preset": cfg.preset,
        "beam": beam,
        "atom": {"q_xx": a.q_xx, "q_xy": a.q_xy, "q_xz": a.q_xz, "gamma_q": a.gamma_q,
                 "transition_wavelength": a.transition_wavelength, "mass": a.mass},
        "detuning": {"delta0": cfg.detuning.delta0},
    }
    if cfg.grid is not None:
        g = cfg.grid
        out["grid"] = {"x_min": g.x_min, "x_max": g.x_max, "y_min": g.y_min, "y_max": g.y_max,
                       "nx": int(g.nx), "ny": int(g.ny), "z_plane": g.z_plane}
    if cfg.point is not None:
        out["point"] = [float(v) for v in cfg.point]
    if cfg.velocity is not None:
        out["velocity"] = [float(v) for v in cfg.velocity]
    if cfg.trajectory is not None:
        t = cfg.trajectory
        out["trajectory"] = {"position": [float(v) for v in t.position],
                             "velocity": [float(v) for v in t.velocity],
                             "dt": t.dt, "steps": t.steps, "conservative": t.conservative}
    if cfg.outputs:
        out["outputs"] = [{"path": o.path, "format": o.format, "observable": o.observable,
                           "colormap": o.colormap} for o in cfg.outputs]
    return out
