"""Command-line interface: ``quadbeam {params,map,force,potential,trajectory}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .beams import PRESETS, BeamSpec, Family, get_preset, rabi_scale, sample_field
from .config import config_to_dict, load_json, resolve_config
from .dynamics import (DynamicState, integrate_trajectory, optical_force, trap_potential,
                       trap_potential_approx)
from .exceptions import ConfigError, DomainError, SingularInputError
from .fieldmap import export_csv, render_heatmap, sample_grid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

logger = logging.getLogger("quadbeam")


def _parse_beam(text):
    """``"lg:l=1,p=0"`` -> ``{"family": "lg", "l": 1, "p": 0}``."""
    family, _, rest = text.partition(":")
    out = {"family": family.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {item!r}", "--beam")
        val = val.strip()
        if val.lower() in ("true", "false"):
            out[key.strip()] = val.lower() == "true"
        else:
            try:
                out[key.strip()] = int(val)
            except ValueError:
                out[key.strip()] = val
    return out


def _parse_grid(text):
    """``"default"``, ``"default:N"`` or ``"x0:x1:nx,y0:y1:ny"``."""
    if text.startswith("default"):
        _, _, n = text.partition(":")
        return {"default": True, "n": int(n)} if n else "default"
    try:
        xs, ys = text.split(",")
        x0, x1, nx = xs.split(":")
        y0, y1, ny = ys.split(":")
        return {"x_min": x0, "x_max": x1, "nx": int(nx), "y_min": y0, "y_max": y1, "ny": int(ny)}
    except ValueError:
        raise ConfigError(f"cannot parse {text!r}; use x0:x1:nx,y0:y1:ny or default", "--grid") from None


def _raw_config(args):
    raw = load_json(args.config) if args.config else {}
    if args.preset:
        raw["preset"] = args.preset
    if args.beam:
        raw["beam"] = _parse_beam(args.beam)
    if args.intensity:
        raw.setdefault("beam", {})["intensity"] = args.intensity
    if args.delta0:
        raw.setdefault("detuning", {})["delta0"] = args.delta0
    if getattr(args, "grid", None):
        raw["grid"] = _parse_grid(args.grid)
    if getattr(args, "z_plane", None) is not None:
        g = raw.get("grid") or "default"
        if g == "default":
            g = {"default": True}
        g["z_plane"] = args.z_plane
        raw["grid"] = g
    if getattr(args, "point", None):
        raw["point"] = args.point
    if args.command == "trajectory":
        t = raw.get("trajectory") or {}
        for key in ("position", "dt", "steps"):
            if getattr(args, key, None) is not None:
                t[key] = getattr(args, key)
        if args.velocity:
            t["velocity"] = args.velocity
        if args.conservative:
            t["conservative"] = True
        if t:
            raw["trajectory"] = t
    elif getattr(args, "velocity", None):
        raw["velocity"] = args.velocity
    if getattr(args, "out", None):
        out = {"path": args.out}
        if args.format:
            out["format"] = args.format
        if getattr(args, "observable", None):
            out["observable"] = args.observable
        if getattr(args, "colormap", None):
            out["colormap"] = args.colormap
        raw["outputs"] = [out]
    elif getattr(args, "observable", None) and raw.get("outputs"):
        for o in raw["outputs"]:
            o["observable"] = args.observable
    return raw


# -- commands ------------------------------------------------------------------

def cmd_params(cfg, out=None):
    """Print the preset's derived quantities with units."""
    out = out or sys.stdout
    atom = cfg.atom
    p = get_preset(cfg.preset)
    b = cfg.beam
    kw = dict(wavelength=b.wavelength, waist=b.waist, intensity=b.intensity)
    lg = BeamSpec.laguerre_gaussian(1, 0, **kw)
    bes = BeamSpec.bessel(0, p.cone_angle, **kw) if b.family is not Family.BESSEL else b
    hg = BeamSpec.hermite_gaussian(0, 0, **kw) if b.family is not Family.HERMITE_GAUSSIAN else b
    rows = [
        ("preset", cfg.preset, ""),
        ("wavelength", b.wavelength * 1e9, "nm"),
        ("waist w0", b.waist * 1e9, "nm"),
        ("intensity I", b.intensity, "W/m^2"),
        ("plane-wave amplitude E_k00", lg.plane_wave_amplitude, "V/m"),
        ("wavenumber k", lg.k, "1/m"),
        ("Rayleigh range Z_R", lg.rayleigh_range * 1e9, "nm"),
        ("cone angle alpha", bes.cone_angle, "rad"),
        ("k_perp", bes.k_perp, "1/m"),
        ("k_Z", bes.k_z, "1/m"),
        ("Z_max", bes.z_max * 1e9, "nm"),
        ("Q_xx", atom.q_xx, "C m^2"),
        ("Gamma_Q", atom.gamma_q, "1/s"),
        ("delta0", cfg.detuning.delta0, "rad/s"),
        ("delta0/Gamma_Q", cfg.detuning.delta0 / atom.gamma_q, ""),
        ("mass", atom.mass, "kg"),
    ]
    for fam, spec in (("LG", lg), ("Bessel", bes), ("HG", hg)):
        om = rabi_scale(spec, atom)
        rows.append((f"Omega_0 ({fam})", om, "1/s"))
        rows.append((f"Omega_0/Gamma_Q ({fam})", om / atom.gamma_q, ""))
    for name, value, unit in rows:
        val = value if isinstance(value, str) else f"{value:.6g}"
        print(f"{name:<28s} {val} {unit}".rstrip(), file=out)
    return EXIT_OK


def _write_maps(cfg, default_observable, out):
    if cfg.grid is None:
        raise ConfigError("a grid is required", "grid")
    if not cfg.outputs:
        raise ConfigError("no outputs requested (use --out or 'outputs')", "outputs")
    cache = {}
    status = EXIT_OK
    for o in cfg.outputs:
        obs = o.observable or default_observable
        if obs not in cache:
            cache[obs] = sample_grid(cfg.beam, cfg.atom, cfg.grid, obs, cfg.detuning)
            print(f"{cfg.beam.label} {cache[obs].summary()}", file=out)
            if cache[obs].singular_mask.all():
                status = EXIT_NUMERIC
        if o.format == "csv":
            export_csv(cache[obs], o.path)
        else:
            render_heatmap(cache[obs], o.path, o.colormap)
        print(f"wrote {o.path}", file=out)
    return status


def cmd_map(cfg, out=None):
    out = out or sys.stdout
    return _write_maps(cfg, "rabi_sq_rel", out)


def cmd_force(cfg, out=None):
    out = out or sys.stdout
    if cfg.point is None:
        return _write_maps(cfg, "force_magnitude", out)
    s = sample_field(cfg.beam, cfg.atom, cfg.point)
    v = cfg.velocity if cfg.velocity is not None else np.zeros(3)
    fb = optical_force(cfg.atom, cfg.detuning, DynamicState(cfg.point, v), s)
    print(f"position          {_vec(cfg.point)} m", file=out)
    print(f"|Omega|           {abs(s.rabi):.9g} 1/s", file=out)
    print(f"dynamic detuning  {fb.dynamic_detuning:.9g} rad/s", file=out)
    print(f"spontaneous force {_vec(fb.spontaneous)} N", file=out)
    print(f"gradient force    {_vec(fb.gradient)} N", file=out)
    print(f"total force       {_vec(fb.total)} N", file=out)
    return EXIT_OK


def cmd_potential(cfg, out=None):
    out = out or sys.stdout
    if cfg.point is None:
        return _write_maps(cfg, "potential", out)
    s = sample_field(cfg.beam, cfg.atom, cfg.point)
    u = float(trap_potential(cfg.atom, cfg.detuning, s))
    ua = float(trap_potential_approx(cfg.atom, cfg.detuning, s))
    print(f"position            {_vec(cfg.point)} m", file=out)
    print(f"|Omega|/Gamma_Q     {abs(s.rabi) / cfg.atom.gamma_q:.9g}", file=out)
    print(f"potential           {u:.9g} J", file=out)
    print(f"potential (approx.) {ua:.9g} J", file=out)
    return EXIT_OK


def cmd_trajectory(cfg, out=None):
    out = out or sys.stdout
    t = cfg.trajectory
    if t is None:
        raise ConfigError("a trajectory block is required", "trajectory")
    if not cfg.outputs:
        raise ConfigError("no output path (use --out or 'outputs')", "outputs")
    traj = integrate_trajectory(cfg.beam, cfg.atom, cfg.detuning,
                                DynamicState(t.position, t.velocity), t.dt, t.steps, t.conservative)
    path = cfg.outputs[0].path
    write_trajectory_csv(traj, path)
    r = np.hypot(traj.positions[:, 0], traj.positions[:, 1])
    print(f"{cfg.beam.label} trajectory: {len(traj)} states, r in [{r.min():.6g}, {r.max():.6g}] m, "
          f"core offsets={len(traj.core_offsets)}", file=out)
    print(f"wrote {path}", file=out)
    if traj.truncated:
        print(f"truncated: {traj.diagnostic}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


TRAJECTORY_COLUMNS = ("t,x,y,z,vx,vy,vz,fspon_x,fspon_y,fspon_z,fgrad_x,fgrad_y,fgrad_z,"
                      "ftot_x,ftot_y,ftot_z,detuning,core_offset")


def write_trajectory_csv(traj, path):
    offsets = set(traj.core_offsets)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(TRAJECTORY_COLUMNS + "\n")
        for i, (t, r, v, f) in enumerate(zip(traj.times, traj.positions, traj.velocities, traj.forces)):
            vals = [t, *r, *v, *f.spontaneous, *f.gradient, *f.total, f.dynamic_detuning]
            fh.write(",".join(f"{x:.12g}" for x in vals) + f",{'true' if i in offsets else 'false'}\n")


def _vec(v):
    return "(" + ", ".join(f"{x:.9g}" for x in v) + ")"


# -- parser --------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="quadbeam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--preset", help=f"parameter preset ({', '.join(PRESETS)})")
    common.add_argument("--beam", help="mode, e.g. lg:l=1,p=0 | bessel:m=10,cone_angle=0.2rad | hg:n=2,m=0")
    common.add_argument("--intensity", help="beam intensity, e.g. 4e9W/m2")
    common.add_argument("--delta0", help="static detuning, e.g. 1000gamma or -7.8e8rad/s")
    common.add_argument("--dump-config", action="store_true",
                        help="print the resolved configuration as JSON and exit")
    common.add_argument("-v", "--verbose", action="store_true")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid", help="x0:x1:nx,y0:y1:ny (units allowed, e.g. -3w0) or default[:N]")
    grid.add_argument("--z-plane", dest="z_plane", help="Z of the grid plane")
    grid.add_argument("--observable", help="quantity to map")
    grid.add_argument("--out", help="output file")
    grid.add_argument("--format", choices=("csv", "ppm"))
    grid.add_argument("--colormap", help="PPM colormap (gray, inferno, viridis)")

    sub.add_parser("params", parents=[common], help="print derived quantities of a preset")
    sub.add_parser("map", parents=[common, grid], help="sample an observable on a grid")
    for name, helptext in (("force", "optical force at a point or on a grid"),
                           ("potential", "trapping potential at a point or on a grid")):
        p = sub.add_parser(name, parents=[common, grid], help=helptext)
        p.add_argument("--point", help="X,Y,Z of a single point")
        p.add_argument("--velocity", help="VX,VY,VZ [m/s]")
    p = sub.add_parser("trajectory", parents=[common], help="integrate an atom trajectory")
    p.add_argument("--position", help="initial X,Y,Z")
    p.add_argument("--velocity", help="initial VX,VY,VZ [m/s]")
    p.add_argument("--dt", help="time step, e.g. 10ns")
    p.add_argument("--steps", type=int)
    p.add_argument("--conservative", action="store_true",
                   help="drop the spontaneous force and evaluate the gradient force at V = 0")
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--format", choices=("csv",))
    return parser


COMMANDS = {"params": cmd_params, "map": cmd_map, "force": cmd_force,
            "potential": cmd_potential, "trajectory": cmd_trajectory}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        cfg = resolve_config(_raw_config(args))
        if args.dump_config:
            print(json.dumps(config_to_dict(cfg), indent=2))
            return EXIT_OK
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, SingularInputError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
