"""Optical forces, trapping potentials and centre-of-mass trajectories.

Sign conventions: ``delta0 = omega - omega_0`` (red detuning is negative).
The conservative force is ``-hbar Delta grad|Omega|^2 / (Delta^2 + 2|Omega|^2 + Gamma^2)``
and the potential is the one whose negative gradient reproduces it at
``V = 0``::

    U = (hbar delta0 / 2) ln(1 + 2|Omega|^2 / (delta0^2 + Gamma^2))  ~  hbar |Omega|^2 / delta0

so a red-detuned beam traps at high ``|Omega|^2``.
"""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import constants as const
from ._pointwise import sample_point
from .beams import Family, evaluate_field
from .exceptions import DomainError, SingularInputError, SingularPhaseError

logger = logging.getLogger(__name__)

CORE_OFFSET = 1e-9   # in waists


@dataclass(frozen=True)
class DetuningSpec:
    """Static detuning ``delta0 = omega - omega_0`` [rad/s]."""

    delta0: float

    def __post_init__(self):
        if not np.isfinite(self.delta0):
            raise ValueError("delta0 must be finite")


@dataclass
class DynamicState:
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise ValueError("state components must be finite")


@dataclass
class ForceBreakdown:
    spontaneous: np.ndarray
    gradient: np.ndarray
    total: np.ndarray
    dynamic_detuning: float


def doppler_shift(state, sample):
    """Doppler term ``-V . grad(theta)`` [rad/s]."""
    if sample.phase_singular or not np.all(np.isfinite(sample.phase_gradient)):
        raise SingularPhaseError(
            "phase gradient undefined on the vortex axis; offset the atom from the core")
    return -float(np.dot(state.velocity, sample.phase_gradient))


def dynamic_detuning(det, state, sample):
    """``Delta = delta0 - V . grad(theta)`` [rad/s]."""
    return det.delta0 + doppler_shift(state, sample)


def _denominator(atom, delta, rabi_sq):
    return delta * delta + 2.0 * rabi_sq + atom.gamma_q ** 2


def spontaneous_force(atom, det, state, sample):
    """Dissipative force along the phase gradient [N]."""
    delta = dynamic_detuning(det, state, sample)
    rs = sample.rabi_sq
    return 2.0 * const.hbar * atom.gamma_q * rs * sample.phase_gradient / _denominator(atom, delta, rs)


def gradient_force(atom, det, state, sample):
    """Conservative force along ``grad |Omega|^2`` [N]."""
    if np.all(state.velocity == 0.0):
        delta = det.delta0
    else:
        delta = dynamic_detuning(det, state, sample)
    rs = sample.rabi_sq
    return -const.hbar * delta * np.asarray(sample.rabi_sq_gradient) / _denominator(atom, delta, rs)


def optical_force(atom, det, state, sample):
    """Spontaneous and gradient forces and their sum."""
    delta = dynamic_detuning(det, state, sample)
    spon = spontaneous_force(atom, det, state, sample)
    grad = gradient_force(atom, det, state, sample)
    return ForceBreakdown(spon, grad, spon + grad, delta)


def trap_potential(atom, det, sample):
    """Quadrupole trapping potential [J].

    ``(hbar delta0 / 2) ln(1 + 2|Omega|^2 / (delta0^2 + Gamma^2))``; accepts a
    :class:`FieldSample` or an array of ``|Omega|^2`` values.
    """
    rs = _rabi_sq(sample)
    d0 = det.delta0
    return 0.5 * const.hbar * d0 * np.log1p(2.0 * rs / (d0 * d0 + atom.gamma_q ** 2))


def trap_potential_approx(atom, det, sample):
    """Large-detuning potential ``hbar |Omega|^2 / delta0`` [J].

    Warns when ``|delta0|`` is within a factor 10 of ``|Omega|`` or ``Gamma_Q``.
    """
    rs = _rabi_sq(sample)
    d0 = det.delta0
    if d0 == 0.0:
        raise SingularInputError("large-detuning approximation undefined at delta0 = 0")
    if abs(d0) < 10.0 * atom.gamma_q or abs(d0) < 10.0 * np.sqrt(np.max(rs)):
        warnings.warn("large-detuning approximation used outside |delta0| >> |Omega|, Gamma_Q",
                      RuntimeWarning, stacklevel=2)
    return const.hbar * rs / d0


def _rabi_sq(sample):
    if hasattr(sample, "rabi_sq"):
        return np.asarray(sample.rabi_sq, dtype=float)
    return np.asarray(sample, dtype=float)


# -- trajectories ------------------------------------------------------------------

@dataclass
class Trajectory:
    """Integrated states with per-step forces.

    ``core_offsets`` lists step indices at which an evaluation point sat on a
    vortex axis and was shifted by ``1e-9 w0``. ``diagnostic`` is set when the
    run was truncated.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    forces: list
    core_offsets: list = field(default_factory=list)
    truncated: bool = False
    diagnostic: str = ""

    @property
    def states(self):
        return [DynamicState(p, v) for p, v in zip(self.positions, self.velocities)]

    def __len__(self):
        return len(self.times)


class _ForceModel:
    def __init__(self, spec, atom, det, conservative):
        self.spec, self.atom, self.det = spec, atom, det
        self.conservative = conservative
        self.offset = CORE_OFFSET * spec.waist
        self.hit_core = False

    def sample(self, position):
        if self.spec.family is not Family.HERMITE_GAUSSIAN and self.spec.winding != 0:
            if position[0] == 0.0 and position[1] == 0.0:
                position = position + np.array([self.offset, 0.0, 0.0])
                self.hit_core = True
        return sample_point(self.spec, self.atom, *position)

    def breakdown(self, position, velocity):
        s = self.sample(position)
        if self.conservative:
            still = DynamicState(position, np.zeros(3))
            grad = gradient_force(self.atom, self.det, still, s)
            return ForceBreakdown(np.zeros(3), grad, grad, self.det.delta0)
        return optical_force(self.atom, self.det, DynamicState(position, velocity), s)

    def accel(self, position, velocity):
        return self.checked(position, velocity).total / self.atom.mass

    def checked(self, position, velocity):
        fb = self.breakdown(position, velocity)
        if not np.all(np.isfinite(fb.total)):
            raise FloatingPointError("non-finite force")
        return fb


def integrate_trajectory(spec, atom, det, initial, dt, steps, conservative=False):
    """Fixed-step RK4 integration of ``M dV/dt = F(R, V)``.

    With ``conservative=True`` the spontaneous force is dropped and the
    gradient force is evaluated at ``V = 0``, so ``M V^2 / 2 + U`` is a
    constant of motion. Failures truncate the trajectory and set
    ``diagnostic`` instead of raising.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    model = _ForceModel(spec, atom, det, conservative)
    r = np.array(initial.position, dtype=float)
    v = np.array(initial.velocity, dtype=float)
    times, pos, vel, forces, offsets = [0.0], [r.copy()], [v.copy()], [], []
    truncated, diagnostic = False, ""
    try:
        fb = model.checked(r, v)
    except (DomainError, SingularInputError, FloatingPointError) as exc:
        return Trajectory(np.array(times), np.array(pos), np.array(vel), [], [], True, f"step 0: {exc}")
    forces.append(fb)
    if model.hit_core:
        offsets.append(0)
    for i in range(1, steps + 1):
        model.hit_core = False
        try:
            k1r, k1v = v, fb.total / atom.mass
            k2r = v + 0.5 * dt * k1v
            k2v = model.accel(r + 0.5 * dt * k1r, k2r)
            k3r = v + 0.5 * dt * k2v
            k3v = model.accel(r + 0.5 * dt * k2r, k3r)
            k4r = v + dt * k3v
            k4v = model.accel(r + dt * k3r, k4r)
            r = r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
            v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
                raise FloatingPointError("non-finite state")
            fb = model.checked(r, v)
        except (DomainError, SingularInputError, FloatingPointError) as exc:
            truncated = True
            diagnostic = f"step {i}: {exc}"
            logger.warning("trajectory truncated at %s", diagnostic)
            break
        if model.hit_core:
            offsets.append(i)
        times.append(i * dt)
        pos.append(r.copy())
        vel.append(v.copy())
        forces.append(fb)
    return Trajectory(np.array(times), np.array(pos), np.array(vel), forces, offsets,
                      truncated, diagnostic)


def mechanical_energy(spec, atom, det, trajectory):
    """``M V^2 / 2 + U`` along a trajectory [J]."""
    fa = evaluate_field(spec, atom, trajectory.positions)
    kinetic = 0.5 * atom.mass * np.sum(trajectory.velocities ** 2, axis=1)
    return kinetic + trap_potential(atom, det, fa.rabi_sq)
