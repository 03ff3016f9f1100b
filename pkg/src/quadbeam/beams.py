"""Mode fields and quadrupole Rabi frequencies of LG, Bessel and HG beams.

For an x-polarized field ``E_x = psi(R)``, the quadrupole Rabi frequency is

    Omega(R) = exp(-i theta(R)) / hbar * (Q_xx d_X psi + Q_xy d_Y psi + Q_xz d_Z psi)

(the Bessel ``Q_xz`` coupling uses its own axial coefficient instead of
``d_Z psi``). Writing the quotients ``(1/L) dL/dX``, ``(1/J) dJ/dX`` and
``(1/H) dH/dX`` out as derivatives of the full field removes every division
by a polynomial or Bessel function, so evaluation is finite at their zeros.
The azimuthal factor ``r**|l| exp(i l phi)`` is carried as the polynomial
``(x + i sgn(l) y)**|l|``, which is regular on the vortex axis.

All kernels evaluate the field Hessian as well, so ``grad |Omega|**2`` is
returned in closed form.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from math import lgamma

import numpy as np

from . import constants as const
from ._validation import check_integer, check_order, check_positions, check_positive
from .exceptions import DomainError, SingularInputError
from .specfun import MAX_ORDER, _hermite_value, _laguerre_value, bessel_j_scaled

# exp(-t/2) underflows to zero beyond this scaled radius squared
_FAR_FIELD_T = 1400.0


class Family(str, Enum):
    LAGUERRE_GAUSSIAN = "lg"
    BESSEL = "bessel"
    HERMITE_GAUSSIAN = "hg"


@dataclass(frozen=True)
class BeamSpec:
    """One optical mode and its geometric and optical parameters (SI units).

    Use the :meth:`laguerre_gaussian`, :meth:`bessel` and
    :meth:`hermite_gaussian` constructors rather than filling every field.

    ``lg_full_phase`` switches the LG phase from ``s k Z + l phi`` to the form
    with Gouy and wavefront-curvature terms. ``bessel_sigma_sign`` selects the
    sign of the ``2Z/Z_max**2`` term in the Bessel axial coefficient.
    """

    family: Family
    wavelength: float
    waist: float
    intensity: float
    propagation_sign: int = 1
    lg_l: int = 0
    lg_p: int = 0
    lg_full_phase: bool = False
    bessel_m: int = 0
    cone_angle: float = 0.0
    z_max: float = 0.0
    bessel_sigma_sign: int = 1
    hg_n: int = 0
    hg_m: int = 0
    refractive_index: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        check_positive(self.wavelength, "wavelength")
        check_positive(self.waist, "waist")
        check_positive(self.intensity, "intensity")
        check_positive(self.refractive_index, "refractive_index")
        if self.propagation_sign not in (1, -1):
            raise ValueError("propagation_sign must be +1 or -1")
        if self.family is Family.LAGUERRE_GAUSSIAN:
            check_integer(self.lg_l, "lg_l")
            check_order(self.lg_p, "lg_p", MAX_ORDER)
        elif self.family is Family.BESSEL:
            check_order(self.bessel_m, "bessel_m", MAX_ORDER)
            if not 0.0 < self.cone_angle < np.pi / 2:
                raise ValueError("cone_angle must lie in (0, pi/2)")
            check_positive(self.z_max, "z_max")
            if self.bessel_sigma_sign not in (1, -1):
                raise ValueError("bessel_sigma_sign must be +1 or -1")
        else:
            check_order(self.hg_n, "hg_n", MAX_ORDER)
            check_order(self.hg_m, "hg_m", MAX_ORDER)

    @classmethod
    def laguerre_gaussian(cls, l, p=0, *, wavelength, waist, intensity, **kw):
        return cls(Family.LAGUERRE_GAUSSIAN, wavelength, waist, intensity, lg_l=l, lg_p=p, **kw)

    @classmethod
    def bessel(cls, m, cone_angle, z_max=None, *, wavelength, waist, intensity, **kw):
        """Bessel mode; ``z_max`` defaults to the axicon overlap length ``w0 / tan(alpha)``."""
        if z_max is None:
            if not 0.0 < cone_angle < np.pi / 2:
                raise ValueError("cone_angle must lie in (0, pi/2)")
            z_max = waist / np.tan(cone_angle)
        return cls(Family.BESSEL, wavelength, waist, intensity, bessel_m=m,
                   cone_angle=cone_angle, z_max=z_max, **kw)

    @classmethod
    def hermite_gaussian(cls, n, m=0, *, wavelength, waist, intensity, **kw):
        return cls(Family.HERMITE_GAUSSIAN, wavelength, waist, intensity, hg_n=n, hg_m=m, **kw)

    def replace(self, **changes):
        return replace(self, **changes)

    @property
    def k0(self):
        return 2.0 * np.pi / self.wavelength

    @property
    def k(self):
        """Axial wavenumber: ``k_Z`` for Bessel, ``2 pi eta / lambda`` otherwise."""
        if self.family is Family.BESSEL:
            return self.k_z
        return 2.0 * np.pi * self.refractive_index / self.wavelength

    @property
    def rayleigh_range(self):
        return 0.5 * self.k * self.waist ** 2

    @property
    def k_perp(self):
        return self.k0 * np.sin(self.cone_angle)

    @property
    def k_z(self):
        return self.k0 * np.cos(self.cone_angle)

    @property
    def plane_wave_amplitude(self):
        """``sqrt(2 I / (eta**2 eps0 c))`` [V/m]; ``eta = 1`` except for HG."""
        eta = self.refractive_index if self.family is Family.HERMITE_GAUSSIAN else 1.0
        return np.sqrt(2.0 * self.intensity / (eta ** 2 * const.epsilon_0 * const.c))

    @property
    def winding(self):
        if self.family is Family.LAGUERRE_GAUSSIAN:
            return self.lg_l
        if self.family is Family.BESSEL:
            return self.bessel_m
        return 0

    @property
    def label(self):
        if self.family is Family.LAGUERRE_GAUSSIAN:
            return f"LG(l={self.lg_l}, p={self.lg_p})"
        if self.family is Family.BESSEL:
            return f"Bessel(m={self.bessel_m}, alpha={self.cone_angle:g})"
        return f"HG(n={self.hg_n}, m={self.hg_m})"


@dataclass(frozen=True)
class AtomSpec:
    """Two-level atom with a quadrupole-allowed transition.

    ``q_xx``, ``q_xy``, ``q_xz`` are quadrupole matrix elements [C m^2];
    ``gamma_q`` is the quadrupole decay rate [1/s].
    """

    q_xx: float
    gamma_q: float
    transition_wavelength: float
    mass: float
    q_xy: float = 0.0
    q_xz: float = 0.0

    def __post_init__(self):
        check_positive(self.gamma_q, "gamma_q")
        check_positive(self.transition_wavelength, "transition_wavelength")
        check_positive(self.mass, "mass")
        for name in ("q_xx", "q_xy", "q_xz"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def omega0(self):
        return 2.0 * np.pi * const.c / self.transition_wavelength

    @property
    def quadrupole(self):
        return np.array([self.q_xx, self.q_xy, self.q_xz])

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Preset:
    """Named parameter set: atom, default beam geometry and static detuning."""

    name: str
    atom: AtomSpec
    wavelength: float
    waist: float
    intensity: float
    delta0: float
    cone_angle: float
    description: str = ""

    def beam(self, family, **kw):
        """Build a :class:`BeamSpec` of ``family`` with this preset's geometry."""
        family = Family(family)
        base = dict(wavelength=self.wavelength, waist=self.waist, intensity=self.intensity)
        base.update({k: kw.pop(k) for k in list(kw) if k in base})
        if family is Family.LAGUERRE_GAUSSIAN:
            return BeamSpec.laguerre_gaussian(kw.pop("l", 1), kw.pop("p", 0), **base, **kw)
        if family is Family.BESSEL:
            return BeamSpec.bessel(kw.pop("m", 0), kw.pop("cone_angle", self.cone_angle),
                                   kw.pop("z_max", None), **base, **kw)
        return BeamSpec.hermite_gaussian(kw.pop("n", 0), kw.pop("m", 0), **base, **kw)


def _cs_preset():
    gamma = 7.8e5
    lam = 675e-9
    atom = AtomSpec(q_xx=10.0 * const.e * const.a0 ** 2, gamma_q=gamma,
                    transition_wavelength=lam, mass=const.CS_MASS)
    return Preset("cs-6s-5d", atom, wavelength=lam, waist=lam / 2, intensity=1e9,
                  delta0=1e3 * gamma, cone_angle=0.2,
                  description="Cs 6S1/2 -> 5D5/2 quadrupole transition")


PRESETS = {"cs-6s-5d": _cs_preset()}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None


# -- result types -------------------------------------------------------------

@dataclass
class FieldArrays:
    """Vectorized field quantities; leading shape follows the input positions."""

    rabi: np.ndarray
    phase: np.ndarray
    phase_gradient: np.ndarray      # (..., 3), NaN where singular
    rabi_sq: np.ndarray
    rabi_sq_gradient: np.ndarray    # (..., 3)
    phase_singular: np.ndarray


@dataclass
class FieldSample:
    """Rabi frequency, phase and gradients at a single point."""

    rabi: complex
    phase: float
    phase_gradient: np.ndarray
    rabi_sq_gradient: np.ndarray
    gradient_method: str = "analytic"
    phase_singular: bool = False

    @property
    def rabi_sq(self):
        return abs(self.rabi) ** 2


@dataclass
class PhaseResult:
    phase: "float | np.ndarray"
    gradient: np.ndarray
    singular: "bool | np.ndarray" = field(default=False)


# -- shared kernels -------------------------------------------------------------

def _ipow(w, n):
    out = np.ones_like(w)
    for _ in range(n):
        out = out * w
    return out


def _vortex_field(n, sgn, x, y, G, Gt, Gtt, GZ, GZZ, GtZ):
    """psi = (x + i sgn y)**n * G(t, Z), t = x**2 + y**2, with first and second derivatives.

    Transverse derivatives are with respect to the scaled x, y; axial ones
    with respect to Z. Returns ``(psi, [dx, dy, dZ], {pair: d2})``.
    """
    w = x + 1j * sgn * y
    if n == 0:
        W = np.ones_like(w)
        Wx = np.zeros_like(w)
        Wxx = np.zeros_like(w)
    else:
        wn1 = _ipow(w, n - 1)
        W = wn1 * w
        Wx = n * wn1
        Wxx = n * (n - 1) * _ipow(w, n - 2) if n >= 2 else np.zeros_like(w)
    Wy = 1j * sgn * Wx
    Wxy = 1j * sgn * Wxx
    Wyy = -Wxx

    Gx, Gy = 2 * x * Gt, 2 * y * Gt
    Gxx = 2 * Gt + 4 * x * x * Gtt
    Gyy = 2 * Gt + 4 * y * y * Gtt
    Gxy = 4 * x * y * Gtt
    GxZ, GyZ = 2 * x * GtZ, 2 * y * GtZ

    psi = W * G
    grad = [Wx * G + W * Gx, Wy * G + W * Gy, W * GZ]
    hess = {
        "xx": Wxx * G + 2 * Wx * Gx + W * Gxx,
        "xy": Wxy * G + Wx * Gy + Wy * Gx + W * Gxy,
        "yy": Wyy * G + 2 * Wy * Gy + W * Gyy,
        "xz": Wx * GZ + W * GxZ,
        "yz": Wy * GZ + W * GyZ,
        "zz": W * GZZ,
    }
    return psi, grad, hess


def _scale_derivs(grad, hess, length):
    """Convert transverse derivatives from scaled to physical coordinates."""
    g = [grad[0] / length, grad[1] / length, grad[2]]
    h = {
        "xx": hess["xx"] / length ** 2, "xy": hess["xy"] / length ** 2,
        "yy": hess["yy"] / length ** 2, "xz": hess["xz"] / length,
        "yz": hess["yz"] / length, "zz": hess["zz"],
    }
    return g, h


def _hess_row(hess, i):
    keys = (("xx", "xy", "xz"), ("xy", "yy", "yz"), ("xz", "yz", "zz"))[i]
    return [hess[k] for k in keys]


def _coupling(atom, grad, hess):
    """S = sum_j Q_j d_j psi and its gradient."""
    q = atom.quadrupole
    S = q[0] * grad[0] + q[1] * grad[1] + q[2] * grad[2]
    dS = [q[0] * hess_i[0] + q[1] * hess_i[1] + q[2] * hess_i[2]
          for hess_i in (_hess_row(hess, 0), _hess_row(hess, 1), _hess_row(hess, 2))]
    return S, dS


def _finish(S, dS, theta, phase_grad, singular):
    rabi = S * np.exp(-1j * theta) / const.hbar
    rabi_sq = (S.real ** 2 + S.imag ** 2) / const.hbar ** 2
    grad_sq = np.stack([2.0 * np.real(np.conj(S) * d) for d in dS], axis=-1) / const.hbar ** 2
    pg = np.stack(phase_grad, axis=-1)
    pg[..., :2] = np.where(singular[..., None], np.nan, pg[..., :2])  # axial component stays defined
    return FieldArrays(rabi, theta, pg, rabi_sq, grad_sq, singular)


def _azimuthal(l, X, Y):
    r2 = X * X + Y * Y
    singular = (r2 == 0.0) & (l != 0)
    safe = np.where(r2 == 0.0, 1.0, r2)
    gx = np.where(r2 == 0.0, 0.0, -l * Y / safe)
    gy = np.where(r2 == 0.0, 0.0, l * X / safe)
    return np.arctan2(Y, X), gx, gy, singular


# -- Laguerre-Gaussian ------------------------------------------------------------

def _lg_phase_parts(spec, X, Y, Z):
    """Non-azimuthal phase and its derivatives in scaled t = 2 r^2 / w0^2."""
    s, k, zr = spec.propagation_sign, spec.k, spec.rayleigh_range
    n, p = abs(spec.lg_l), spec.lg_p
    w0 = spec.waist
    if not spec.lg_full_phase:
        zero = np.zeros_like(Z)
        return s * k * Z, zero, s * k + zero, zero, zero, zero
    D = zr * zr + Z * Z
    r2 = X * X + Y * Y
    gouy = (2 * p + n + 1)
    theta = s * k * Z - s * gouy * np.arctan2(Z, zr) + s * k * r2 * Z / (2.0 * D)
    c = s * k * w0 * w0 / 4.0      # r^2 = t w0^2 / 2
    th_t = c * Z / D
    th_Z = s * k - s * gouy * zr / D + s * k * r2 * (zr * zr - Z * Z) / (2.0 * D * D)
    th_tZ = c * (zr * zr - Z * Z) / (D * D)
    th_ZZ = (s * gouy * 2.0 * zr * Z / (D * D)
             + s * k * r2 * Z * (Z * Z - 3.0 * zr * zr) / D ** 3)
    return theta, th_t, th_Z, th_tZ, th_ZZ, c


def lg_amplitude(spec, r):
    """Radial amplitude ``u_p^{|l|}(r)`` of an LG mode [V/m]."""
    _require(spec, Family.LAGUERRE_GAUSSIAN)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    n, p = abs(spec.lg_l), spec.lg_p
    t = 2.0 * r * r / spec.waist ** 2
    far = t > _FAR_FIELD_T
    t = np.where(far, 0.0, t)
    norm = np.exp(0.5 * (lgamma(p + 1) - lgamma(n + p + 1)))
    u = spec.plane_wave_amplitude * norm * np.sqrt(t) ** n * _laguerre_value(p, n, t) * np.exp(-0.5 * t)
    u = np.where(far, 0.0, u)
    return float(u) if u.ndim == 0 else u


def _lg_arrays(spec, atom, X, Y, Z):
    l, p = spec.lg_l, spec.lg_p
    n = abs(l)
    sgn = 1 if l >= 0 else -1
    length = spec.waist / np.sqrt(2.0)
    x, y = X / length, Y / length
    t = x * x + y * y
    far = t > _FAR_FIELD_T
    t = np.where(far, 0.0, t)
    x, y = np.where(far, 0.0, x), np.where(far, 0.0, y)

    L = _laguerre_value(p, n, t)
    L1 = -_laguerre_value(p - 1, n + 1, t)
    L2 = _laguerre_value(p - 2, n + 2, t)

    theta_r, th_t, th_Z, th_tZ, th_ZZ, _ = _lg_phase_parts(spec, X, Y, Z)
    h_t = -0.5 + 1j * th_t
    h_Z = 1j * th_Z
    h_tZ = 1j * th_tZ
    h_ZZ = 1j * th_ZZ
    E = np.exp(-0.5 * t + 1j * theta_r)
    G = L * E
    Gt = (L1 + L * h_t) * E
    Gtt = (L2 + 2 * L1 * h_t + L * h_t * h_t) * E
    GZ = L * h_Z * E
    GZZ = L * (h_ZZ + h_Z * h_Z) * E
    GtZ = (L1 * h_Z + L * (h_tZ + h_t * h_Z)) * E

    _, grad, hess = _vortex_field(n, sgn, x, y, G, Gt, Gtt, GZ, GZZ, GtZ)
    grad, hess = _scale_derivs(grad, hess, length)
    amp = spec.plane_wave_amplitude * np.exp(0.5 * (lgamma(p + 1) - lgamma(n + p + 1)))
    grad = [amp * g for g in grad]
    hess = {key: amp * v for key, v in hess.items()}
    S, dS = _coupling(atom, grad, hess)
    S = np.where(far, 0.0, S)
    dS = [np.where(far, 0.0, d) for d in dS]

    phi, gx, gy, singular = _azimuthal(l, X, Y)
    theta = l * phi + theta_r
    pg = _lg_phase_gradient(spec, X, Y, Z, gx, gy)
    return _finish(S, dS, theta, pg, singular)


def _lg_phase_gradient(spec, X, Y, Z, gx, gy):
    s, k = spec.propagation_sign, spec.k
    if not spec.lg_full_phase:
        return [gx, gy, s * k + np.zeros_like(Z)]
    zr = spec.rayleigh_range
    D = zr * zr + Z * Z
    _, _, th_Z, _, _, _ = _lg_phase_parts(spec, X, Y, Z)
    curv = s * k * Z / D
    return [gx + curv * X, gy + curv * Y, th_Z]


def lg_phase(spec, position):
    """Optical phase of an LG mode and its Cartesian gradient.

    ``position`` is Cartesian ``(X, Y, Z)`` (see :func:`cylindrical`). On the
    axis of a vortex (``r = 0``, ``l != 0``) the gradient is NaN and
    ``singular`` is set.
    """
    _require(spec, Family.LAGUERRE_GAUSSIAN)
    X, Y, Z, lead = _split(position)
    phi, gx, gy, singular = _azimuthal(spec.lg_l, X, Y)
    theta_r = _lg_phase_parts(spec, X, Y, Z)[0]
    pg = np.stack(_lg_phase_gradient(spec, X, Y, Z, gx, gy), axis=-1)
    pg[..., :2] = np.where(singular[..., None], np.nan, pg[..., :2])  # axial component stays defined
    return _phase_result(spec.lg_l * phi + theta_r, pg, singular, lead)


def lg_rabi(spec, atom, position):
    """Complex quadrupole Rabi frequency of an LG mode [1/s]."""
    _require(spec, Family.LAGUERRE_GAUSSIAN)
    return _rabi_only(_lg_arrays, spec, atom, position)


# -- Bessel ---------------------------------------------------------------------------

def _bessel_axial(spec, Z):
    m, zmax, kz = spec.bessel_m, spec.z_max, spec.k_z
    nu = m + 0.5
    env = (Z / zmax) ** nu * np.exp(-2.0 * Z * Z / zmax ** 2)
    Phi = env * np.exp(1j * kz * Z)
    rho = nu / Z - 4.0 * Z / zmax ** 2 + 1j * kz
    drho = -nu / Z ** 2 - 4.0 / zmax ** 2
    return Phi, Phi * rho, Phi * (rho * rho + drho)


def _bessel_sigma(spec, Z):
    """Axial coupling coefficient and its Z derivative."""
    m, zmax = spec.bessel_m, spec.z_max
    sg = spec.bessel_sigma_sign
    sigma = (2 * m + 1) / (2.0 * Z) + sg * 2.0 * Z / zmax ** 2 + 1j * spec.k_z
    dsigma = -(2 * m + 1) / (2.0 * Z * Z) + sg * 2.0 / zmax ** 2
    return sigma, dsigma


def _check_bessel_z(spec, atom, Z):
    if np.any(Z == 0.0) and atom is not None and atom.q_xz != 0.0:
        raise SingularInputError("Bessel Q_xz coupling is singular at Z = 0")
    if np.any(Z <= 0.0):
        raise DomainError("Bessel axial envelope (Z/Z_max)**(m+1/2) requires Z > 0")


def bessel_prefactor(spec):
    """``sqrt(8 pi^2 k_perp^2 w0^2 I / (eps0 c))``, the Bessel amplitude scale [V/m]."""
    _require(spec, Family.BESSEL)
    return np.sqrt(8.0 * np.pi ** 2 * spec.k_perp ** 2 * spec.waist ** 2 * spec.intensity
                   / (const.epsilon_0 * const.c))


def bessel_amplitude(spec, r, Z):
    """Bessel amplitude ``g_m(r)`` at axial position ``Z > 0`` [V/m]."""
    _require(spec, Family.BESSEL)
    r, Z = np.broadcast_arrays(np.asarray(r, float), np.asarray(Z, float))
    _check_bessel_z(spec, None, Z)
    m = spec.bessel_m
    kr = spec.k_perp * r
    env = (Z / spec.z_max) ** (m + 0.5) * np.exp(-2.0 * Z * Z / spec.z_max ** 2)
    g = bessel_prefactor(spec) * env * bessel_j_scaled(m, kr) * kr ** m
    return float(g) if g.ndim == 0 else g


def _bessel_arrays(spec, atom, X, Y, Z):
    _check_bessel_z(spec, atom, Z)
    m = spec.bessel_m
    kp = spec.k_perp
    length = 1.0 / kp
    x, y = X * kp, Y * kp
    t = x * x + y * y
    rt = np.sqrt(t)
    b0 = bessel_j_scaled(m, rt)
    b1 = bessel_j_scaled(m + 1, rt)
    b2 = bessel_j_scaled(m + 2, rt)
    Phi, dPhi, ddPhi = _bessel_axial(spec, Z)
    G = b0 * Phi
    Gt = -0.5 * b1 * Phi
    Gtt = 0.25 * b2 * Phi
    GZ = b0 * dPhi
    GZZ = b0 * ddPhi
    GtZ = -0.5 * b1 * dPhi
    psi, grad, hess = _vortex_field(m, 1, x, y, G, Gt, Gtt, GZ, GZZ, GtZ)
    grad, hess = _scale_derivs(grad, hess, length)
    pref = bessel_prefactor(spec)
    psi = pref * psi
    grad = [pref * g for g in grad]
    hess = {key: pref * v for key, v in hess.items()}

    q = atom.quadrupole
    sigma, dsigma = _bessel_sigma(spec, Z)
    S = q[0] * grad[0] + q[1] * grad[1] + q[2] * sigma * psi
    dS = []
    for i, row in enumerate((_hess_row(hess, 0), _hess_row(hess, 1), _hess_row(hess, 2))):
        d = q[0] * row[0] + q[1] * row[1] + q[2] * sigma * grad[i]
        if i == 2:
            d = d + q[2] * dsigma * psi
        dS.append(d)

    phi, gx, gy, singular = _azimuthal(m, X, Y)
    theta = spec.k_z * Z + m * phi
    return _finish(S, dS, theta, [gx, gy, spec.k_z + np.zeros_like(Z)], singular)


def bessel_phase(spec, position):
    """Phase ``k_Z Z + m phi`` of a Bessel mode and its Cartesian gradient."""
    _require(spec, Family.BESSEL)
    X, Y, Z, lead = _split(position)
    phi, gx, gy, singular = _azimuthal(spec.bessel_m, X, Y)
    pg = np.stack([gx, gy, spec.k_z + np.zeros_like(Z)], axis=-1)
    pg[..., :2] = np.where(singular[..., None], np.nan, pg[..., :2])  # axial component stays defined
    return _phase_result(spec.k_z * Z + spec.bessel_m * phi, pg, singular, lead)


def bessel_rabi(spec, atom, position):
    """Complex quadrupole Rabi frequency of a Bessel mode [1/s]; requires ``Z > 0``."""
    _require(spec, Family.BESSEL)
    return _rabi_only(_bessel_arrays, spec, atom, position)


# -- Hermite-Gaussian --------------------------------------------------------------

def hg_normalization(n, m):
    """``C_nm = sqrt(2 / (2**(n+m) n! m! pi))``."""
    return np.sqrt(2.0 / (2.0 ** (n + m) * np.exp(lgamma(n + 1) + lgamma(m + 1)) * np.pi))


def hg_beam_radius(spec, Z):
    """``w(Z) = w0 sqrt(1 + Z**2 / Z_R**2)``."""
    return spec.waist * np.sqrt(1.0 + (np.asarray(Z, float) / spec.rayleigh_range) ** 2)


def _hg_axis(order, X, a, da, dda, c, dc, ddc):
    """f = H(aX) exp(-c X^2) and its X/Z derivatives (Z enters via a(Z), c(Z))."""
    xi = a * X
    H = _hermite_value(order, xi)
    H1 = 2.0 * order * _hermite_value(order - 1, xi)
    H2 = 4.0 * order * (order - 1) * _hermite_value(order - 2, xi)
    E = np.exp(-c * X * X)
    X2, X3 = X * X, X * X * X
    f = H * E
    fX = (a * H1 - 2 * c * X * H) * E
    fXX = (a * a * H2 - 4 * a * c * X * H1 - 2 * c * H + 4 * c * c * X2 * H) * E
    fZ = (da * X * H1 - dc * X2 * H) * E
    fZZ = (dda * X * H1 + da * da * X2 * H2 - ddc * X2 * H
           - 2 * da * dc * X3 * H1 + dc * dc * X2 * X2 * H) * E
    fXZ = (da * H1 + a * da * X * H2 - 2 * dc * X * H - 2 * da * c * X2 * H1
           - a * dc * X2 * H1 + 2 * c * dc * X3 * H) * E
    return f, fX, fXX, fZ, fZZ, fXZ


def _hg_phase_terms(spec, Z):
    zr, k = spec.rayleigh_range, spec.k
    order = spec.hg_n + spec.hg_m + 1
    D = zr * zr + Z * Z
    theta = order * np.arctan2(Z, zr) + k * Z
    dtheta = k + order * zr / D
    ddtheta = -2.0 * order * zr * Z / (D * D)
    return theta, dtheta, ddtheta


def _hg_arrays(spec, atom, X, Y, Z):
    n, m = spec.hg_n, spec.hg_m
    zr, k, w0 = spec.rayleigh_range, spec.k, spec.waist
    D = zr * zr + Z * Z
    w = hg_beam_radius(spec, Z)
    a = np.sqrt(2.0) / w
    da = -a * Z / D
    dda = a * (2 * Z * Z - zr * zr) / (D * D)
    c = zr * zr / (w0 * w0 * D) + 1j * k * Z / (2.0 * D)
    dc = -2.0 * zr * zr * Z / (w0 * w0 * D * D) + 1j * k * (zr * zr - Z * Z) / (2.0 * D * D)
    ddc = (-2.0 * zr * zr * (zr * zr - 3 * Z * Z) / (w0 * w0 * D ** 3)
           + 1j * k * Z * (Z * Z - 3 * zr * zr) / D ** 3)

    far = 0.5 * ((a * X) ** 2 + (a * Y) ** 2) > 0.5 * _FAR_FIELD_T
    Xs, Ys = np.where(far, 0.0, X), np.where(far, 0.0, Y)
    f, fX, fXX, fZx, fZZx, fXZ = _hg_axis(n, Xs, a, da, dda, c, dc, ddc)
    g, gY, gYY, fZy, fZZy, gYZ = _hg_axis(m, Ys, a, da, dda, c, dc, ddc)

    theta, dth, ddth = _hg_phase_terms(spec, Z)
    lam = -Z / D + 1j * dth
    dlam = -(zr * zr - Z * Z) / (D * D) + 1j * ddth
    P = (w0 / w) * np.exp(1j * theta)
    dP = P * lam
    ddP = P * (lam * lam + dlam)

    pref = 0.5 * spec.plane_wave_amplitude * hg_normalization(n, m)
    grad = [pref * P * fX * g, pref * P * f * gY,
            pref * (dP * f * g + P * fZx * g + P * f * fZy)]
    hess = {
        "xx": pref * P * fXX * g,
        "yy": pref * P * f * gYY,
        "xy": pref * P * fX * gY,
        "xz": pref * (dP * fX * g + P * fXZ * g + P * fX * fZy),
        "yz": pref * (dP * f * gY + P * fZx * gY + P * f * gYZ),
        "zz": pref * (ddP * f * g + P * fZZx * g + P * f * fZZy
                      + 2 * dP * fZx * g + 2 * dP * f * fZy + 2 * P * fZx * fZy),
    }
    S, dS = _coupling(atom, grad, hess)
    S = np.where(far, 0.0, S)
    dS = [np.where(far, 0.0, d) for d in dS]
    zero = np.zeros_like(Z)
    singular = np.zeros(np.shape(S), dtype=bool)
    return _finish(S, dS, theta + zero * X, [zero + 0 * X, zero + 0 * X, dth + 0 * X], singular)


def hg_phase(spec, position):
    """Phase ``(n+m+1) atan(Z/Z_R) + k Z`` of an HG mode and its gradient."""
    _require(spec, Family.HERMITE_GAUSSIAN)
    X, Y, Z, lead = _split(position)
    theta, dth, _ = _hg_phase_terms(spec, Z)
    zero = np.zeros_like(X)
    pg = np.stack([zero, zero, dth + zero], axis=-1)
    return _phase_result(theta + zero, pg, np.zeros(np.shape(zero), dtype=bool), lead)


def hg_rabi(spec, atom, position):
    """Complex quadrupole Rabi frequency of an HG mode [1/s]."""
    _require(spec, Family.HERMITE_GAUSSIAN)
    return _rabi_only(_hg_arrays, spec, atom, position)


# -- dispatch -------------------------------------------------------------------

_KERNELS = {
    Family.LAGUERRE_GAUSSIAN: _lg_arrays,
    Family.BESSEL: _bessel_arrays,
    Family.HERMITE_GAUSSIAN: _hg_arrays,
}


def evaluate_field(spec, atom, positions):
    """Vectorized evaluation over an array of Cartesian positions ``(..., 3)``."""
    X, Y, Z, lead = _split(positions)
    fa = _KERNELS[spec.family](spec, atom, X, Y, Z)
    return FieldArrays(*(a.reshape(lead + a.shape[1:]) for a in (
        fa.rabi, fa.phase, fa.phase_gradient, fa.rabi_sq, fa.rabi_sq_gradient, fa.phase_singular)))


def rabi_scale(spec, atom):
    """Family-dependent Rabi frequency scale ``Omega_0`` [1/s] used for ``|Omega/Omega_0|**2``."""
    q = atom.q_xx / (const.hbar * spec.waist)
    if spec.family is Family.BESSEL:
        return q * bessel_prefactor(spec)
    return q * spec.plane_wave_amplitude


def sample_field(spec, atom, position, gradient="analytic"):
    """Evaluate all field quantities at one point.

    ``gradient="numeric"`` replaces the closed-form ``grad |Omega|^2`` with a
    five-point central difference of step ``1e-6 w0``.
    """
    pos = check_positions(position, "position")
    if pos.shape != (3,):
        raise ValueError("sample_field takes a single (X, Y, Z) point")
    fa = evaluate_field(spec, atom, pos)
    grad_sq = np.asarray(fa.rabi_sq_gradient, dtype=float)
    if gradient == "numeric":
        grad_sq = numeric_rabi_sq_gradient(spec, atom, pos)
    elif gradient != "analytic":
        raise ValueError("gradient must be 'analytic' or 'numeric'")
    return FieldSample(
        rabi=complex(fa.rabi),
        phase=float(fa.phase),
        phase_gradient=np.asarray(fa.phase_gradient, dtype=float),
        rabi_sq_gradient=grad_sq,
        gradient_method=gradient,
        phase_singular=bool(fa.phase_singular),
    )


def numeric_rabi_sq_gradient(spec, atom, positions, step=None):
    """Five-point central-difference gradient of ``|Omega|^2``."""
    pos = check_positions(positions)
    h = 1e-6 * spec.waist if step is None else step
    out = []
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = h
        f = [evaluate_field(spec, atom, pos + s * e).rabi_sq for s in (-2, -1, 1, 2)]
        out.append((f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h))
    return np.stack(out, axis=-1)


def cylindrical(r, phi, Z):
    """Cartesian ``(X, Y, Z)`` from cylindrical coordinates."""
    return np.stack(np.broadcast_arrays(r * np.cos(phi), r * np.sin(phi), np.asarray(Z, float)), axis=-1)


# -- helpers ----------------------------------------------------------------------

def _require(spec, family):
    if spec.family is not family:
        raise ValueError(f"expected a {family.value} beam, got {spec.family.value}")


def _split(position):
    """Flatten positions to 1-d coordinate arrays plus the leading shape.

    Kernels always run on 1-d arrays: numpy's 0-d scalar paths for some
    ufuncs (``arctan2``, ``power``) can differ from the array paths in the
    last bit, and a point must give the same result alone or in a grid.
    """
    pos = check_positions(position, "position")
    lead = pos.shape[:-1]
    flat = pos.reshape(-1, 3)
    return flat[:, 0], flat[:, 1], flat[:, 2], lead


def _rabi_only(kernel, spec, atom, position):
    X, Y, Z, lead = _split(position)
    rabi = kernel(spec, atom, X, Y, Z).rabi.reshape(lead)
    return complex(rabi) if lead == () else rabi


def _phase_result(phase, grad, singular, lead):
    phase = np.asarray(phase, float).reshape(lead)
    grad = np.asarray(grad, float).reshape(lead + (3,))
    singular = np.asarray(singular, bool).reshape(lead)
    if lead == ():
        return PhaseResult(float(phase), grad, bool(singular))
    return PhaseResult(phase, grad, singular)
