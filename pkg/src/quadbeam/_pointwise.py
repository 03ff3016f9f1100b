"""Single-point field evaluation in plain Python arithmetic.

Same product-form expressions as the vectorized kernels in :mod:`beams`,
written on Python floats and complex numbers. numpy's per-call overhead
dominates on one-element arrays, and trajectory integration evaluates the
field one point at a time, so this path is several times faster there.
Agreement with the vectorized kernels is checked by the test suite.
"""
import cmath
import math

import numpy as np

from . import constants as const
from .beams import (_FAR_FIELD_T, Family, FieldSample, _bessel_sigma, _check_bessel_z,
                    bessel_prefactor, hg_normalization)
from .specfun import _RESCALE_AT, _series_threshold


def _laguerre(p, alpha, x):
    if p < 0:
        return 0.0
    prev, cur = 1.0, 1.0 + alpha - x
    if p == 0:
        return prev
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def _hermite(n, x):
    if n < 0:
        return 0.0
    prev, cur = 1.0, 2.0 * x
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
    return cur


def _bessel_scaled(orders, x):
    """J_n(x) / x**n for each n in ``orders`` (same scheme as :mod:`specfun`)."""
    if x < _series_threshold(min(orders)):
        out = {}
        q = -0.25 * x * x
        for m in orders:
            term = total = 1.0
            for k in range(1, 400):
                term = term * q / (k * (m + k))
                total = total + term
                if not abs(term) > 1e-17 * abs(total):
                    break
            pref = 1.0
            for j in range(1, m + 1):
                pref /= 2.0 * j
            out[m] = pref * total
        return out
    top = max(max(orders), x)
    start = int(top + 20 + 2.0 * math.sqrt(40.0 * top))
    start += start % 2
    found = {}
    nxt, cur, norm = 0.0, 1e-30, 0.0
    for n in range(start, 0, -1):
        nxt, cur = cur, (2.0 * n / x) * cur - nxt
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * cur
        if n - 1 in orders:
            found[n - 1] = cur
        if abs(cur) > _RESCALE_AT:
            s = 1.0 / _RESCALE_AT
            cur, nxt, norm = cur * s, nxt * s, norm * s
            found = {key: v * s for key, v in found.items()}
    norm += cur
    return {n: found[n] / norm / x ** n for n in orders}


def _vortex(n, sgn, x, y, G, Gt, Gtt, GZ, GZZ, GtZ):
    """Scalar twin of ``beams._vortex_field`` (psi = (x + i sgn y)**n G)."""
    w = complex(x, sgn * y)
    if n == 0:
        W, Wx, Wxx = 1.0, 0.0, 0.0
    else:
        wn1 = w ** (n - 1)
        W = wn1 * w
        Wx = n * wn1
        Wxx = n * (n - 1) * w ** (n - 2) if n >= 2 else 0.0
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
    hess = [[Wxx * G + 2 * Wx * Gx + W * Gxx, Wxy * G + Wx * Gy + Wy * Gx + W * Gxy, Wx * GZ + W * GxZ],
            [0j, Wyy * G + 2 * Wy * Gy + W * Gyy, Wy * GZ + W * GyZ],
            [0j, 0j, W * GZZ]]
    hess[1][0], hess[2][0], hess[2][1] = hess[0][1], hess[0][2], hess[1][2]
    return psi, grad, hess


def _scale(grad, hess, length, amp):
    s = (amp / length, amp / length, amp)
    grad = [g * si for g, si in zip(grad, s)]
    hess = [[h * s[i] * s[j] / amp for j, h in enumerate(row)] for i, row in enumerate(hess)]
    return grad, hess


def _sample(S, dS, theta, phase_grad, singular):
    hb = const.hbar
    rabi = S * cmath.exp(-1j * theta) / hb
    grad_sq = np.array([2.0 * (S.conjugate() * d).real for d in dS]) / (hb * hb)
    pg = np.array(phase_grad, dtype=float)
    if singular:
        pg[:2] = np.nan
    return FieldSample(complex(rabi), float(theta), pg, grad_sq, "analytic", singular)


def _coupling(q, grad, hess):
    S = q[0] * grad[0] + q[1] * grad[1] + q[2] * grad[2]
    dS = [q[0] * hess[i][0] + q[1] * hess[i][1] + q[2] * hess[i][2] for i in range(3)]
    return S, dS


def _azimuthal(l, X, Y):
    r2 = X * X + Y * Y
    if r2 == 0.0:
        return math.atan2(Y, X), 0.0, 0.0, l != 0
    return math.atan2(Y, X), -l * Y / r2, l * X / r2, False


def _lg(spec, atom, X, Y, Z):
    l, p = spec.lg_l, spec.lg_p
    n = abs(l)
    sgn = 1 if l >= 0 else -1
    length = spec.waist / math.sqrt(2.0)
    x, y = X / length, Y / length
    t = x * x + y * y
    phi, gx, gy, singular = _azimuthal(l, X, Y)
    s, k = spec.propagation_sign, spec.k
    if spec.lg_full_phase:
        zr = spec.rayleigh_range
        D = zr * zr + Z * Z
        r2 = X * X + Y * Y
        gouy = 2 * p + n + 1
        theta_r = s * k * Z - s * gouy * math.atan2(Z, zr) + s * k * r2 * Z / (2.0 * D)
        c = s * k * spec.waist ** 2 / 4.0
        th_t = c * Z / D
        th_Z = s * k - s * gouy * zr / D + s * k * r2 * (zr * zr - Z * Z) / (2.0 * D * D)
        th_tZ = c * (zr * zr - Z * Z) / (D * D)
        th_ZZ = s * gouy * 2.0 * zr * Z / (D * D) + s * k * r2 * Z * (Z * Z - 3.0 * zr * zr) / D ** 3
        curv = s * k * Z / D
        pg = [gx + curv * X, gy + curv * Y, th_Z]
    else:
        theta_r, th_t, th_Z, th_tZ, th_ZZ = s * k * Z, 0.0, s * k, 0.0, 0.0
        pg = [gx, gy, s * k]
    theta = l * phi + theta_r
    if t > _FAR_FIELD_T:
        return _sample(0j, [0j, 0j, 0j], theta, pg, singular)

    L = _laguerre(p, n, t)
    L1 = -_laguerre(p - 1, n + 1, t)
    L2 = _laguerre(p - 2, n + 2, t)
    h_t = complex(-0.5, th_t)
    h_Z = 1j * th_Z
    E = cmath.exp(complex(-0.5 * t, theta_r))
    G = L * E
    Gt = (L1 + L * h_t) * E
    Gtt = (L2 + 2 * L1 * h_t + L * h_t * h_t) * E
    GZ = L * h_Z * E
    GZZ = L * (1j * th_ZZ + h_Z * h_Z) * E
    GtZ = (L1 * h_Z + L * (1j * th_tZ + h_t * h_Z)) * E
    _, grad, hess = _vortex(n, sgn, x, y, G, Gt, Gtt, GZ, GZZ, GtZ)
    amp = spec.plane_wave_amplitude * math.exp(0.5 * (math.lgamma(p + 1) - math.lgamma(n + p + 1)))
    grad, hess = _scale(grad, hess, length, amp)
    S, dS = _coupling(atom.quadrupole, grad, hess)
    return _sample(S, dS, theta, pg, singular)


def _bessel(spec, atom, X, Y, Z):
    _check_bessel_z(spec, atom, Z)
    m, kp = spec.bessel_m, spec.k_perp
    x, y = X * kp, Y * kp
    t = x * x + y * y
    rt = math.sqrt(t)
    b = _bessel_scaled((m, m + 1, m + 2), rt)
    b0, b1, b2 = b[m], b[m + 1], b[m + 2]
    zmax, kz = spec.z_max, spec.k_z
    nu = m + 0.5
    Phi = (Z / zmax) ** nu * math.exp(-2.0 * Z * Z / zmax ** 2) * cmath.exp(1j * kz * Z)
    rho = complex(nu / Z - 4.0 * Z / zmax ** 2, kz)
    drho = -nu / Z ** 2 - 4.0 / zmax ** 2
    dPhi, ddPhi = Phi * rho, Phi * (rho * rho + drho)
    psi, grad, hess = _vortex(m, 1, x, y, b0 * Phi, -0.5 * b1 * Phi, 0.25 * b2 * Phi,
                              b0 * dPhi, b0 * ddPhi, -0.5 * b1 * dPhi)
    pref = bessel_prefactor(spec)
    grad, hess = _scale(grad, hess, 1.0 / kp, pref)
    psi = pref * psi
    q = atom.quadrupole
    sigma, dsigma = _bessel_sigma(spec, Z)
    S = q[0] * grad[0] + q[1] * grad[1] + q[2] * sigma * psi
    dS = [q[0] * hess[i][0] + q[1] * hess[i][1] + q[2] * sigma * grad[i] for i in range(3)]
    dS[2] += q[2] * dsigma * psi
    phi, gx, gy, singular = _azimuthal(m, X, Y)
    return _sample(S, dS, kz * Z + m * phi, [gx, gy, kz], singular)


def _hg_axis(order, X, a, da, dda, c, dc, ddc):
    xi = a * X
    H = _hermite(order, xi)
    H1 = 2.0 * order * _hermite(order - 1, xi)
    H2 = 4.0 * order * (order - 1) * _hermite(order - 2, xi)
    E = cmath.exp(-c * X * X)
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


def _hg(spec, atom, X, Y, Z):
    n, m = spec.hg_n, spec.hg_m
    zr, k, w0 = spec.rayleigh_range, spec.k, spec.waist
    D = zr * zr + Z * Z
    w = w0 * math.sqrt(1.0 + (Z / zr) ** 2)
    a = math.sqrt(2.0) / w
    order = n + m + 1
    theta = order * math.atan2(Z, zr) + k * Z
    dth = k + order * zr / D
    ddth = -2.0 * order * zr * Z / (D * D)
    pg = [0.0, 0.0, dth]
    if 0.5 * ((a * X) ** 2 + (a * Y) ** 2) > 0.5 * _FAR_FIELD_T:
        return _sample(0j, [0j, 0j, 0j], theta, pg, False)
    da = -a * Z / D
    dda = a * (2 * Z * Z - zr * zr) / (D * D)
    c = complex(zr * zr / (w0 * w0 * D), k * Z / (2.0 * D))
    dc = complex(-2.0 * zr * zr * Z / (w0 * w0 * D * D), k * (zr * zr - Z * Z) / (2.0 * D * D))
    ddc = complex(-2.0 * zr * zr * (zr * zr - 3 * Z * Z) / (w0 * w0 * D ** 3),
                  k * Z * (Z * Z - 3 * zr * zr) / D ** 3)
    f, fX, fXX, fZx, fZZx, fXZ = _hg_axis(n, X, a, da, dda, c, dc, ddc)
    g, gY, gYY, fZy, fZZy, gYZ = _hg_axis(m, Y, a, da, dda, c, dc, ddc)
    lam = complex(-Z / D, dth)
    dlam = complex(-(zr * zr - Z * Z) / (D * D), ddth)
    P = (w0 / w) * cmath.exp(1j * theta)
    dP, ddP = P * lam, P * (lam * lam + dlam)
    pref = 0.5 * spec.plane_wave_amplitude * hg_normalization(n, m)
    grad = [pref * P * fX * g, pref * P * f * gY, pref * (dP * f * g + P * fZx * g + P * f * fZy)]
    hxz = pref * (dP * fX * g + P * fXZ * g + P * fX * fZy)
    hyz = pref * (dP * f * gY + P * fZx * gY + P * f * gYZ)
    hxy = pref * P * fX * gY
    hess = [[pref * P * fXX * g, hxy, hxz],
            [hxy, pref * P * f * gYY, hyz],
            [hxz, hyz, pref * (ddP * f * g + P * fZZx * g + P * f * fZZy
                               + 2 * dP * fZx * g + 2 * dP * f * fZy + 2 * P * fZx * fZy)]]
    S, dS = _coupling(atom.quadrupole, grad, hess)
    return _sample(S, dS, theta, pg, False)


_POINT_KERNELS = {Family.LAGUERRE_GAUSSIAN: _lg, Family.BESSEL: _bessel, Family.HERMITE_GAUSSIAN: _hg}


def sample_point(spec, atom, X, Y, Z):
    """:class:`FieldSample` at one point given as three Python floats."""
    return _POINT_KERNELS[spec.family](spec, atom, float(X), float(Y), float(Z))
