"""Special functions with first derivatives.

Generalized Laguerre, physicists' Hermite and Bessel functions of the first
kind, all evaluated by recurrence on real arguments. Every routine accepts a
scalar or an array argument and returns a :class:`PolyEval` of matching shape.
"""
from typing import NamedTuple

import numpy as np

from ._validation import check_finite_array, check_order
from .exceptions import DomainError

MAX_ORDER = 64
LAGUERRE_MAX_ARG = 1.0e5
BESSEL_MAX_ARG = 1.0e4

_RESCALE_AT = 1.0e250


class PolyEval(NamedTuple):
    """Function value and its derivative with respect to the argument."""

    value: "float | np.ndarray"
    derivative: "float | np.ndarray"


def _out(x_in, *arrays):
    if np.ndim(x_in) == 0:
        return tuple(float(a) for a in arrays)
    return arrays


# -- Laguerre ---------------------------------------------------------------

def _laguerre_value(p, alpha, x):
    """L_p^alpha(x) by the three-term recurrence; p < 0 gives 0."""
    x = np.asarray(x, dtype=float)
    if p < 0:
        return np.zeros_like(x)
    prev = np.ones_like(x)
    if p == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def laguerre(p, alpha, x):
    """Generalized Laguerre polynomial ``L_p^alpha(x)`` and its derivative.

    The derivative uses ``d/dx L_p^alpha = -L_{p-1}^{alpha+1}``.

    Parameters
    ----------
    p : int
        Degree, ``0 <= p <= 64``.
    alpha : int or float
        Non-negative generalization parameter (the LG winding ``|l|``).
    x : float or array_like
        Argument, ``|x| <= 1e5``.
    """
    p = check_order(p, "p", MAX_ORDER)
    if alpha < 0:
        raise DomainError(f"alpha must be non-negative, got {alpha}")
    xa = check_finite_array(x, "x", LAGUERRE_MAX_ARG)
    value = _laguerre_value(p, alpha, xa)
    deriv = -_laguerre_value(p - 1, alpha + 1, xa)
    return PolyEval(*_out(x, value, deriv))


# -- Hermite ----------------------------------------------------------------

def _hermite_value(n, x):
    """Physicists' H_n(x); n < 0 gives 0."""
    x = np.asarray(x, dtype=float)
    if n < 0:
        return np.zeros_like(x)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 2.0 * x
    for k in range(1, n):
        prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
    return cur


def hermite(n, x):
    """Physicists' Hermite polynomial ``H_n(x)`` and ``H_n'(x) = 2n H_{n-1}(x)``."""
    n = check_order(n, "n", MAX_ORDER)
    xa = check_finite_array(x, "x")
    value = _hermite_value(n, xa)
    deriv = 2.0 * n * _hermite_value(n - 1, xa)
    return PolyEval(*_out(x, value, deriv))


# -- Bessel -----------------------------------------------------------------

def _series_threshold(m):
    # Ascending series loses about x**2 / (2(m+1)) nats to cancellation.
    return min(m + 8.0, np.sqrt(8.0 * (m + 1.0)))


def _bessel_series(m, x, scaled=False):
    """Ascending series for J_m(x), or J_m(x) / x**m when ``scaled``."""
    x = np.asarray(x, dtype=float)
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    # Per-element stopping keeps each value independent of the batch it is in.
    for k in range(1, 400):
        term = term * q / (k * (m + k))
        total = np.where(active, total + term, total)
        active &= np.abs(term) > 1e-17 * np.abs(total)
        if not np.any(active):
            break
    pref = 1.0
    for j in range(1, m + 1):
        pref /= 2.0 * j
    if scaled:
        return pref * total
    half = np.ones_like(x)
    for j in range(1, m + 1):
        half = half * (0.5 * x / j)
    return half * total


def _bessel_miller(orders, x):
    """Backward recurrence for J_n(x), x > 0, normalized by J0 + 2*sum(J_2k) = 1."""
    x = np.asarray(x, dtype=float)
    # Starting index per element, so results do not depend on the batch.
    top = np.maximum(max(orders), x)
    starts = (top + 20 + 2.0 * np.sqrt(40.0 * top)).astype(int)
    starts += starts % 2
    start = int(starts.max())
    wanted = set(orders)
    found = {}
    nxt = np.zeros_like(x)
    cur = np.zeros_like(x)
    norm = np.zeros_like(x)
    for n in range(start, 0, -1):
        cur = np.where(starts == n, 1e-30, cur)
        prv = (2.0 * n / x) * cur - nxt
        nxt, cur = cur, prv
        # cur now holds J_{n-1}
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm = norm + 2.0 * cur
        if n - 1 in wanted:
            found[n - 1] = cur.copy()
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            s = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            cur, nxt, norm = cur * s, nxt * s, norm * s
            for k in found:
                found[k] = found[k] * s
    norm = norm + cur
    for n in wanted:
        if n not in found:
            found[n] = np.zeros_like(x)
    return {n: found[n] / norm for n in orders}


def _bessel_orders(orders, ax, scaled=False):
    """J_n(ax) for each n in ``orders`` on non-negative ``ax``.

    With ``scaled`` the result is J_n(ax) / ax**n, finite at ax = 0.
    """
    ax = np.asarray(ax, dtype=float)
    thresh = _series_threshold(min(orders))
    small = ax < thresh
    out = {n: np.empty_like(ax) for n in orders}
    if np.any(small):
        for n in orders:
            out[n][small] = _bessel_series(n, ax[small], scaled)
    if not np.all(small):
        xs = ax[~small]
        vals = _bessel_miller(orders, xs)
        for n in orders:
            v = vals[n]
            if scaled:
                v = v / xs ** n
            out[n][~small] = v
    return out


def bessel_j(m, x):
    """Bessel function of the first kind ``J_m(x)`` and ``J_m'(x)``.

    Small arguments use the ascending power series; larger ones use Miller's
    backward recurrence normalized by ``J0 + 2 sum J_2k = 1``. The derivative
    is ``(J_{m-1} - J_{m+1}) / 2`` (``-J_1`` for ``m = 0``).

    Parameters
    ----------
    m : int
        Order, ``0 <= m <= 64``.
    x : float or array_like
        Argument, ``|x| <= 1e4``.
    """
    m = check_order(m, "m", MAX_ORDER)
    xa = check_finite_array(x, "x", BESSEL_MAX_ARG)
    ax = np.abs(xa)
    orders = sorted({max(m - 1, 0), m, m + 1})
    j = _bessel_orders(orders, ax)
    value = j[m]
    if m == 0:
        deriv = -j[1]
    else:
        deriv = 0.5 * (j[m - 1] - j[m + 1])
    neg = xa < 0
    if np.any(neg):
        sign = -1.0 if m % 2 else 1.0
        value = np.where(neg, sign * value, value)
        deriv = np.where(neg, -sign * deriv, deriv)
    return PolyEval(*_out(x, value, deriv))


def bessel_j_scaled(m, x, max_order=MAX_ORDER + 2):
    """``J_m(x) / x**m`` for ``x >= 0``, regular at the origin.

    Equal to ``1 / (2**m m!)`` at ``x = 0``. Used by the Bessel beam to keep
    vortex factors in product form.
    """
    m = check_order(m, "m", max_order)
    xa = check_finite_array(x, "x", BESSEL_MAX_ARG)
    if np.any(xa < 0):
        raise DomainError("bessel_j_scaled requires x >= 0")
    val = _bessel_orders([m], xa, scaled=True)[m]
    return float(val) if np.ndim(x) == 0 else val
