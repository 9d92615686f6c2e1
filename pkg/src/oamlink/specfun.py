"""Special functions used throughout the package.

Integer-order Bessel functions of the first kind, the Airy function Ai, and
a locator for the first maximum of J_l. Everything here is a pure function of
its arguments; scalars and numpy arrays are both accepted for ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "SpecialFunctionDomainError",
    "BesselMax",
    "bessel_j",
    "bessel_j_prime",
    "airy_ai",
    "bessel_first_max",
    "MAX_ORDER",
    "MAX_BESSEL_ARG",
    "AIRY_RANGE",
]

MAX_ORDER = 64
MAX_BESSEL_ARG = 1.0e6
AIRY_RANGE = (-50.0, 50.0)

# Ai(0) and -Ai'(0)
_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AIP0 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)

# Maclaurin/asymptotic switchover points for Ai.  Past these the power
# series loses more than ~1e-11 to cancellation.
_AIRY_SERIES_LO = -7.5
_AIRY_SERIES_HI = 5.0

_RESCALE = 1.0e200
# Above this argument J_n comes from the Hankel expansion instead of recurrence.
_HANKEL_MIN_X = 2000.0


class SpecialFunctionDomainError(DomainError):
    """Argument outside the supported range of a special function."""


@dataclass(frozen=True)
class BesselMax:
    """First maximum of J_order on [0, inf)."""

    order: int
    abscissa: float
    value: float


def _check_order(order) -> int:
    if isinstance(order, (bool, np.bool_)) or not isinstance(order, (int, np.integer)):
        if isinstance(order, (float, np.floating)) and float(order).is_integer():
            order = int(order)
        else:
            raise SpecialFunctionDomainError(f"Bessel order must be an integer, got {order!r}")
    order = int(order)
    if abs(order) > MAX_ORDER:
        raise SpecialFunctionDomainError(f"|order| = {abs(order)} exceeds {MAX_ORDER}")
    return order


def _series(n: int, x: np.ndarray) -> np.ndarray:
    """Ascending series for J_n, n >= 0, x >= 0."""
    half = 0.5 * x
    term = np.ones_like(x)
    for i in range(1, n + 1):
        term = term * half / i
    total = term.copy()
    q = half * half
    for k in range(1, 200):
        term = -term * q / (k * (k + n))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(n: int, x: np.ndarray) -> np.ndarray:
    """Downward recurrence normalised by J_0 + 2*sum(J_2k) = 1, x > 0."""
    xmax = float(np.max(x))
    start = int(max(n, xmax) + 10.0 * xmax ** (1.0 / 3.0) + 40)
    start += start % 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    result = np.zeros_like(x)
    norm = np.zeros_like(x)
    two_over_x = 2.0 / x
    for m in range(start, 0, -1):
        # j_cur holds J_m; produce J_{m-1}
        j_prev = m * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if m - 1 == n:
            result = j_cur.copy()
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2.0 * j_cur
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            result *= scale
    norm += j_cur
    return result / norm


def _hankel(n: int, x: np.ndarray) -> np.ndarray:
    """Large-argument expansion J_n(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi)."""
    mu = 4.0 * n * n
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    a = 1.0
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    for k in range(0, 200):
        if k:
            a *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
            term = a / x ** k
        mag = np.abs(term)
        done |= (mag > prev) & (k > n)
        signed = term if (k // 2) % 2 == 0 else -term
        if k % 2 == 0:
            p = np.where(done, p, p + signed)
        else:
            q = np.where(done, q, q + signed)
        prev = np.where(done, prev, mag)
        if np.all(done | (mag < 1e-17)):
            break
    chi = x - (0.5 * n + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j(order: int, x):
    """Bessel function of the first kind J_order(x) for integer order.

    Parameters
    ----------
    order : int
        Integer order with ``|order| <= 64``. Negative orders use
        J_{-l}(x) = (-1)^l J_l(x).
    x : float or array_like
        Real argument(s), ``|x| <= 1e6``.

    Returns
    -------
    float or numpy.ndarray
        Same shape as ``x``.
    """
    order = _check_order(order)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(np.abs(arr) > MAX_BESSEL_ARG):
        raise SpecialFunctionDomainError(f"|x| must be finite and <= {MAX_BESSEL_ARG:g}")
    n = abs(order)
    sign = -1.0 if (order < 0 and n % 2) else 1.0
    ax = np.abs(arr).ravel()
    out = np.empty_like(ax)

    # Series where the terms shrink from the start (no cancellation) or x is modest.
    use_series = (ax < 12.0) | (0.25 * ax * ax < n + 1)
    if np.any(use_series):
        out[use_series] = _series(n, ax[use_series])
    far = ~use_series & (ax > _HANKEL_MIN_X)
    rest = ~use_series & ~far
    if np.any(rest):
        out[rest] = _miller(n, ax[rest])
    if np.any(far):
        out[far] = _hankel(n, ax[far])

    if n % 2:
        out = np.where(arr.ravel() < 0, -out, out)
    out = sign * out.reshape(arr.shape)
    if out.ndim == 0:
        return float(out)
    return out


def bessel_j_prime(order: int, x):
    """Derivative J'_order(x) = (J_{order-1}(x) - J_{order+1}(x)) / 2."""
    order = _check_order(order)
    if abs(order) + 1 > MAX_ORDER:
        raise SpecialFunctionDomainError("derivative needs order + 1 <= 64")
    return 0.5 * (np.asarray(bessel_j(order - 1, x)) - np.asarray(bessel_j(order + 1, x)))


def _airy_maclaurin(x: np.ndarray) -> np.ndarray:
    x3 = x * x * x
    f = np.ones_like(x)
    g = x.copy()
    tf = np.ones_like(x)
    tg = x.copy()
    for k in range(0, 120):
        tf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
        f = f + tf
        g = g + tg
        if np.all(np.abs(tf) + np.abs(tg) <= 1e-18 * (np.abs(f) + np.abs(g))):
            break
    return _AI0 * f - _AIP0 * g


def _airy_u(count: int) -> list[float]:
    u = [1.0]
    for k in range(1, count):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    return u


_U = _airy_u(40)


def _airy_pos(x: np.ndarray) -> np.ndarray:
    zeta = (2.0 / 3.0) * x ** 1.5
    total = np.zeros_like(x)
    prev = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    for k, uk in enumerate(_U):
        term = (-1) ** k * uk / zeta ** k
        mag = np.abs(term)
        # stop each element at its smallest term (optimal truncation)
        done |= mag > prev
        total = np.where(done, total, total + term)
        prev = np.where(done, prev, mag)
    return np.exp(-zeta) / (2.0 * math.sqrt(math.pi) * x ** 0.25) * total


def _airy_neg(x: np.ndarray) -> np.ndarray:
    z = -x
    zeta = (2.0 / 3.0) * z ** 1.5
    p = np.zeros_like(z)
    q = np.zeros_like(z)
    prev = np.full_like(z, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(0, len(_U) - 1, 2):
        sgn = (-1) ** (k // 2)
        tp = sgn * _U[k] / zeta ** k
        tq = sgn * _U[k + 1] / zeta ** (k + 1)
        mag = np.abs(tp) + np.abs(tq)
        done |= mag > prev
        p = np.where(done, p, p + tp)
        q = np.where(done, q, q + tq)
        prev = np.where(done, prev, mag)
    phase = zeta + 0.25 * math.pi
    return (np.sin(phase) * p - np.cos(phase) * q) / (math.sqrt(math.pi) * z ** 0.25)


def airy_ai(x):
    """Airy function Ai(x) on -50 <= x <= 50.

    Maclaurin series near the origin, asymptotic expansions (optimally
    truncated) on either tail.
    """
    arr = np.asarray(x, dtype=float)
    lo, hi = AIRY_RANGE
    if not np.all(np.isfinite(arr)) or np.any(arr < lo) or np.any(arr > hi):
        raise SpecialFunctionDomainError(f"Airy argument must lie in [{lo}, {hi}]")
    flat = arr.ravel()
    out = np.empty_like(flat)
    mid = (flat >= _AIRY_SERIES_LO) & (flat <= _AIRY_SERIES_HI)
    pos = flat > _AIRY_SERIES_HI
    neg = flat < _AIRY_SERIES_LO
    if np.any(mid):
        out[mid] = _airy_maclaurin(flat[mid])
    if np.any(pos):
        out[pos] = _airy_pos(flat[pos])
    if np.any(neg):
        out[neg] = _airy_neg(flat[neg])
    out = out.reshape(arr.shape)
    if out.ndim == 0:
        return float(out)
    return out


@lru_cache(maxsize=None)
def bessel_first_max(order: int) -> BesselMax:
    """Locate the first local maximum chi_l of J_order on [0, inf).

    A coarse scan (step 0.05) brackets the peak, golden-section search narrows
    it, and bisection on J' pins the abscissa to ~1e-14.
    """
    order = _check_order(order)
    if order < 0:
        raise SpecialFunctionDomainError("bessel_first_max expects a non-negative order")
    if order == 0:
        return BesselMax(0, 0.0, 1.0)
    if order + 1 > MAX_ORDER:
        raise SpecialFunctionDomainError("order too large for derivative-based refinement")

    step = 0.05
    # J_l first peaks a little beyond x = l; scan from just past the origin.
    xs = np.arange(1, int((order + 10.0 * order ** (1 / 3) + 20) / step)) * step
    vals = bessel_j(order, xs)
    i = int(np.argmax(np.diff(vals) < 0))  # first descent
    a, b = xs[max(i - 1, 0)], xs[i + 1]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = bessel_j(order, c), bessel_j(order, d)
    while b - a > 1e-6:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = bessel_j(order, c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = bessel_j(order, d)

    # J' goes + -> - across the peak; widen slightly so the sign change is bracketed.
    lo, hi = a - 1e-4, b + 1e-4
    dlo = bessel_j_prime(order, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        dm = bessel_j_prime(order, mid)
        if dm == 0.0:
            lo = hi = mid
            break
        if (dm > 0) == (dlo > 0):
            lo, dlo = mid, dm
        else:
            hi = mid
        if hi - lo < 1e-15 * hi:
            break
    x_star = 0.5 * (lo + hi)
    return BesselMax(order, float(x_star), float(bessel_j(order, x_star)))
