"""Modified Bessel functions of the second kind, integer order.

K0 and K1 come from one of three branches:

* ``z <= 2``: the ascending series built on I0, I1 and the logarithm;
* ``2 < z < 25``: Steed's continued fraction (Temme's CF2 form), which
  yields K0 and K1 together;
* ``z >= 25``: the Hankel asymptotic expansion, truncated at its smallest
  term.

Higher orders use upward recurrence, which is stable for K.  All branches
work on the scaled value ``exp(z) K(z)``; :func:`besselk` multiplies the
exponential back and flushes to zero beyond ``z = 700``.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

__all__ = ["besselk", "besselk_scaled", "k01_scaled", "FlushedToZeroWarning",
           "SERIES_MAX", "ASYMPTOTIC_MIN", "FLUSH_Z", "self_test"]

SERIES_MAX = 2.0
ASYMPTOTIC_MIN = 25.0
FLUSH_Z = 700.0
_EULER = 0.57721566490153286061


class FlushedToZeroWarning(RuntimeWarning):
    pass


def _k1_series(z):
    # K1(z) = 1/z + I1(z) ln(z/2) - (z/4) sum_k (psi(k+1) + psi(k+2)) t^k / (k!(k+1)!)
    t = 0.25 * z * z
    lnz2 = math.log(0.5 * z)
    term = 1.0  # t^k / (k!(k+1)!)
    psi1 = -_EULER      # psi(k+1)
    psi2 = 1.0 - _EULER  # psi(k+2)
    i1 = 0.0
    s = 0.0
    k = 0
    while True:
        i1 += term
        s += (psi1 + psi2) * term
        if term < 1e-18 * i1 and k > 2:
            break
        k += 1
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        term *= t / (k * (k + 1))
    i1 *= 0.5 * z
    return 1.0 / z + i1 * lnz2 - 0.25 * z * s


def _k0_series(z):
    # K0(z) = -(ln(z/2) + gamma) I0(z) + sum_k H_k t^k / (k!)^2
    t = 0.25 * z * z
    lg = math.log(0.5 * z) + _EULER
    term = 1.0
    i0 = 0.0
    s = 0.0
    h = 0.0
    k = 0
    while True:
        i0 += term
        s += h * term
        if term < 1e-18 * i0 and k > 2:
            break
        k += 1
        h += 1.0 / k
        term *= t / (k * k)
    return -lg * i0 + s


def _k01_cf2(x):
    """Scaled K0, K1 by Steed's method (valid for x >~ 2)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 100000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k_asym_scaled(nu, z):
    """sqrt(pi/2z) sum_k a_k(nu) / z^k, stopped at the smallest term."""
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    last = math.inf
    for k in range(1, 60):
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(term) >= last:
            break
        total += term
        last = abs(term)
        if last < 1e-17 * abs(total):
            break
    return math.sqrt(math.pi / (2.0 * z)) * total


def k01_scaled(z):
    """``(exp(z) K0(z), exp(z) K1(z))`` for z > 0."""
    if not z > 0:
        raise ValueError(f"K is defined for z > 0, got {z}")
    if z <= SERIES_MAX:
        e = math.exp(z)
        return e * _k0_series(z), e * _k1_series(z)
    if z < ASYMPTOTIC_MIN:
        return _k01_cf2(z)
    return _k_asym_scaled(0, z), _k_asym_scaled(1, z)


def _scaled_scalar(n, z):
    n = abs(int(n))
    k0, k1 = k01_scaled(z)
    if n == 0:
        return k0
    km, k = k0, k1
    for nu in range(1, n):
        km, k = k, km + (2.0 * nu / z) * k
    return k


def besselk_scaled(n, z):
    """``exp(z) K_n(z)`` for integer n and z > 0 (vectorised over z)."""
    if int(n) != n:
        raise ValueError("only integer orders are supported")
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("K_n(z) needs z > 0")
    out = np.array([_scaled_scalar(n, float(v)) for v in z.ravel()]).reshape(z.shape)
    return out if out.ndim else float(out)


def besselk(n, z):
    """``K_n(z)``; arguments beyond 700 are flushed to zero with a warning."""
    z = np.asarray(z, dtype=float)
    sc = np.asarray(besselk_scaled(n, z), dtype=float)
    big = z > FLUSH_Z
    if np.any(big):
        warnings.warn(f"K_{n}(z) flushed to 0 for z > {FLUSH_Z:g}", FlushedToZeroWarning,
                      stacklevel=2)
    with np.errstate(under="ignore"):
        out = np.where(big, 0.0, sc * np.exp(-np.minimum(z, FLUSH_Z)))
    return out if out.ndim else float(out)


def self_test(width=0.5, points=11):
    """Branch agreement across both switch points.

    Each window of ``width`` straddles a switch; both neighbouring branches
    are evaluated there and the largest relative disagreement for K0 and K1
    is returned per window.
    """
    out = {}
    for name, zc, lo_branch, hi_branch in (
            ("series/cf2", SERIES_MAX, _series_scaled, _k01_cf2),
            ("cf2/asymptotic", ASYMPTOTIC_MIN, _k01_cf2, _asym_pair)):
        worst = 0.0
        for z in np.linspace(zc - width / 2, zc + width / 2, points):
            a = lo_branch(float(z))
            b = hi_branch(float(z))
            worst = max(worst, max(abs(x - y) / abs(y) for x, y in zip(a, b)))
        out[name] = worst
    return out


def _series_scaled(z):
    e = math.exp(z)
    return e * _k0_series(z), e * _k1_series(z)


def _asym_pair(z):
    return _k_asym_scaled(0, z), _k_asym_scaled(1, z)
