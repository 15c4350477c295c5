"""Radial and angular quadrature for integrals against r**m K_q(2r)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .besselk import besselk

__all__ = ["QuadratureScheme", "QuadratureAccuracyError", "moment_exact",
           "required_moments", "build_scheme", "moment_table"]

_GL_ORDER = 20
_X, _W = leggauss(_GL_ORDER)


class QuadratureAccuracyError(RuntimeError):
    def __init__(self, moment, rel_err):
        super().__init__(f"radial scheme fails moment m = {moment}: relative error {rel_err:.3e}")
        self.moment = moment
        self.rel_err = rel_err


def moment_exact(m, q):
    """``int_0^inf r**m K_q(2r) dr = (1/4) Gamma((m+1-q)/2) Gamma((m+1+q)/2)``."""
    q = abs(q)
    if m + 1 <= q:
        raise ValueError("moment diverges for m + 1 <= |q|")
    return 0.25 * math.exp(gammaln(0.5 * (m + 1 - q)) + gammaln(0.5 * (m + 1 + q)))


def required_moments(q, n_check):
    """Exponents ``2k + |q| + 1`` for sector indices up to ``2 n_check``."""
    return [2 * k + abs(q) + 1 for k in range(2 * n_check + 1)]


@dataclass(frozen=True)
class QuadratureScheme:
    charge: int
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    angular_nodes: int
    cutoff: float
    moments: tuple = field(default=(), repr=False)
    kq: np.ndarray = field(default=None, repr=False)   # K_q(2r) at the nodes

    @property
    def angles(self):
        return -math.pi + 2.0 * math.pi * np.arange(self.angular_nodes) / self.angular_nodes

    def integrate_moment(self, m):
        r = self.radial_nodes
        return float(np.sum(self.radial_weights * r ** m * self.kq))

    def describe(self):
        return {"charge": self.charge, "radial_nodes": int(self.radial_nodes.size),
                "angular_nodes": self.angular_nodes, "cutoff": self.cutoff,
                "gauss_order": _GL_ORDER}


def _cutoff(q, mmax, floor=1e-18):
    # smallest R past the peak with R**mmax K_q(2R) < floor
    r = max(1.0, 0.5 * mmax)
    while True:
        val = math.exp(mmax * math.log(r)) * float(besselk(abs(q), 2.0 * r)) if r < 350 else 0.0
        if val < floor:
            return r
        r *= 1.1


def _panel(a, b, q, powers):
    r = 0.5 * (b - a) * _X + 0.5 * (b + a)
    w = 0.5 * (b - a) * _W
    k = np.asarray(besselk(abs(q), 2.0 * r))
    vals = (r[None, :] ** powers[:, None] * k[None, :]) @ w
    return r, w, k, vals


def build_scheme(q, n_check, angular_nodes=None, rtol=1e-13, max_depth=40):
    """Adaptive composite Gauss-Legendre scheme on [0, R].

    Panels are bisected locally until one rule and its two halves agree to
    ``rtol`` relative to each moment's running total.  Local bisection
    concentrates nodes at the ``r log r`` endpoint behaviour of K_0 instead
    of refining the whole interval.
    """
    moments = required_moments(q, n_check)
    powers = np.asarray(moments, dtype=float)
    R = _cutoff(q, max(moments))
    # coarse totals to scale the acceptance test
    edges = np.linspace(0.0, R, 17)
    scale = sum(_panel(a, b, q, powers)[3] for a, b in zip(edges[:-1], edges[1:]))
    scale = np.abs(scale)

    nodes, weights, kvals = [], [], []
    stack = [(a, b, 0) for a, b in zip(edges[:-1][::-1], edges[1:][::-1])]
    while stack:
        a, b, depth = stack.pop()
        r, w, k, whole = _panel(a, b, q, powers)
        mid = 0.5 * (a + b)
        r1, w1, k1, left = _panel(a, mid, q, powers)
        r2, w2, k2, right = _panel(mid, b, q, powers)
        if np.all(np.abs(left + right - whole) <= rtol * scale) or depth >= max_depth:
            nodes += [r1, r2]
            weights += [w1, w2]
            kvals += [k1, k2]
        else:
            stack += [(mid, b, depth + 1), (a, mid, depth + 1)]
    if angular_nodes is None:
        angular_nodes = 2 * n_check + 2
    scheme = QuadratureScheme(int(q), np.concatenate(nodes), np.concatenate(weights),
                              int(angular_nodes), R, tuple(moments), np.concatenate(kvals))
    return scheme


def moment_table(scheme, tol=1e-9, raise_on_fail=True):
    """Relative error of every required moment; raises on the first failure."""
    rows = []
    for m in scheme.moments:
        exact = moment_exact(m, scheme.charge)
        rel = abs(scheme.integrate_moment(m) - exact) / exact
        rows.append({"charge": scheme.charge, "m": m, "exact": exact, "rel_err": rel,
                     "passed": bool(rel < tol)})
        if raise_on_fail and not rel < tol:
            raise QuadratureAccuracyError(m, rel)
    return rows
