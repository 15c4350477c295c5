"""Squeezing and antibunching diagnostics for charge coherent states.

Every quantity is computed twice: once from operator expectations in the
truncated Fock space and once from the closed forms in terms of the
normalisation series (tanh-bar, coth-bar).  The two must agree to 1e-10;
a disagreement is a bug and raises :class:`ClosedFormMismatch`.

theta is ``arg(xi)`` throughout.  Squeezing verdicts are strict
inequalities with an absolute guard band of 1e-12.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .deform import DeformationSpec
from .fock import expect, expectation, sector_op
from .states import StateRequest, build_state, normalization

__all__ = [
    "ClosedFormMismatch",
    "SqueezingReport",
    "AntibunchReport",
    "su_f11_report",
    "single_mode_report",
    "two_mode_report",
    "antibunch_report",
    "coth_bar",
    "coth_scan",
    "sub_unity_windows",
    "default_x_grid",
    "two_mode_squeezing_scan",
]

AGREE_TOL = 1e-10
GUARD = 1e-12
_PAD = 6


class ClosedFormMismatch(RuntimeError):
    pass


@dataclass
class SqueezingReport:
    family: str
    variances: dict
    commutator_bound: dict
    squeezed: dict
    margins: dict
    meta: dict
    closed_form: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    leakage: float = 0.0

    def to_dict(self):
        return asdict(self)


def _meta(req):
    return {"xi": [req.xi.real, req.xi.imag], "charge": req.charge,
            "deform": req.deform.describe(), "parity": req.parity, "dual": req.dual}


def _prepared(req):
    state, norms = build_state(req)
    # spare room so raising operators do not fall off the truncation
    return state.padded(state.nmax + _PAD), norms, req.effective_deform


def _agree(label, a, b, tol=AGREE_TOL):
    scale = max(1.0, abs(a), abs(b))
    if not abs(a - b) <= tol * scale:
        raise ClosedFormMismatch(f"closed-form mismatch in {label}: {a!r} vs {b!r}")


def _variance(name, state, deform):
    op = sector_op(name, deform)
    m1 = expect(op, state)
    m2 = expect(op @ op, state)
    return float(np.real(m2 - m1 * m1))


# --- SU_f(1,1) ---------------------------------------------------------

def su_f11_report(req, tol=AGREE_TOL):
    """X1/X2 variances against the bound ``|<[K-, K-^dag]>|/4``.

    Even and odd states use the closed forms with tanh-bar and coth-bar; a
    full-parity state has both variances equal to the bound.
    """
    state, norms, deform = _prepared(req)
    c = float(np.real(expect(sector_op("[K-,K-d]", deform), state)))
    v1 = _variance("X1", state, deform)
    v2 = _variance("X2", state, deform)
    x = abs(req.xi) ** 2
    cos2 = math.cos(2.0 * np.angle(req.xi)) if req.xi != 0 else 1.0
    ratio = {"even": norms.tanh, "odd": norms.coth, "full": None}[req.parity]
    if req.parity == "full":
        closed = {"X1": 0.25 * c, "X2": 0.25 * c}
        conditions = {}
    else:
        closed = {"X1": 0.25 * c + 0.5 * x * (cos2 + ratio),
                  "X2": 0.25 * c + 0.5 * x * (-cos2 + ratio)}
        conditions = {"+cos2theta": cos2 + ratio, "-cos2theta": -cos2 + ratio}
        # the K- K-^dag pair must also match the series form
        kk = float(np.real(expect(sector_op("K-d", deform) @ sector_op("K-", deform), state)))
        _agree("<K-^dag K->", kk, x * ratio, tol)
    _agree("Var X1", v1, closed["X1"], tol)
    _agree("Var X2", v2, closed["X2"], tol)
    bound = 0.25 * abs(c)
    margins = {"X1": v1 - bound, "X2": v2 - bound}
    return SqueezingReport(
        "SUf11", {"X1": v1, "X2": v2}, {"X": bound},
        {k: bool(m < -GUARD) for k, m in margins.items()}, margins, _meta(req),
        closed_form=closed,
        extra={"commutator": c, "conditions": conditions,
               "uncertainty_product_excess": v1 * v2 - bound * bound},
        leakage=state.leakage)


# --- single-mode --------------------------------------------------------

def _single_mode_parts(state, deform):
    vanishing = {}
    for label, op in (("A1", sector_op("A1", deform)), ("A2", sector_op("A2", deform)),
                      ("A1^2", sector_op("A1", deform) @ sector_op("A1", deform)),
                      ("A2^2", sector_op("A2", deform) @ sector_op("A2", deform)),
                      ("A1^dag A2", sector_op("A1d", deform) @ sector_op("A2", deform))):
        e = expectation(op, state)
        vanishing[label] = {"value": abs(e.value), "sector_orthogonal": e.sector_orthogonal}
    c1 = float(np.real(expect(sector_op("[A1,A1d]", deform), state)))
    c2 = float(np.real(expect(sector_op("[A2,A2d]", deform), state)))
    a1 = float(np.real(expect(sector_op("A1d", deform) @ sector_op("A1", deform), state)))
    a2 = float(np.real(expect(sector_op("A2d", deform) @ sector_op("A2", deform), state)))
    return vanishing, c1, c2, a1, a2


def single_mode_report(req, tol=AGREE_TOL):
    """Y (mode 1) and Z (mode 2) variances against ``|<[A_i, A_i^dag]>|/4``.

    Within a charge sector ``<A_i>``, ``<A_i^2>`` and ``<A_1^dag A_2>`` all
    vanish, so each variance is ``(<[A_i, A_i^dag]> + 2 <A_i^dag A_i>)/4``
    and exceeds the bound by ``<A_i^dag A_i>/2``.
    """
    state, _, deform = _prepared(req)
    vanishing, c1, c2, a1, a2 = _single_mode_parts(state, deform)
    var = {n: _variance(n, state, deform) for n in ("Y1", "Y2", "Z1", "Z2")}
    closed = {"Y1": 0.25 * (c1 + 2 * a1), "Y2": 0.25 * (c1 + 2 * a1),
              "Z1": 0.25 * (c2 + 2 * a2), "Z2": 0.25 * (c2 + 2 * a2)}
    for k in var:
        _agree(f"Var {k}", var[k], closed[k], tol)
    bound = {"Y": 0.25 * abs(c1), "Z": 0.25 * abs(c2)}
    margins = {k: var[k] - bound[k[0]] for k in var}
    return SqueezingReport(
        "SingleMode", var, bound, {k: bool(m < -GUARD) for k, m in margins.items()},
        margins, _meta(req), closed_form=closed,
        extra={"vanishing": vanishing, "excess_mode1": 0.5 * a1, "excess_mode2": 0.5 * a2},
        leakage=state.leakage)


# --- two-mode -------------------------------------------------------------

def two_mode_report(req, tol=AGREE_TOL):
    """W1/W2 variances against ``|<[A1,A1^dag]> + <[A2,A2^dag]>|/8``.

    ``Var W = (Var Y + Var Z)/2 +- Re<A1 A2>/2``; the last term vanishes for
    even and odd states, leaving a strict excess, but not for full-parity
    states, which can be squeezed.  (The criterion is the deformed
    two-mode squeezing condition.)
    """
    state, _, deform = _prepared(req)
    _, c1, c2, a1, a2 = _single_mode_parts(state, deform)
    k = complex(expect(sector_op("K-", deform), state))
    var = {n: _variance(n, state, deform) for n in ("W1", "W2")}
    vy1, vz1 = _variance("Y1", state, deform), _variance("Z1", state, deform)
    base = 0.125 * (c1 + c2) + 0.25 * (a1 + a2)
    closed = {"W1": base + 0.5 * k.real, "W2": base - 0.5 * k.real}
    for n in var:
        _agree(f"Var {n}", var[n], closed[n], tol)
    if req.parity != "full":
        _agree("<K->", abs(k), 0.0, tol)
        _agree("Var W1 = (Var Y1 + Var Z1)/2", var["W1"], 0.5 * (vy1 + vz1), tol)
    bound = 0.125 * abs(c1 + c2)
    margins = {n: var[n] - bound for n in var}
    return SqueezingReport(
        "TwoMode", var, {"W": bound}, {n: bool(m < -GUARD) for n, m in margins.items()},
        margins, _meta(req), closed_form=closed,
        extra={"<A1A2>": [k.real, k.imag], "criterion": "two-mode f-squeezing"},
        leakage=state.leakage)


def two_mode_squeezing_scan(deform, charge=0, moduli=None, angles=(0.0, math.pi)):
    """Full-parity points that are two-mode squeezed, as (|xi|, theta, W, margin)."""
    if moduli is None:
        moduli = np.linspace(0.05, 2.0, 40)
    hits = []
    for r in moduli:
        for th in angles:
            rep = two_mode_report(StateRequest(r * np.exp(1j * th), charge, "full", deform))
            for n, sq in rep.squeezed.items():
                if sq:
                    hits.append((float(r), float(th), n, rep.margins[n]))
    return hits


# --- antibunching --------------------------------------------------------

@dataclass
class AntibunchReport:
    g2: float
    g2_closed: float
    antibunched: bool
    meta: dict

    def to_dict(self):
        return asdict(self)


def antibunch_report(req, tol=AGREE_TOL):
    """``g2(0) = <K-^dag^2 K-^2> / <K-^dag K->^2``; antibunched iff below 1."""
    state, norms, deform = _prepared(req)
    km = sector_op("K-", deform)
    num = float(np.real(expect(km.dag() @ km.dag() @ km @ km, state)))
    den = float(np.real(expect(km.dag() @ km, state)))
    if not den > 0:
        raise ValueError("correlation undefined at vacuum")
    g2 = num / den ** 2
    closed = {"full": 1.0, "even": norms.coth ** 2, "odd": norms.tanh ** 2}[req.parity]
    _agree("g2(0)", g2, closed, tol)
    return AntibunchReport(g2, closed, bool(g2 < 1.0 - GUARD), _meta(req))


# --- coth-bar scan ------------------------------------------------------

def default_x_grid(points=400, lo=1e-3, hi=200.0):
    return np.geomspace(lo, hi, points)


def coth_bar(x, q, p):
    """coth-bar for the power-law deformation f(n)**2 = n**(p-1)."""
    return normalization(float(x), int(q), DeformationSpec.power_law(p)).coth


def coth_scan(q, p, xs=None):
    """``(x, coth-bar, coth-bar < 1)`` rows over the grid."""
    xs = default_x_grid() if xs is None else np.asarray(xs, dtype=float)
    vals = np.array([coth_bar(x, q, p) for x in xs])
    return xs, vals, vals < 1.0


def sub_unity_windows(xs, vals):
    """Maximal runs of grid points with coth-bar < 1, as (x_first, x_last)."""
    below = np.asarray(vals) < 1.0
    out = []
    start = None
    for i, b in enumerate(below):
        if b and start is None:
            start = i
        if not b and start is not None:
            out.append((float(xs[start]), float(xs[i - 1])))
            start = None
    if start is not None:
        out.append((float(xs[start]), float(xs[-1])))
    return out
