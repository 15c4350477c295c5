"""Differential-operator realisation of the ladder operators on formal series.

The unnormalised even/odd kets of a charge sector are power series in xi
whose coefficients are kets.  Stacking them gives a two-component column;
every ladder operator then acts as a differential operator in xi combined
with the component swap ``M``.  This module represents such ket-valued
series exactly (integer exponents, explicit offsets) and checks each
realisation against the Fock-space action.

Conventions
-----------
``Series.coeffs`` has the exponent on axis 0; row ``r`` holds the
coefficient of ``xi**(offset + r)``.  Trailing axes are arbitrary: a scalar
series has none, a component pair has one axis of length 2 and a
ket-valued pair adds the sector basis as the last axis.

Operator expressions are composed right to left, as written in formulas:
``f2_dxi . d . xi**(q+1)`` means multiply by ``xi**(q+1)`` first.
``D`` turns products around, ``D(AB) = D(B) D(A)``, so the series images of
the generators obey the algebra with the order of every commutator reversed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deform import DeformationSpec
from .fock import apply_word, sector_matrix, sector_op
from .states import unnormalized_amplitudes

__all__ = [
    "Series",
    "NotDivisibleError",
    "diff_op_apply",
    "q_derivative",
    "ket_series",
    "TABLE_ROWS",
    "row_expression",
    "row_applicable",
    "verify_action_table",
    "table_report",
    "GENERATORS",
    "generator_expression",
    "d_algebra_generators",
    "verification_report",
]

TOL = 1e-12


class NotDivisibleError(ValueError):
    pass


def _bracket(e, q):
    """[e] for an integer array e (``[e] = e`` at q = 1)."""
    e = np.asarray(e, dtype=float)
    if q == 1:
        return e
    s = math.log(q)
    return np.sinh(e * s) / math.sinh(s)


@dataclass
class Series:
    coeffs: np.ndarray
    offset: int = 0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)
        self.offset = int(self.offset)

    @classmethod
    def monomial(cls, n, value=1.0):
        return cls(np.array([value], dtype=complex), n)

    @property
    def exponents(self):
        return np.arange(self.offset, self.offset + self.coeffs.shape[0])

    @property
    def degree(self):
        return self.offset + self.coeffs.shape[0] - 1

    def _row_scale(self, s):
        return Series(self.coeffs * np.reshape(s, (-1,) + (1,) * (self.coeffs.ndim - 1)),
                      self.offset)

    def _support(self):
        rows = self.coeffs.reshape(self.coeffs.shape[0], -1)
        return np.any(rows != 0, axis=1)

    def lowest(self):
        """Smallest exponent with a nonzero coefficient (None if zero)."""
        nz = np.nonzero(self._support())[0]
        return None if nz.size == 0 else int(self.offset + nz[0])

    # -- elementary maps ---------------------------------------------------
    def pow(self, k, strict=False):
        """Multiply by ``xi**k``.

        With ``strict`` a negative ``k`` must not push support below
        exponent zero.
        """
        out = Series(self.coeffs, self.offset + int(k))
        if strict and k < 0:
            low = out.lowest()
            if low is not None and low < 0:
                raise NotDivisibleError(f"series not divisible by xi^{-k}")
        return out

    def mul_xi(self):
        return self.pow(1)

    def ddxi(self):
        return Series(self._row_scale(self.exponents).coeffs, self.offset - 1)

    def euler(self):
        """``xi d/dxi``."""
        return self._row_scale(self.exponents)

    def _f_power(self, args, power, deform):
        sup = self._support()
        if np.any(sup & (args < 0)):
            raise NotDivisibleError("deformation evaluated at a negative argument")
        vals = np.ones(args.shape)
        ok = args >= 0
        vals[ok] = np.exp(power * deform.log_f(args[ok]))
        return self._row_scale(vals)

    def f_ddxi_xi(self, deform, power=1):
        """``f(d/dxi xi)**power``: scales xi^n by f(n+1)**power."""
        return self._f_power(self.exponents + 1, power, deform)

    def f_xi_ddxi(self, deform, power=1):
        """``f(xi d/dxi)**power``: scales xi^n by f(n)**power."""
        return self._f_power(self.exponents, power, deform)

    def qdiff(self, q):
        """``[d/dxi xi] xi^-1``: sends xi^n to [n] xi^(n-1)."""
        return Series(self._row_scale(_bracket(self.exponents, q)).coeffs, self.offset - 1)

    def M(self):
        """Swap the even and odd components (axis 1)."""
        return Series(self.coeffs[:, ::-1, ...], self.offset)

    # -- arithmetic ----------------------------------------------------------
    def _aligned(self, other):
        lo = min(self.offset, other.offset)
        hi = max(self.degree, other.degree)
        shape = (hi - lo + 1,) + np.broadcast_shapes(self.coeffs.shape[1:], other.coeffs.shape[1:])
        a = np.zeros(shape, dtype=complex)
        b = np.zeros(shape, dtype=complex)
        a[self.offset - lo: self.offset - lo + self.coeffs.shape[0]] = self.coeffs
        b[other.offset - lo: other.offset - lo + other.coeffs.shape[0]] = other.coeffs
        return a, b, lo

    def __add__(self, other):
        a, b, lo = self._aligned(other)
        return Series(a + b, lo)

    def __sub__(self, other):
        a, b, lo = self._aligned(other)
        return Series(a - b, lo)

    def __mul__(self, c):
        return Series(self.coeffs * c, self.offset)

    __rmul__ = __mul__

    def window(self, lo, hi):
        """Coefficient block for exponents lo..hi (zero padded)."""
        shape = (hi - lo + 1,) + self.coeffs.shape[1:]
        out = np.zeros(shape, dtype=complex)
        a = max(lo, self.offset)
        b = min(hi, self.degree)
        if b >= a:
            out[a - lo:b - lo + 1] = self.coeffs[a - self.offset:b - self.offset + 1]
        return out


def diff_op_apply(kind, coeffs, deform=None, k=None, q=None):
    """Apply one elementary operator to a scalar series starting at xi^0.

    ``kind`` is one of ``fOfDdxiXi``, ``fOfXiDdxi``, ``ddxi``, ``multXi``,
    ``powXi`` (needs ``k``) or ``qDiff`` (needs ``q``).  The result again
    starts at xi^0; producing a negative exponent raises
    :class:`NotDivisibleError`.
    """
    s = Series(np.asarray(coeffs, dtype=complex), 0)
    if kind == "fOfDdxiXi":
        out = s.f_ddxi_xi(deform or DeformationSpec.identity())
    elif kind == "fOfXiDdxi":
        out = s.f_xi_ddxi(deform or DeformationSpec.identity())
    elif kind == "ddxi":
        out = s.ddxi()
    elif kind == "multXi":
        out = s.mul_xi()
    elif kind == "powXi":
        out = s.pow(k, strict=True)
    elif kind == "qDiff":
        out = s.qdiff(q)
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    low = out.lowest()
    if low is not None and low < 0:
        raise NotDivisibleError("series not divisible by xi^1")
    return out.window(0, max(out.degree, 0))


def q_derivative(func, xi, q):
    """``(g(q xi) - g(xi/q)) / ((q - 1/q) xi)`` for a callable g."""
    return (func(q * xi) - func(xi / q)) / ((q - 1.0 / q) * xi)


# --- ket-valued series --------------------------------------------------

def ket_series(q, deform, degree, pad=4):
    """The column (||q>_e, ||q>_o) as a ket-valued series.

    Shape ``(degree + 1, 2, degree + 1 + pad)``: exponent, component, pair
    index.  The coefficient of xi^n is supported on pair index n and on the
    component matching the parity of n.  ``pad`` spare basis slots keep
    raising operators from running off the truncation.
    """
    c = unnormalized_amplitudes(1.0, q, "full", deform, degree)
    nb = degree + 1 + pad
    out = np.zeros((degree + 1, 2, nb), dtype=complex)
    n = np.arange(degree + 1)
    out[n, n % 2, n] = c
    return Series(out, 0)


# --- Fock-side action table -------------------------------------------

TABLE_ROWS = ("A1", "A2", "A1d", "A2d", "N1", "N2", "At1", "At2", "At1d", "At2d")
_TARGET = {"A1": -1, "A2": 1, "A1d": 1, "A2d": -1, "N1": 0, "N2": 0,
           "At1": -1, "At2": 1, "At1d": 1, "At2d": -1}


def row_applicable(row, q, column):
    """A column covers the sectors whose charge keeps its sign across the map."""
    t = q + _TARGET[row]
    if column == "positive":
        return q >= 0 and t >= 0
    if column == "negative":
        return q <= 0 and t <= 0
    raise ValueError(f"column must be 'positive' or 'negative', got {column!r}")


def row_expression(row, q, column, deform):
    """``(target_charge, text, fn)`` with fn acting on the target-sector series."""
    f2 = lambda s: s.f_ddxi_xi(deform, 2)      # noqa: E731
    if2 = lambda s: s.f_ddxi_xi(deform, -2)    # noqa: E731
    t = q + _TARGET[row]
    pos = {
        "A1": ("||q-1>", lambda s: s),
        "A2": ("xi M ||q+1>", lambda s: s.M().mul_xi()),
        "A1d": ("xi^-q f2(d xi) d xi^(q+1) ||q+1>",
                lambda s: f2(s.pow(q + 1).ddxi()).pow(-q)),
        "A2d": ("f2(d xi) d M ||q-1>", lambda s: f2(s.M().ddxi())),
        "N1": ("(xi d + q) ||q>", lambda s: s.euler() + s * q),
        "N2": ("xi d ||q>", lambda s: s.euler()),
        "At1": ("xi^(-q+1) f2(d xi)^-1 xi^(q-1) ||q-1>",
                lambda s: if2(s.pow(q - 1)).pow(-q + 1)),
        "At2": ("xi f2(d xi)^-1 M ||q+1>", lambda s: if2(s.M()).mul_xi()),
        "At1d": ("(xi d + q + 1) ||q+1>", lambda s: s.euler() + s * (q + 1)),
        "At2d": ("d M ||q-1>", lambda s: s.M().ddxi()),
    }
    neg = {
        "A1": ("xi M ||q-1>", lambda s: s.M().mul_xi()),
        "A2": ("||q+1>", lambda s: s),
        "A1d": ("f2(d xi) d M ||q+1>", lambda s: f2(s.M().ddxi())),
        "A2d": ("xi^q f2(d xi) d xi^(-q+1) ||q-1>",
                lambda s: f2(s.pow(-q + 1).ddxi()).pow(q)),
        "N1": ("xi d ||q>", lambda s: s.euler()),
        "N2": ("(xi d - q) ||q>", lambda s: s.euler() - s * q),
        "At1": ("xi f2(d xi)^-1 M ||q-1>", lambda s: if2(s.M()).mul_xi()),
        "At2": ("xi^(q+1) f2(d xi)^-1 xi^(-q-1) ||q+1>",
                lambda s: if2(s.pow(-q - 1)).pow(q + 1)),
        "At1d": ("d M ||q+1>", lambda s: s.M().ddxi()),
        "At2d": ("(xi d - q + 1) ||q-1>", lambda s: s.euler() + s * (1 - q)),
    }
    table = pos if column == "positive" else neg
    text, fn = table[row]
    return t, text, fn


def _scaled_residual(lhs, rhs, lo, hi):
    a = lhs.window(lo, hi)
    b = rhs.window(lo, hi)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def _fock_apply(word, q, series, deform):
    q_out, c, _ = apply_word(word, q, series.coeffs, deform)
    return q_out, Series(c, series.offset)


def _check_degree(q, degree):
    if degree < abs(q) + 6:
        raise ValueError(f"degree must be at least |q| + 6 = {abs(q) + 6}")


def verify_action_table(row, q, deform, degree=24, column="positive"):
    """Scaled max coefficient discrepancy between Fock and series sides.

    The comparison window stops two exponents below the truncation, where
    both sides are complete.
    """
    _check_degree(q, degree)
    if not row_applicable(row, q, column):
        raise ValueError(f"row {row} {column} column does not cover q = {q}")
    t, _, fn = row_expression(row, q, column, deform)
    q_out, lhs = _fock_apply((row,), q, ket_series(q, deform, degree), deform)
    assert q_out == t
    rhs = fn(ket_series(t, deform, degree))
    return _scaled_residual(lhs, rhs, 0, degree - 2)


def table_report(qs=(0, 1, 3, -2), deforms=None, degree=24, tol=TOL):
    """Every row, both columns, each charge and deformation."""
    if deforms is None:
        deforms = [DeformationSpec.identity(), DeformationSpec.power_law(2)]
    out = []
    for deform in deforms:
        for q in qs:
            for row in TABLE_ROWS:
                for column in ("positive", "negative"):
                    rec = {"row": row, "column": column, "charge": q,
                           "deform": str(deform),
                           "expression": row_expression(row, q, column, deform)[1]}
                    if row_applicable(row, q, column):
                        r = verify_action_table(row, q, deform, degree, column)
                        rec.update(applicable=True, residual=r, passed=bool(r < tol))
                    else:
                        rec.update(applicable=False, residual=None, passed=None)
                    out.append(rec)
    return out


# --- generators -------------------------------------------------------

GENERATORS = {
    "K-": (("A1", "A2"),),
    "K+": (("At1d", "At2d"),),
    "K0": None,
    "K-d": (("A2d", "A1d"),),
    "K+d": (("At2", "At1"),),
}
_GEN_TEXT = {
    "K-": "xi M",
    "K+": "d (xi d + |q|) M",
    "K0": "(1/2)(2 xi d + |q| + 1) I",
    "K-d": "xi^-|q| f2(d xi) d xi^(|q|+1) f2(d xi) d M",
    "K+d": "xi^(-|q|+1) f2(d xi)^-1 xi^|q| f2(d xi)^-1 M",
}


def generator_expression(name, q, deform):
    """Series image ``D(K)`` of a generator as a callable on series."""
    a = abs(q)
    f2 = lambda s: s.f_ddxi_xi(deform, 2)      # noqa: E731
    if2 = lambda s: s.f_ddxi_xi(deform, -2)    # noqa: E731
    if name == "K-":
        return lambda s: s.M().mul_xi()
    if name == "K+":
        return lambda s: (s.M().euler() + s.M() * a).ddxi()
    if name == "K0":
        return lambda s: (s.euler() * 2.0 + s * (a + 1)) * 0.5
    if name == "K-d":
        return lambda s: f2(f2(s.M().ddxi()).pow(a + 1).ddxi()).pow(-a)
    if name == "K+d":
        return lambda s: if2(if2(s.M()).pow(a)).pow(1 - a)
    raise ValueError(f"unknown generator {name!r}")


def _fock_generator(name, q, series, deform):
    op = sector_op(name, deform)
    total = None
    q_out = None
    for word, c in op.terms.items():
        q_out, img = _fock_apply(word, q, series, deform)
        img = img * c
        total = img if total is None else total + img
    return q_out, total


def _random_pair_series(rng, degree):
    return Series(rng.standard_normal((degree + 1, 2)) + 1j * rng.standard_normal((degree + 1, 2)))


def _commutator(fa, fb, s):
    return fa(fb(s)) - fb(fa(s))


def _bra_residual(name, q, deform, degree):
    """Check <q|| A = [D(A^dag)]* <q|| through dense sector matrices.

    Left side: bra coefficients times the matrix of A (source sector chosen
    so that A lands in sector q).  Right side: the ket image of A^dag
    under its series realisation, conjugated.
    """
    adj = {"K-": "K-d", "K-d": "K-", "K+": "K+d", "K+d": "K+", "K0": "K0"}[name]
    ket = ket_series(q, deform, degree)
    nb = ket.coeffs.shape[-1]
    op = sector_op(name, deform)
    # sector feeding A into q: same as the sector A^dag maps q to
    q_src, _ = sector_matrix(sector_op(adj, deform), q, nb - 1)
    q_img, mat = sector_matrix(op, q_src, nb - 1)
    assert q_img == q
    bra = np.conj(ket.coeffs)
    lhs = Series(np.einsum("rci,ij->rcj", bra, mat), ket.offset)
    rhs_ket = generator_expression(adj, q, deform)(ket)
    rhs = Series(np.conj(rhs_ket.coeffs), rhs_ket.offset)
    return _scaled_residual(lhs, rhs, 0, degree - 3)


def d_algebra_generators(q, deform, degree=24, probes=3, seed=0):
    """Residuals of every generator realisation, the bra-side relation and the algebra.

    ``ket`` residuals compare ``K ||q>`` computed in Fock space with
    ``D(K) ||q>``.  ``bra`` residuals check ``<q|| K = [D(K^dag)]* <q||``.
    ``algebra`` residuals evaluate the commutation relations on random
    series probes with the operator order reversed, as the realisation
    requires; ``literal_order`` keeps the unreversed order for reference
    and is expected to fail by a sign.
    """
    _check_degree(q, degree)
    rng = np.random.default_rng(seed)
    ket = ket_series(q, deform, degree)
    out = {"charge": q, "deform": str(deform), "ket": {}, "bra": {}, "algebra": {},
           "literal_order": {}, "expressions": dict(_GEN_TEXT)}
    for name in GENERATORS:
        q_out, lhs = _fock_generator(name, q, ket, deform)
        assert q_out == q
        rhs = generator_expression(name, q, deform)(ket)
        out["ket"][name] = _scaled_residual(lhs, rhs, 0, degree - 3)
        out["bra"][name] = _bra_residual(name, q, deform, degree)

    D = {n: generator_expression(n, q, deform) for n in GENERATORS}
    # [K+,K-] = -2K0, [K0,K+-] = +-K+-, and the dual algebra, reversed under D
    relations = {
        "[K+,K-]=-2K0": (D["K-"], D["K+"], lambda s: D["K0"](s) * -2.0),
        "[K0,K+]=K+": (D["K+"], D["K0"], D["K+"]),
        "[K0,K-]=-K-": (D["K-"], D["K0"], lambda s: D["K-"](s) * -1.0),
        "[K-d,K+d]=-2K0": (D["K+d"], D["K-d"], lambda s: D["K0"](s) * -2.0),
        "[K0,K-d]=K-d": (D["K-d"], D["K0"], D["K-d"]),
        "[K0,K+d]=-K+d": (D["K+d"], D["K0"], lambda s: D["K+d"](s) * -1.0),
    }
    # the dual pair K-d, K+d only acts cleanly on the kets themselves (they
    # divide by powers of xi), so probe those on ||q>; the others on random series
    for label, (fa, fb, rhs) in relations.items():
        worst = 0.0
        samples = [ket] if "d" in label else [_random_pair_series(rng, degree)
                                               for _ in range(probes)]
        for s in samples:
            worst = max(worst, _scaled_residual(_commutator(fa, fb, s), rhs(s), 0, degree - 6))
        out["algebra"][label] = worst
    s = _random_pair_series(rng, degree)
    out["literal_order"]["[D(K0),D(K+)]=D(K+)"] = _scaled_residual(
        _commutator(D["K0"], D["K+"], s), D["K+"](s), 0, degree - 6)
    return out


def verification_report(qs=(0, 1, 3, -2), deforms=None, degree=24, tol=TOL, seed=0):
    if deforms is None:
        deforms = [DeformationSpec.identity(), DeformationSpec.power_law(2)]
    rows = table_report(qs, deforms, degree, tol)
    gens = [d_algebra_generators(q, d, degree, seed=seed) for d in deforms for q in qs]
    checked = [r for r in rows if r["applicable"]]
    worst = [r["residual"] for r in checked]
    for g in gens:
        worst += list(g["ket"].values()) + list(g["bra"].values()) + list(g["algebra"].values())
    return {
        "tolerance": tol,
        "degree": degree,
        "table": rows,
        "generators": gens,
        "max_residual": max(worst),
        "passed": bool(max(worst) < tol),
    }
