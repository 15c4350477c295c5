"""Deformed two-mode ladder operators restricted to fixed-charge sectors.

A state of charge q is stored as amplitudes ``c[n]`` over the pair index
n = 0..nmax.  Index n stands for the two-mode Fock vector

    |n + q, n>   if q >= 0
    |n, n - q>   if q <= 0

so the mode occupations are ``n1 = n + max(q, 0)`` and
``n2 = n + max(-q, 0)``.  Operators never become dense matrices: each
elementary operator is a scale plus a constant shift of the pair index,
possibly moving the state to a neighbouring sector.  Amplitude that is
pushed past ``nmax`` is discarded and its l2 weight is accumulated in
``leakage``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .deform import DeformationSpec

__all__ = [
    "ChargeSectorState",
    "SectorOperator",
    "Expectation",
    "ProbeTooCloseError",
    "apply_operator",
    "apply_word",
    "expectation",
    "expect",
    "commutator_check",
    "sector_matrix",
    "sector_op",
    "OPERATOR_NAMES",
]


class ProbeTooCloseError(ValueError):
    pass


def occupations(q, size):
    n = np.arange(size)
    return n + max(q, 0), n + max(-q, 0)


@dataclass(frozen=True)
class ChargeSectorState:
    """Amplitudes of a (truncated) charge-q state over the pair index."""

    charge: int
    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1-d sequence")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "charge", int(self.charge))

    @classmethod
    def basis(cls, charge, n, nmax):
        amps = np.zeros(nmax + 1, dtype=complex)
        amps[n] = 1.0
        return cls(charge, amps)

    @property
    def nmax(self):
        return self.amplitudes.size - 1

    def occupations(self):
        """Mode occupations (n1, n2) of each retained basis vector."""
        return occupations(self.charge, self.amplitudes.size)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        return ChargeSectorState(self.charge, self.amplitudes / self.norm(), self.leakage)

    def inner(self, other):
        """<self|other>; zero for different charges."""
        if self.charge != other.charge:
            return 0j
        a, b = _pad(self.amplitudes, other.amplitudes)
        return complex(np.vdot(a, b))

    def padded(self, nmax):
        amps = np.zeros(nmax + 1, dtype=complex)
        k = min(nmax, self.nmax) + 1
        amps[:k] = self.amplitudes[:k]
        return ChargeSectorState(self.charge, amps, self.leakage)

    def __add__(self, other):
        if self.charge != other.charge:
            raise ValueError("cannot add states from different charge sectors")
        a, b = _pad(self.amplitudes, other.amplitudes)
        return ChargeSectorState(self.charge, a + b, self.leakage + other.leakage)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, c):
        return ChargeSectorState(self.charge, self.amplitudes * c, self.leakage * abs(c))

    __rmul__ = __mul__


def _pad(a, b):
    size = max(a.shape[-1], b.shape[-1])
    if a.shape[-1] < size:
        a = np.concatenate([a, np.zeros(a.shape[:-1] + (size - a.shape[-1],), a.dtype)], axis=-1)
    if b.shape[-1] < size:
        b = np.concatenate([b, np.zeros(b.shape[:-1] + (size - b.shape[-1],), b.dtype)], axis=-1)
    return a, b


# --- elementary actions --------------------------------------------------
# Each entry returns (delta_n1, delta_n2, factor) for occupations (n1, n2).

def _lower(mode, tilde):
    def action(n1, n2, f):
        n = n1 if mode == 1 else n2
        lf = f.log_f(n)
        fac = np.sqrt(n) * np.exp(-lf if tilde else lf)
        return (-1, 0, fac) if mode == 1 else (0, -1, fac)
    return action


def _raise(mode, tilde):
    def action(n1, n2, f):
        n = (n1 if mode == 1 else n2) + 1
        lf = f.log_f(n)
        fac = np.sqrt(n) * np.exp(-lf if tilde else lf)
        return (1, 0, fac) if mode == 1 else (0, 1, fac)
    return action


def _number(mode):
    def action(n1, n2, f):
        return 0, 0, (n1 if mode == 1 else n2).astype(float)
    return action


def _comm_a(mode, tilde):
    # [A, A^dag] = (N+1) f^2(N+1) - N f^2(N); tilde version uses 1/f
    def action(n1, n2, f):
        n = n1 if mode == 1 else n2
        sign = -2.0 if tilde else 2.0
        val = (n + 1) * np.exp(sign * f.log_f(n + 1)) - n * np.exp(sign * f.log_f(n))
        return 0, 0, val
    return action


def _comm_k(n1, n2, f):
    # [K-, K-^dag] = (N1+1)f^2(N1+1)(N2+1)f^2(N2+1) - N1 f^2(N1) N2 f^2(N2)
    up = (n1 + 1) * f.f2(n1 + 1) * (n2 + 1) * f.f2(n2 + 1)
    down = n1 * f.f2(n1) * n2 * f.f2(n2)
    return 0, 0, up - down


def _identity(n1, n2, f):
    return 0, 0, np.ones(n1.shape)


ELEMENTARY = {
    "I": _identity,
    "A1": _lower(1, False), "A2": _lower(2, False),
    "A1d": _raise(1, False), "A2d": _raise(2, False),
    "At1": _lower(1, True), "At2": _lower(2, True),
    "At1d": _raise(1, True), "At2d": _raise(2, True),
    "N1": _number(1), "N2": _number(2),
    "[A1,A1d]": _comm_a(1, False), "[A2,A2d]": _comm_a(2, False),
    "[At1,At1d]": _comm_a(1, True), "[At2,At2d]": _comm_a(2, True),
    "[K-,K-d]": _comm_k,
}

ADJOINT = {"A1": "A1d", "A1d": "A1", "A2": "A2d", "A2d": "A2",
           "At1": "At1d", "At1d": "At1", "At2": "At2d", "At2d": "At2"}


def _apply_elementary(name, q, amps, deform):
    """Apply one elementary operator along the last axis of ``amps``."""
    size = amps.shape[-1]
    n1, n2 = occupations(q, size)
    d1, d2, _ = ELEMENTARY[name](n1[:1], n2[:1], deform)
    q_new = q + d1 - d2
    # new pair index = n1' - max(q', 0); a constant shift of n
    shift = max(q, 0) + d1 - max(q_new, 0)
    lo = max(0, -shift)
    hi = min(size, size - shift)
    out = np.zeros_like(amps)
    leak = 0.0
    if hi > lo:
        _, _, fac = ELEMENTARY[name](n1[lo:hi], n2[lo:hi], deform)
        out[..., lo + shift:hi + shift] = amps[..., lo:hi] * fac
    if lo > 0:
        # sources whose image index would be negative must be annihilated
        _, _, fac = ELEMENTARY[name](n1[:lo], n2[:lo], deform)
        if np.any(fac != 0):
            raise AssertionError(f"{name} produced a negative pair index")
    if hi < size:
        try:
            _, _, fac = ELEMENTARY[name](n1[hi:], n2[hi:], deform)
            leak = float(np.linalg.norm(amps[..., hi:] * fac))
        except IndexError:
            leak = math.inf if np.any(amps[..., hi:] != 0) else 0.0
    return q_new, out, leak


def apply_word(word, q, amps, deform):
    """Apply a product of elementary operators (rightmost first).

    ``amps`` may carry leading batch axes; the pair index is the last axis.
    Returns ``(new_charge, new_amps, leakage)``.
    """
    amps = np.asarray(amps, dtype=complex)
    size = amps.shape[-1]
    # room for every intermediate, so the loss is measured on the final image
    pad = np.zeros(amps.shape[:-1] + (len(word),), dtype=complex)
    work = np.concatenate([amps, pad], axis=-1)
    try:
        q_out, work, leak = _apply_steps(word, q, work, deform)
    except IndexError:
        # tabulated f too short for the padding: truncate after every factor
        return _apply_steps(word, q, amps, deform)
    leak += float(np.linalg.norm(work[..., size:]))
    return q_out, work[..., :size], leak


def _apply_steps(word, q, amps, deform):
    leak = 0.0
    for name in reversed(word):
        q, amps, dl = _apply_elementary(name, q, amps, deform)
        leak += dl
    return q, amps, leak


class SectorOperator:
    """Linear combination of products of elementary deformed operators.

    ``A @ B`` composes (B acts first), ``+``/``-``/scalar ``*`` combine, and
    ``dag()`` takes the adjoint.  ``label`` is used to look up closed-form
    commutators in :func:`commutator_check`.
    """

    def __init__(self, terms, deform, label=None):
        self.terms = {tuple(w): complex(c) for w, c in dict(terms).items() if c != 0}
        self.deform = deform
        self.label = label
        for w in self.terms:
            for name in w:
                if name not in ELEMENTARY:
                    raise ValueError(f"unknown operator descriptor {name!r}")

    def _check(self, other):
        if other.deform != self.deform:
            raise ValueError("operators carry different deformations")

    def __matmul__(self, other):
        self._check(other)
        terms = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                w = wa + wb
                terms[w] = terms.get(w, 0) + ca * cb
        return SectorOperator(terms, self.deform)

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms.get(w, 0) + c
        return SectorOperator(terms, self.deform)

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, SectorOperator):
            return self @ c
        return SectorOperator({w: v * c for w, v in self.terms.items()}, self.deform)

    __rmul__ = __mul__

    def dag(self):
        terms = {}
        for w, c in self.terms.items():
            wd = tuple(ADJOINT.get(n, n) for n in reversed(w))
            terms[wd] = terms.get(wd, 0) + np.conj(c)
        return SectorOperator(terms, self.deform, _ADJOINT_LABEL.get(self.label))

    def __repr__(self):
        body = " + ".join(f"({c:g})*{'.'.join(w) or 'I'}" for w, c in self.terms.items())
        return f"SectorOperator[{self.label or body}; {self.deform}]"


def _word(*names, c=1.0):
    return {tuple(names): c}


def _combine(*parts):
    out = {}
    for p in parts:
        for w, c in p.items():
            out[w] = out.get(w, 0) + c
    return out


_S8 = 1.0 / math.sqrt(8.0)
_NAMED = {
    "I": _word("I"),
    "A1": _word("A1"), "A2": _word("A2"), "A1d": _word("A1d"), "A2d": _word("A2d"),
    "At1": _word("At1"), "At2": _word("At2"), "At1d": _word("At1d"), "At2d": _word("At2d"),
    "N1": _word("N1"), "N2": _word("N2"),
    "Q": _combine(_word("N1"), _word("N2", c=-1.0)),
    "K-": _word("A1", "A2"),
    "K+": _word("At1d", "At2d"),
    "K0": _combine(_word("N1", c=0.5), _word("N2", c=0.5), _word("I", c=0.5)),
    "K-d": _word("A2d", "A1d"),
    "K+d": _word("At2", "At1"),
    "X1": _combine(_word("A2d", "A1d", c=0.5), _word("A1", "A2", c=0.5)),
    "X2": _combine(_word("A2d", "A1d", c=0.5j), _word("A1", "A2", c=-0.5j)),
    "Y1": _combine(_word("A1d", c=0.5), _word("A1", c=0.5)),
    "Y2": _combine(_word("A1d", c=0.5j), _word("A1", c=-0.5j)),
    "Z1": _combine(_word("A2d", c=0.5), _word("A2", c=0.5)),
    "Z2": _combine(_word("A2d", c=0.5j), _word("A2", c=-0.5j)),
    "W1": _combine(*(_word(n, c=_S8) for n in ("A1d", "A2d", "A1", "A2"))),
    "W2": _combine(_word("A1d", c=1j * _S8), _word("A2d", c=1j * _S8),
                   _word("A1", c=-1j * _S8), _word("A2", c=-1j * _S8)),
    "[A1,A1d]": _word("[A1,A1d]"), "[A2,A2d]": _word("[A2,A2d]"),
    "[At1,At1d]": _word("[At1,At1d]"), "[At2,At2d]": _word("[At2,At2d]"),
    "[K-,K-d]": _word("[K-,K-d]"),
}
OPERATOR_NAMES = tuple(_NAMED)
_ADJOINT_LABEL = {**ADJOINT, "K-": "K-d", "K-d": "K-", "K+": "K+d", "K+d": "K+"}
_ADJOINT_LABEL.update({n: n for n in ("I", "N1", "N2", "Q", "K0", "X1", "X2", "Y1", "Y2",
                                      "Z1", "Z2", "W1", "W2", "[K-,K-d]")})


def sector_op(name, deform=None):
    """Named operator, e.g. ``sector_op("K-", spec)`` for K_- = A1 A2."""
    if name not in _NAMED:
        raise ValueError(f"unknown operator descriptor {name!r}")
    return SectorOperator(_NAMED[name], deform or DeformationSpec.identity(), label=name)


def apply_operator(op, state):
    """Image of ``state`` under ``op``; must land in a single charge sector."""
    result = None
    q_out = None
    leak = state.leakage
    for word, c in op.terms.items():
        q, amps, dl = apply_word(word, state.charge, state.amplitudes, op.deform)
        leak += abs(c) * dl
        if q_out is None:
            q_out, result = q, c * amps
        elif q != q_out:
            raise ValueError(
                f"operator maps charge {state.charge} to several sectors ({q_out}, {q})")
        else:
            result = result + c * amps
    if result is None:
        return ChargeSectorState(state.charge, np.zeros_like(state.amplitudes), leak)
    return ChargeSectorState(q_out, result, leak)


@dataclass(frozen=True)
class Expectation:
    value: complex
    leakage: float = 0.0
    sector_orthogonal: bool = False

    def __complex__(self):
        return complex(self.value)

    @property
    def real(self):
        return float(np.real(self.value))


def expectation(op, state):
    """``<state| op |state>`` with truncation bookkeeping.

    Terms that leave the sector contribute an exact zero; if every term does
    so the result is flagged ``sector_orthogonal``.
    """
    total = 0j
    leak = 0.0
    orthogonal = True
    for word, c in op.terms.items():
        q, amps, dl = apply_word(word, state.charge, state.amplitudes, op.deform)
        if q != state.charge:
            continue
        orthogonal = False
        leak += abs(c) * dl
        total += c * np.vdot(state.amplitudes, amps)
    if orthogonal:
        return Expectation(0j, 0.0, True)
    return Expectation(complex(total), leak, False)


def expect(op, state):
    return expectation(op, state).value


# --- commutator identities -----------------------------------------------

def _closed_form_commutators():
    """Map (labelA, labelB) -> right-hand side operator terms of [A, B]."""
    table = {}
    for i in ("1", "2"):
        N = "N" + i
        for a in ("A", "At"):
            table[(N, a + i)] = _combine(_word(a + i, c=-1.0))
            table[(N, a + i + "d")] = _word(a + i + "d")
        table[("A" + i, "A" + i + "d")] = _word(f"[A{i},A{i}d]")
        table[("At" + i, "At" + i + "d")] = _word(f"[At{i},At{i}d]")
    k0 = _NAMED["K0"]
    table[("K+", "K-")] = {w: -2 * c for w, c in k0.items()}
    table[("K0", "K+")] = _NAMED["K+"]
    table[("K0", "K-")] = {w: -c for w, c in _NAMED["K-"].items()}
    table[("K-d", "K+d")] = {w: -2 * c for w, c in k0.items()}
    table[("K0", "K-d")] = _NAMED["K-d"]
    table[("K0", "K+d")] = {w: -c for w, c in _NAMED["K+d"].items()}
    table[("K-", "K-d")] = _NAMED["[K-,K-d]"]
    table[("Q", "K-")] = {}
    table[("Q", "K+")] = {}
    table[("Q", "K0")] = {}
    return table


_COMMUTATORS = _closed_form_commutators()


def closed_form_commutator(label_a, label_b, deform):
    """Closed-form [A, B] for a known pair of named operators, or None."""
    if (label_a, label_b) in _COMMUTATORS:
        return SectorOperator(_COMMUTATORS[(label_a, label_b)], deform)
    if (label_b, label_a) in _COMMUTATORS:
        return SectorOperator(_COMMUTATORS[(label_b, label_a)], deform) * -1
    return None


def commutator_check(op_a, op_b, probe, rhs=None, scaled=True):
    """Norm of ``([A, B] - rhs) probe``.

    ``rhs`` defaults to the known closed form for the labelled pair.  With
    ``scaled`` the norm is divided by ``max(1, |AB probe|, |BA probe|)`` so
    that large ladder factors do not masquerade as errors.  The probe must
    vanish on its top two indices so that truncation cannot contaminate the
    comparison.
    """
    if np.any(probe.amplitudes[-2:] != 0):
        raise ProbeTooCloseError("probe too close to truncation")
    if rhs is None:
        rhs = closed_form_commutator(op_a.label, op_b.label, op_a.deform)
        if rhs is None:
            raise ValueError(f"no closed form known for [{op_a.label}, {op_b.label}]")

    def image(op):
        # images may leave the sector (e.g. [N1, A1] + A1), so group by charge
        out = {}
        for word, c in op.terms.items():
            q, amps, _ = apply_word(word, probe.charge, probe.amplitudes, op_a.deform)
            out[q] = out.get(q, 0) + c * amps
        return out

    def norm(vecs):
        return math.sqrt(sum(np.linalg.norm(v) ** 2 for v in vecs.values()))

    diff = image(op_a @ op_b - op_b @ op_a - rhs)
    resid = norm(diff)
    if scaled:
        resid /= max(1.0, norm(image(op_a @ op_b)), norm(image(op_b @ op_a)))
    return float(resid)


def sector_matrix(op, charge, nmax):
    """Dense matrix of ``op`` from sector ``charge`` to its image sector.

    Only meant for small oracles and bra-side checks.
    """
    eye = np.eye(nmax + 1, dtype=complex)
    out = None
    q_out = None
    for word, c in op.terms.items():
        q, amps, _ = apply_word(word, charge, eye, op.deform)
        if q_out is None:
            q_out, out = q, c * amps
        elif q != q_out:
            raise ValueError("operator maps to several sectors")
        else:
            out = out + c * amps
    # rows of `amps` are images of basis vectors; transpose to act on columns
    return q_out, out.T
