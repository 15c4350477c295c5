"""Deformation functions f(n) for f-deformed oscillators.

A :class:`DeformationSpec` names a family of nonlinearity functions and
evaluates ``f(n)`` on non-negative integers.  Everything that grows like a
factorial is kept in log space; ``f(n)!`` overflows double precision long
before the series we care about have converged.

Families
--------
identity
    ``f(n) = 1`` (ordinary bosons).
qdef
    ``f(n) = sqrt([n]/n)`` with the symmetric q-bracket ``[n]``.
power
    ``f(n) = 1/sqrt(n**(1-p))``, i.e. ``f(n)**2 = n**(p-1)`` for ``p >= 1``.
table
    explicit positive values ``f(1), f(2), ...``.

Every spec can be inverted (``spec.dual()``), giving the ``1/f`` deformation
used by the tilde operators and the dual states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DeformationSpec",
    "DegenerateBracketError",
    "RadiusUndeterminedError",
    "q_bracket",
    "log_q_bracket",
    "eval_f",
    "log_ffactorial",
    "convergence_radius",
    "load_table",
]

FAMILIES = ("identity", "qdef", "power", "table")


class DegenerateBracketError(ValueError):
    pass


class RadiusUndeterminedError(ValueError):
    pass


def q_bracket(x, q):
    """Symmetric q-number ``[x] = (q**x - q**-x) / (q - 1/q)``.

    Evaluated as ``sinh(x ln q) / sinh(ln q)`` so that q close to 1 does not
    lose digits to cancellation.

    >>> q_bracket(3, 2.0)
    5.25
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if q == 1:
        raise DegenerateBracketError("degenerate bracket; use limit x")
    s = math.log(q)
    return np.sinh(np.multiply(x, s)) / math.sinh(s)


def log_q_bracket(n, q):
    """``log [n]`` for positive n, stable for large n."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if q == 1:
        raise DegenerateBracketError("degenerate bracket; use limit x")
    s = abs(math.log(q))
    n = np.asarray(n, dtype=float)
    if np.any(n <= 0):
        raise ValueError("log_q_bracket needs n > 0")
    # log sinh(y) = y + log1p(-exp(-2y)) - log 2
    ns = n * s
    log_sinh_ns = ns + np.log1p(-np.exp(-2.0 * ns)) - math.log(2.0)
    log_sinh_s = s + math.log1p(-math.exp(-2.0 * s)) - math.log(2.0)
    return log_sinh_ns - log_sinh_s


@dataclass(frozen=True)
class DeformationSpec:
    """A deformation function f(n), optionally inverted to 1/f(n).

    Use the classmethod constructors rather than building instances by hand.
    ``f(0)`` is defined to be 1; it never contributes to operator actions
    because the ladder factors carry ``sqrt(0)``.
    """

    family: str = "identity"
    param: float | None = None
    table: tuple[float, ...] | None = field(default=None, repr=False)
    inverse: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown deformation family {self.family!r}")
        if self.family == "qdef":
            if self.param is None or not self.param > 0:
                raise ValueError("qdef needs q > 0")
            if self.param == 1:
                raise DegenerateBracketError(
                    "degenerate bracket; use limit x (identity family)")
        elif self.family == "power":
            if self.param is None or not self.param >= 1:
                raise ValueError("power law needs p >= 1")
        elif self.family == "table":
            if not self.table:
                raise ValueError("tabulated deformation needs at least one value")
            for k, v in enumerate(self.table, start=1):
                if not (math.isfinite(v) and v > 0):
                    raise ValueError(f"table entry f({k}) = {v} is not positive")

    # -- constructors -----------------------------------------------------
    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def qdeformed(cls, q):
        return cls("qdef", float(q))

    @classmethod
    def power_law(cls, p):
        return cls("power", float(p))

    @classmethod
    def tabulated(cls, values):
        return cls("table", table=tuple(float(v) for v in values))

    @classmethod
    def parse(cls, text):
        """Parse ``identity``, ``qdef:<q>``, ``power:<p>`` or ``table:<path>``."""
        text = text.strip()
        name, _, arg = text.partition(":")
        name = name.lower()
        if name in ("identity", "id", "1"):
            return cls.identity()
        if name in ("qdef", "q"):
            return cls.qdeformed(float(arg))
        if name in ("power", "pow"):
            return cls.power_law(float(arg))
        if name == "table":
            return load_table(arg)
        raise ValueError(f"cannot parse deformation {text!r}")

    def dual(self):
        """The 1/f deformation."""
        return DeformationSpec(self.family, self.param, self.table, not self.inverse)

    @property
    def table_size(self):
        return len(self.table) if self.family == "table" else None

    def describe(self):
        d = {"family": self.family, "inverse": self.inverse}
        if self.param is not None:
            d["param"] = self.param
        if self.family == "table":
            d["table"] = list(self.table)
        return d

    def __str__(self):
        if self.family == "identity":
            base = "identity"
        elif self.family == "table":
            base = f"table[{self.table_size}]"
        else:
            base = f"{self.family}:{self.param:g}"
        return f"1/{base}" if self.inverse else base

    # -- evaluation -------------------------------------------------------
    def log_f(self, n):
        """Vectorised ``log f(n)`` on non-negative integers (``log f(0) = 0``)."""
        n = np.asarray(n)
        if np.any(n < 0):
            raise ValueError("f(n) is only defined for n >= 0")
        out = np.zeros(n.shape, dtype=float)
        pos = n > 0
        if self.family == "identity" or not np.any(pos):
            pass
        elif self.family == "power":
            out[pos] = 0.5 * (self.param - 1.0) * np.log(n[pos])
        elif self.family == "qdef":
            npos = n[pos].astype(float)
            out[pos] = 0.5 * (log_q_bracket(npos, self.param) - np.log(npos))
        else:
            if np.max(n) > len(self.table):
                raise IndexError(
                    f"f({int(np.max(n))}) requested but table holds only "
                    f"{len(self.table)} values")
            tab = np.log(np.asarray(self.table))
            out[pos] = tab[n[pos] - 1]
        return -out if self.inverse else out

    def f(self, n):
        return np.exp(self.log_f(n))

    def f2(self, n):
        """``f(n)**2``."""
        return np.exp(2.0 * self.log_f(n))

    def log_ffact_table(self, nmax):
        """Array ``[log f(0)!, ..., log f(nmax)!]``."""
        if nmax < 0:
            raise ValueError("nmax must be non-negative")
        lf = self.log_f(np.arange(nmax + 1))
        lf[0] = 0.0
        return np.cumsum(lf)

    def is_nondecreasing(self, nmax=200):
        """True if ``f(n) <= f(n+1)`` for ``1 <= n < nmax`` (within rounding)."""
        top = nmax if self.table_size is None else min(nmax, self.table_size)
        lf = self.log_f(np.arange(1, top + 1))
        return bool(np.all(np.diff(lf) >= -1e-14))


def eval_f(spec, n):
    """f(n) for one non-negative integer n."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n}")
    return float(spec.f(int(n)))


def log_ffactorial(spec, n):
    """``log f(n)! = sum_{k=1..n} log f(k)``; zero for n = 0."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n}")
    n = int(n)
    if n == 0:
        return 0.0
    return float(math.fsum(spec.log_f(np.arange(1, n + 1))))


def convergence_radius(spec, tail=10, spread=1e-3):
    """Estimate ``lim n f(n)**2``, the bound on |xi| for normalisable states.

    Closed families are answered exactly.  For a table the last ``tail``
    values of ``n f(n)**2`` are inspected: a flat tail (relative spread below
    ``spread``) returns its mean, a tail that decays or grows like a power of
    n returns 0 or infinity, anything else raises
    :class:`RadiusUndeterminedError`.
    """
    if spec.family == "identity":
        return math.inf
    if spec.family == "power":
        if not spec.inverse:
            return math.inf
        # n / f^2 = n^(2-p)
        p = spec.param
        return math.inf if p < 2 else (1.0 if p == 2 else 0.0)
    if spec.family == "qdef":
        # [n] grows exponentially; n^2/[n] decays
        return 0.0 if spec.inverse else math.inf

    size = len(spec.table)
    if size < tail:
        raise RadiusUndeterminedError(
            f"radius undetermined: table has {size} < {tail} values")
    n = np.arange(size - tail + 1, size + 1)
    vals = n * spec.f2(n)
    mean = float(np.mean(vals))
    if (vals.max() - vals.min()) <= spread * abs(mean):
        return mean
    diffs = np.diff(vals)
    slope = np.polyfit(np.log(n), np.log(vals), 1)[0]
    if np.all(diffs < 0) and slope < -0.1:
        return 0.0
    if np.all(diffs > 0) and slope > 0.1:
        return math.inf
    raise RadiusUndeterminedError(
        "radius undetermined: n f(n)^2 has no recognisable limit in the table tail")


def load_table(path):
    """Read a one-column file of positive reals; data line k holds f(k).

    Blank lines and ``#`` comments are skipped.  Errors name the offending
    line number.
    """
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: cannot parse {line!r} as a number") from None
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{path}:{lineno}: f must be positive, got {v}")
        values.append(v)
    if not values:
        raise ValueError(f"{path}: no values found")
    return DeformationSpec.tabulated(values)
