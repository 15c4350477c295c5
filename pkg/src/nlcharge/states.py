"""Nonlinear charge coherent states and their even/odd superpositions.

For pair index n the (unnormalised) amplitude of every family is

    xi**n / ( sqrt(n! (n+|q|)!) * f(n)! * f(n+|q|)! )

with all n kept (``full``), only even n (``even``) or only odd n (``odd``).
Dual states replace f by 1/f.  Magnitudes are assembled as
``exp(log-magnitude - shift)`` and the phase ``n arg(xi)`` is attached
separately, so nothing overflows across the factorial growth.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .deform import DeformationSpec, convergence_radius
from .fock import ChargeSectorState, apply_word

__all__ = [
    "PARITIES",
    "StateRequest",
    "NormalizationSet",
    "SingleModeState",
    "Decomposition",
    "SchmidtProfile",
    "TruncationError",
    "log_series_terms",
    "normalization",
    "auto_nmax",
    "unnormalized_amplitudes",
    "build_state",
    "check_eigenpair",
    "overlap",
    "direct_overlap",
    "decompose_full",
    "build_single_mode_state",
    "combine_from_full",
    "generate_by_projection",
    "projection_fidelity",
    "min_projection_nodes",
    "schmidt_profile",
    "state_record",
]

PARITIES = ("full", "even", "odd")
AUTO_REL_TOL = 1e-30
AUTO_CAP = 400
_LOG_AUTO = math.log(AUTO_REL_TOL)


class TruncationError(RuntimeError):
    pass


def _check_parity(parity):
    parity = parity.lower()
    if parity not in PARITIES:
        raise ValueError(f"parity must be one of {PARITIES}, got {parity!r}")
    return parity


def _parity_mask(k, parity):
    if parity == "even":
        return k % 2 == 0
    if parity == "odd":
        return k % 2 == 1
    return np.ones(k.shape, dtype=bool)


@dataclass(frozen=True)
class StateRequest:
    xi: complex
    charge: int = 0
    parity: str = "even"
    deform: DeformationSpec = field(default_factory=DeformationSpec.identity)
    dual: bool = False
    nmax: int | None = None  # None selects automatic truncation

    def __post_init__(self):
        object.__setattr__(self, "xi", complex(self.xi))
        object.__setattr__(self, "charge", int(self.charge))
        object.__setattr__(self, "parity", _check_parity(self.parity))
        if self.parity == "odd" and self.xi == 0:
            raise ValueError("odd state undefined at xi=0 (zero vector)")
        if self.nmax is not None and self.nmax < 1:
            raise ValueError("nmax must be at least 1")
        radius = convergence_radius(self.effective_deform)
        if self.xi != 0 and not abs(self.xi) < radius:
            raise ValueError(
                f"|xi| = {abs(self.xi):g} is outside the convergence radius {radius:g} "
                f"of {self.effective_deform}")

    @property
    def effective_deform(self):
        return self.deform.dual() if self.dual else self.deform

    def replace(self, **kw):
        d = {k: getattr(self, k) for k in ("xi", "charge", "parity", "deform", "dual", "nmax")}
        d.update(kw)
        return StateRequest(**d)


def log_series_terms(x, q, deform, kmax):
    """``log`` of the normalisation-series terms t_k, k = 0..kmax.

    t_k = x**k / ( k! (k+|q|)! [f(k)! f(k+|q|)!]**2 ),  x = |xi|**2.
    """
    aq = abs(int(q))
    k = np.arange(kmax + 1)
    lff = deform.log_ffact_table(kmax + aq)
    denom = gammaln(k + 1) + gammaln(k + aq + 1) + 2.0 * (lff[k] + lff[k + aq])
    if x == 0:
        lx = np.where(k == 0, 0.0, -np.inf)
    else:
        lx = k * math.log(x)
    return lx - denom


@dataclass(frozen=True)
class NormalizationSet:
    """Normalisation data of one (|xi|^2, q, f) point, stored in log space.

    ``log_cosh`` and ``log_sinh`` are the logs of the even and odd series;
    everything else derives from them.
    """

    x: float
    charge: int
    log_cosh: float
    log_sinh: float

    @property
    def log_full(self):
        return float(np.logaddexp(self.log_cosh, self.log_sinh))

    @property
    def N(self):
        return math.exp(-0.5 * self.log_full)

    @property
    def Ne(self):
        return math.exp(-0.5 * self.log_cosh)

    @property
    def No(self):
        return math.exp(-0.5 * self.log_sinh) if self.log_sinh > -math.inf else math.inf

    @property
    def cosh(self):
        return math.exp(self.log_cosh)

    @property
    def sinh(self):
        return math.exp(self.log_sinh) if self.log_sinh > -math.inf else 0.0

    @property
    def tanh(self):
        return math.exp(self.log_sinh - self.log_cosh) if self.log_sinh > -math.inf else 0.0

    @property
    def coth(self):
        return math.exp(self.log_cosh - self.log_sinh) if self.log_sinh > -math.inf else math.inf

    def log_norm_sum(self, parity):
        return {"full": self.log_full, "even": self.log_cosh, "odd": self.log_sinh}[parity]

    def factor(self, parity):
        """N, N^e or N^o."""
        return {"full": self.N, "even": self.Ne, "odd": self.No}[parity]

    def as_dict(self):
        return {"N": self.N, "Ne": self.Ne, "No": _finite(self.No),
                "sinh": self.sinh, "cosh": self.cosh,
                "tanh": self.tanh, "coth": _finite(self.coth)}


def _finite(v):
    return v if math.isfinite(v) else None


def _max_terms(deform, q):
    if deform.table_size is None:
        return AUTO_CAP
    # keep two spare table entries for raising operators
    return max(1, deform.table_size - abs(q) - 2)


def auto_nmax(x, q, deform, parity="full", cap=AUTO_CAP):
    """Smallest truncation whose last retained term is below 1e-30 of the peak."""
    parity = _check_parity(parity)
    cap = min(cap, _max_terms(deform, q))
    if x == 0:
        return min(4, cap)
    kmax = min(32, cap)
    while True:
        lt = log_series_terms(x, q, deform, kmax)
        k = np.arange(kmax + 1)
        lt = np.where(_parity_mask(k, parity), lt, -np.inf)
        peak = int(np.argmax(lt))
        below = np.nonzero((k > peak) & _parity_mask(k, parity) & (lt < lt[peak] + _LOG_AUTO))[0]
        if below.size:
            return max(int(below[0]), 4)
        if kmax >= cap:
            raise TruncationError(
                f"automatic truncation did not converge within nmax = {cap} "
                f"(x = {x:g}, q = {q}, f = {deform})")
        kmax = min(2 * kmax, cap)


def normalization(x, q, deform):
    """Even/odd normalisation series at x = |xi|^2 (log space)."""
    kmax = auto_nmax(x, q, deform, "full")
    lt = log_series_terms(x, q, deform, kmax)
    return NormalizationSet(float(x), int(q), float(logsumexp(lt[0::2])),
                            float(logsumexp(lt[1::2])) if kmax >= 1 else -math.inf)


def unnormalized_amplitudes(xi, q, parity, deform, nmax):
    """Amplitudes of the unnormalised ket at (possibly an array of) xi.

    Output shape is ``np.shape(xi) + (nmax + 1,)``.
    """
    parity = _check_parity(parity)
    xi = np.asarray(xi, dtype=complex)
    aq = abs(int(q))
    k = np.arange(nmax + 1)
    lff = deform.log_ffact_table(nmax + aq)
    log_denom = 0.5 * (gammaln(k + 1) + gammaln(k + aq + 1)) + lff[k] + lff[k + aq]
    r = np.abs(xi)[..., None]
    theta = np.angle(xi)[..., None]
    with np.errstate(divide="ignore"):
        logr = np.log(r)
    logmag = np.where(k == 0, 0.0, k * logr) - log_denom
    amps = np.exp(logmag + 1j * k * theta)
    amps = np.where(_parity_mask(k, parity), amps, 0)
    return amps


def _normalized_amplitudes(xi, q, parity, deform, nmax):
    """Normalised amplitudes plus the l2 weight lost to truncation."""
    x = abs(xi) ** 2
    norms = normalization(x, q, deform)
    aq = abs(q)
    k = np.arange(nmax + 1)
    lt = log_series_terms(x, q, deform, nmax)
    log_total = norms.log_norm_sum(parity)
    keep = _parity_mask(k, parity)
    # |c_k|^2 = t_k / total, phase k*theta
    mag2 = np.where(keep, np.exp(lt - log_total), 0.0)
    theta = cmath.phase(xi) if xi != 0 else 0.0
    amps = np.sqrt(mag2) * np.exp(1j * k * theta)
    kept = float(mag2.sum())
    leakage = math.sqrt(max(0.0, 1.0 - kept))
    amps = amps / math.sqrt(kept)
    return amps, norms, leakage


def build_state(req):
    """Construct the requested state; returns ``(ChargeSectorState, NormalizationSet)``.

    With ``nmax=None`` the truncation grows until the last retained
    probability is below 1e-30 of the largest (capped at 400).  An explicit
    short truncation renormalises what is kept and reports the discarded
    weight as ``leakage``.
    """
    deform = req.effective_deform
    x = abs(req.xi) ** 2
    nmax = req.nmax if req.nmax is not None else auto_nmax(x, req.charge, deform, req.parity)
    if nmax > _max_terms(deform, req.charge) and deform.table_size is not None:
        raise TruncationError(f"table too short for nmax = {nmax}")
    amps, norms, leakage = _normalized_amplitudes(req.xi, req.charge, req.parity, deform, nmax)
    return ChargeSectorState(req.charge, amps, leakage), norms


def check_eigenpair(state, xi, deform, power=2):
    """Interior residual ``|(A1 A2)**power psi - xi**power psi|``.

    The top ``power`` indices are excluded: their images would need
    amplitudes beyond the truncation.
    """
    word = ("A1", "A2") * power
    _, img, _ = apply_word(word, state.charge, state.amplitudes, deform)
    diff = img - complex(xi) ** power * state.amplitudes
    return float(np.linalg.norm(diff[: state.amplitudes.size - power]))


# --- overlaps ------------------------------------------------------------

def _parity_set(parity):
    return {"full": {0, 1}, "even": {0}, "odd": {1}}[parity]


def overlap(a, b):
    """Closed-form ``<a|b>`` for two requests.

    Equal charges give ``N_a N_b S(conj(xi_a) xi_b)`` where S is the
    normalisation series restricted to the parities both states share and
    built with both deformations; unequal charges or disjoint parities give
    an exact zero.
    """
    if a.charge != b.charge:
        return 0j
    shared = _parity_set(a.parity) & _parity_set(b.parity)
    if not shared:
        return 0j
    q = a.charge
    fa, fb = a.effective_deform, b.effective_deform
    na = normalization(abs(a.xi) ** 2, q, fa).factor(a.parity)
    nb = normalization(abs(b.xi) ** 2, q, fb).factor(b.parity)
    z = a.xi.conjugate() * b.xi
    if z == 0:
        return complex(na * nb) if 0 in shared else 0j
    kmax = max(auto_nmax(abs(a.xi) ** 2, q, fa), auto_nmax(abs(b.xi) ** 2, q, fb))
    aq = abs(q)
    k = np.arange(kmax + 1)
    la = fa.log_ffact_table(kmax + aq)
    lb = fb.log_ffact_table(kmax + aq)
    logt = (k * math.log(abs(z)) - gammaln(k + 1) - gammaln(k + aq + 1)
            - la[k] - la[k + aq] - lb[k] - lb[k + aq])
    keep = np.isin(k % 2, list(shared))
    logt = logt[keep]
    phase = np.exp(1j * k[keep] * cmath.phase(z))
    shift = logt.max()
    s = np.sum(np.exp(logt - shift) * phase)
    return complex(na * nb * math.exp(shift) * s)


def direct_overlap(a, b):
    """``<a|b>`` from the amplitude vectors."""
    sa, _ = build_state(a)
    sb, _ = build_state(b)
    return sa.inner(sb)


@dataclass(frozen=True)
class Decomposition:
    weight_even: float
    weight_odd: float
    residual: float
    pythagoras: float


def decompose_full(xi, q, deform, nmax=None):
    """Split the full state into its even and odd parts.

    Returns the weights N/N^e and N/N^o, the amplitude-wise reconstruction
    residual and the defect of ``(N/N^e)**2 + (N/N^o)**2 = 1``.
    """
    xi = complex(xi)
    full, norms = build_state(StateRequest(xi, q, "full", deform, nmax=nmax))
    n = full.nmax
    even, _ = build_state(StateRequest(xi, q, "even", deform, nmax=n))
    w_e = math.exp(0.5 * (norms.log_cosh - norms.log_full))
    if xi == 0:
        w_o = 0.0
        odd_amps = np.zeros_like(even.amplitudes)
    else:
        odd, _ = build_state(StateRequest(xi, q, "odd", deform, nmax=n))
        w_o = math.exp(0.5 * (norms.log_sinh - norms.log_full))
        odd_amps = odd.amplitudes
    recon = w_e * even.amplitudes + w_o * odd_amps
    resid = float(np.max(np.abs(recon - full.amplitudes)))
    return Decomposition(w_e, w_o, resid, abs(w_e ** 2 + w_o ** 2 - 1.0))


# --- single-mode states and generation ----------------------------------

@dataclass(frozen=True)
class SingleModeState:
    amplitudes: np.ndarray
    N: float
    Ne: float
    No: float


def _single_log_terms(x, deform, kmax):
    k = np.arange(kmax + 1)
    lff = deform.log_ffact_table(kmax)
    lx = np.where(k == 0, 0.0, -np.inf) if x == 0 else k * math.log(x)
    return lx - gammaln(k + 1) - 2.0 * lff


def _single_kmax(x, deform, cap=AUTO_CAP):
    if deform.table_size is not None:
        cap = min(cap, deform.table_size - 1)
    if x == 0:
        return min(4, cap)
    kmax = min(32, cap)
    while True:
        lt = _single_log_terms(x, deform, kmax)
        peak = int(np.argmax(lt))
        k = np.arange(kmax + 1)
        below = np.nonzero((k > peak + 1) & (lt < lt[peak] + _LOG_AUTO))[0]
        if below.size:
            return int(below[0]) + 1
        if kmax >= cap:
            raise TruncationError(f"single-mode truncation did not converge within {cap}")
        kmax = min(2 * kmax, cap)


def build_single_mode_state(xi, parity, deform, nmax=None):
    """Single-mode nonlinear coherent state and its even/odd forms.

    Amplitudes ``N xi**n / (sqrt(n!) f(n)!)`` with N the normalisation of the
    requested parity; the three normalisation factors come back as well.
    """
    parity = _check_parity(parity)
    xi = complex(xi)
    if parity == "odd" and xi == 0:
        raise ValueError("odd state undefined at xi=0 (zero vector)")
    radius = convergence_radius(deform)
    if xi != 0 and not abs(xi) ** 2 < radius:
        raise ValueError(f"|xi|^2 = {abs(xi) ** 2:g} outside the radius {radius:g}")
    x = abs(xi) ** 2
    kfull = _single_kmax(x, deform)
    lt = _single_log_terms(x, deform, kfull)
    log_e = float(logsumexp(lt[0::2]))
    log_o = float(logsumexp(lt[1::2])) if kfull >= 1 else -math.inf
    log_all = float(np.logaddexp(log_e, log_o))
    log_sum = {"full": log_all, "even": log_e, "odd": log_o}[parity]
    if nmax is None:
        nmax = kfull
    if deform.table_size is not None and nmax > deform.table_size:
        raise TruncationError("table too short for the requested truncation")
    k = np.arange(nmax + 1)
    lt = _single_log_terms(x, deform, nmax)
    mag = np.exp(0.5 * (lt - log_sum))
    theta = cmath.phase(xi) if xi != 0 else 0.0
    amps = np.where(_parity_mask(k, parity), mag * np.exp(1j * k * theta), 0)
    no = math.exp(-0.5 * log_o) if log_o > -math.inf else math.inf
    return SingleModeState(amps, math.exp(-0.5 * log_all), math.exp(-0.5 * log_e), no)


def combine_from_full(xi, q, parity, deform, nmax=None):
    """Even/odd state as ``(1/2)(N^p/N)(|xi> +- |-xi>)`` of full states."""
    parity = _check_parity(parity)
    if parity == "full":
        raise ValueError("combination route needs parity even or odd")
    xi = complex(xi)
    req = StateRequest(xi, q, "full", deform, nmax=nmax)
    nmax = req.nmax if nmax is not None else auto_nmax(abs(xi) ** 2, q, deform)
    plus, norms = build_state(req.replace(nmax=nmax))
    minus, _ = build_state(req.replace(xi=-xi, nmax=nmax))
    sign = 1.0 if parity == "even" else -1.0
    scale = 0.5 * norms.factor(parity) / norms.N
    return ChargeSectorState(q, scale * (plus.amplitudes + sign * minus.amplitudes))


def min_projection_nodes(nmax, q):
    return 2 * nmax + abs(q) + 2


def generate_by_projection(xi1, xi2, q, parity, deform, angular_nodes=None, nmax=None):
    """Charge-q even/odd state from a U(1) average of single-mode products.

    For q >= 0 mode 1 carries the full state ``|e^{-i a} xi1>`` and mode 2
    the even/odd state ``|e^{i a} xi2>``, weighted by ``e^{i q a}``; for
    q <= 0 the modes swap roles and the phase is ``e^{-i q a}``.  The
    angular integral uses the uniform trapezoid rule on [-pi, pi).  The
    returned state keeps the literal prefactors (no renormalisation); its
    ``leakage`` is the norm of everything that landed outside the sector.
    """
    parity = _check_parity(parity)
    if parity == "full":
        raise ValueError("projection route builds even or odd states")
    xi1, xi2 = complex(xi1), complex(xi2)
    if q != 0 and xi1 == 0:
        raise ValueError("xi1 must be nonzero when q != 0")
    xi = xi1 * xi2
    aq = abs(q)
    if nmax is None:
        nmax = auto_nmax(abs(xi) ** 2, q, deform, parity)
    need = min_projection_nodes(nmax, q)
    if angular_nodes is None:
        angular_nodes = need
    if angular_nodes < need:
        raise ValueError(f"insufficient angular nodes: need at least {need}, got {angular_nodes}")

    full_mode = build_single_mode_state(xi1, "full", deform, nmax=nmax + aq)
    cat_mode = build_single_mode_state(xi2, parity, deform, nmax=nmax)
    norms = normalization(abs(xi) ** 2, q, deform)
    pre = norms.factor(parity) / (full_mode.N * (cat_mode.Ne if parity == "even" else cat_mode.No))
    pre *= xi1 ** (-q) if q >= 0 else xi1 ** q

    M = angular_nodes
    alpha = -math.pi + 2 * math.pi * np.arange(M) / M
    m = np.arange(nmax + aq + 1)
    k = np.arange(nmax + 1)
    # |e^{-ia} xi1> has amplitudes a_m e^{-i m a}; |e^{ia} xi2>_p has b_k e^{i k a}
    ph_full = np.exp(-1j * np.outer(alpha, m))
    ph_cat = np.exp(1j * np.outer(alpha, k))
    weight = np.exp(1j * q * alpha) if q >= 0 else np.exp(-1j * q * alpha)
    # tensor[m_full, k_cat] averaged over nodes
    avg = np.einsum("a,am,ak->mk", weight, ph_full, ph_cat) / M
    tensor = pre * avg * np.outer(full_mode.amplitudes, cat_mode.amplitudes)

    # sector q: full-mode occupation = cat-mode occupation + |q|
    amps = tensor[k + aq, k]
    total = float(np.sum(np.abs(tensor) ** 2))
    off = math.sqrt(max(0.0, total - float(np.sum(np.abs(amps) ** 2))))
    return ChargeSectorState(q, amps, off)


def projection_fidelity(xi1, xi2, q, parity, deform, angular_nodes=None):
    """Fidelity of the projection route against the direct construction.

    Returns ``(fidelity, norm)``: ``|<direct|generated>|**2 / <g|g>`` with
    off-sector weight counted in ``<g|g>``, and the norm of the generated
    vector, which is 1 when the literal prefactors are right.
    """
    xi = complex(xi1) * complex(xi2)
    ref, _ = build_state(StateRequest(xi, q, parity, deform))
    gen = generate_by_projection(xi1, xi2, q, parity, deform, angular_nodes, nmax=ref.nmax)
    g2 = gen.norm() ** 2 + gen.leakage ** 2
    fid = abs(ref.inner(gen)) ** 2 / g2
    return float(fid), math.sqrt(g2)


# --- entanglement --------------------------------------------------------

@dataclass(frozen=True)
class SchmidtProfile:
    coefficients: np.ndarray
    entropy: float
    schmidt_number: float


def schmidt_profile(state, cutoff=0.0):
    """Schmidt data of a sector state.

    Each pair index couples a distinct Fock state of mode 1 to a distinct one
    of mode 2, so the expansion is already biorthogonal and the Schmidt
    coefficients are just ``|c_n|``.
    """
    p = np.abs(state.amplitudes)
    p = p / np.linalg.norm(p)
    coeffs = np.sort(p[p > cutoff])[::-1]
    w = coeffs ** 2
    nz = w[w > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    return SchmidtProfile(coeffs, max(entropy, 0.0), float(1.0 / np.sum(w ** 2)))


def state_record(state, req, norms=None):
    """JSON-ready description of a built state."""
    rec = {
        "charge": state.charge,
        "parity": req.parity,
        "xi": [req.xi.real, req.xi.imag],
        "deform": req.deform.describe(),
        "dual": req.dual,
        "nmax": state.nmax,
        "leakage": state.leakage,
        "amplitudes": [[float(c.real), float(c.imag)] for c in state.amplitudes],
    }
    if norms is not None:
        rec["normalization"] = norms.as_dict()
    return rec
