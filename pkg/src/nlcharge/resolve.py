"""Resolution of unity for a charge sector.

Within sector q the even and odd kets built with f, paired with the dual
bras built with 1/f and integrated against ``2 |xi|**|q| K_q(2|xi|) d2xi/pi``,
sum to the sector identity.  Each part (even, odd) is a projector.  The
deformation cancels term by term, which is what makes the weight universal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deform import DeformationSpec
from .quadrature import build_scheme, moment_table
from .states import unnormalized_amplitudes

__all__ = ["Resolution", "assemble_resolution", "sector_projector_check",
           "box_check", "completeness_report"]

TOL = 1e-8


@dataclass(frozen=True)
class Resolution:
    charge: int
    even: np.ndarray
    odd: np.ndarray

    @property
    def total(self):
        return self.even + self.odd

    def residual(self):
        eye = np.eye(self.total.shape[0])
        return float(np.max(np.abs(self.total - eye)))


def assemble_resolution(q, deform, n_check, scheme=None, conjugate=False):
    """Integrated ``sum_p ||q>_p <<q||_p`` restricted to pair indices 0..n_check.

    ``conjugate`` swaps the roles of ket and dual bra (f on the bra, 1/f on
    the ket).  Normalised kets and bras carry the factors N_f and N_{1/f},
    which the pairing divides out again, so the unnormalised series are used
    directly; the dual states need not be normalisable for this.
    """
    if scheme is None:
        scheme = build_scheme(q, n_check)
    moment_table(scheme)
    ket_f, bra_f = (deform.dual(), deform) if conjugate else (deform, deform.dual())

    r = scheme.radial_nodes
    theta = scheme.angles
    xi = r[:, None] * np.exp(1j * theta[None, :])
    ket = unnormalized_amplitudes(xi, q, "full", ket_f, n_check)     # (nr, na, n)
    bra = unnormalized_amplitudes(xi, q, "full", bra_f, n_check)
    # radial measure r dr, weight 2 r^|q| K_q(2r), angular d(theta)/pi
    w_r = scheme.radial_weights * r * 2.0 * r ** abs(q) * scheme.kq
    w_a = 2.0 / scheme.angular_nodes          # (2 pi / M) / pi
    k = np.arange(n_check + 1)
    parts = []
    for j in (0, 1):
        sel = (k % 2 == j).astype(float)
        weights = w_r[:, None] * w_a
        m = np.einsum("ra,ran,ram->nm", weights, ket * sel, np.conj(bra * sel))
        parts.append(m)
    return Resolution(int(q), parts[0], parts[1])


def sector_projector_check(res):
    """Residuals of the projector algebra of the two parity parts."""
    e, o = res.even, res.odd
    n = e.shape[0]
    eye = np.eye(n)
    pe = np.diag((np.arange(n) % 2 == 0).astype(float))
    return {
        "identity": float(np.max(np.abs(e + o - eye))),
        "even_idempotent": float(np.max(np.abs(e @ e - e))),
        "odd_idempotent": float(np.max(np.abs(o @ o - o))),
        "even_odd_product": float(np.max(np.abs(e @ o))),
        "odd_even_product": float(np.max(np.abs(o @ e))),
        "even_is_parity_projector": float(np.max(np.abs(e - pe))),
    }


def box_check(deform=None, n_box=6, q_max=12):
    """Sum of sector resolutions on the two-mode box n1, n2 <= n_box.

    Sector q contributes the pair indices whose occupations
    ``(k + max(q,0), k + max(-q,0))`` stay inside the box.
    """
    deform = deform or DeformationSpec.identity()
    dim = n_box + 1
    total = np.zeros((dim * dim, dim * dim), dtype=complex)
    for q in range(-q_max, q_max + 1):
        n_check = n_box - abs(q)
        if n_check < 0:
            continue
        res = assemble_resolution(q, deform, n_check)
        k = np.arange(n_check + 1)
        idx = (k + max(q, 0)) * dim + (k + max(-q, 0))
        total[np.ix_(idx, idx)] += res.total
    return float(np.max(np.abs(total - np.eye(dim * dim))))


def completeness_report(qs, deforms, n_check=6, n_box=6, q_max=12, tol=TOL):
    """Per-(q, deformation, parity part) residuals, moment table and box check."""
    rows, moments, schemes = [], [], []
    for q in qs:
        scheme = build_scheme(q, n_check)
        schemes.append(scheme.describe())
        moments += moment_table(scheme, raise_on_fail=False)
        for deform in deforms:
            for conj in (False, True):
                res = assemble_resolution(q, deform, n_check, scheme, conjugate=conj)
                alg = sector_projector_check(res)
                rows.append({"charge": q, "deform": str(deform), "conjugate": conj,
                             "residual": res.residual(),
                             "even_projector": max(alg["even_idempotent"],
                                                   alg["even_is_parity_projector"]),
                             "odd_projector": alg["odd_idempotent"],
                             "cross": max(alg["even_odd_product"], alg["odd_even_product"]),
                             "projector": max(alg.values())})
    box = box_check(deforms[0], n_box, q_max)
    worst = max([max(r["residual"], r["projector"]) for r in rows] + [box])
    return {
        "tolerance": tol,
        "n_check": n_check,
        "sectors": rows,
        "moments": moments,
        "schemes": schemes,
        "box": {"n_box": n_box, "q_max": q_max, "residual": box},
        "max_residual": worst,
        "passed": bool(worst < tol and all(m["passed"] for m in moments)),
    }
