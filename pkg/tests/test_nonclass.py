import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlcharge.deform import DeformationSpec
from nlcharge.nonclass import (antibunch_report, coth_bar, coth_scan, default_x_grid,
                               single_mode_report, su_f11_report, sub_unity_windows,
                               two_mode_report, two_mode_squeezing_scan)
from nlcharge.states import StateRequest, normalization

IDENT = DeformationSpec.identity()
P2 = DeformationSpec.power_law(2)
DEFORMS = [IDENT, P2, DeformationSpec.qdeformed(1.5)]


def coth_oracle(x, q, p, terms=40):
    """cosh-bar / sinh-bar summed directly: t_k = x^k / (k! (k+|q|)!)^p."""
    a = abs(q)
    x = mpmath.mpf(x)
    t = [x ** k / (mpmath.factorial(k) * mpmath.factorial(k + a)) ** p for k in range(terms)]
    return float(mpmath.fsum(t[0::2]) / mpmath.fsum(t[1::2]))


def test_coth_spot_values():
    # identity f (p = 1): 1 + 1 + 1/36 + ... over 2 + 8/36 + ...
    assert coth_bar(2.0, 0, 1) == pytest.approx(coth_oracle(2.0, 0, 1), rel=1e-13)
    assert coth_bar(2.0, 0, 1) == pytest.approx(0.9116419, abs=1e-6)
    # power law p = 2: 1 + 4/16 + ... over 2 + 8/1296 + ...
    assert coth_bar(2.0, 0, 2) == pytest.approx(coth_oracle(2.0, 0, 2), rel=1e-13)
    assert coth_bar(2.0, 0, 2) == pytest.approx(0.6231009, abs=1e-6)


@pytest.mark.parametrize("q", [0, 1, -1, 2, -2])
@pytest.mark.parametrize("p", [2, 3, 4])
def test_sub_unity_windows_exist(q, p):
    xs, vals, below = coth_scan(q, p)
    assert below.any()
    wins = sub_unity_windows(xs, vals)
    assert wins and all(a <= b for a, b in wins)
    # small-x divergence (1+|q|)^p / x
    x0 = 1e-3
    assert coth_bar(x0, q, p) * x0 / (1 + abs(q)) ** p == pytest.approx(1.0, rel=1e-2)
    for x in (0.3, 7.0, 60.0):
        assert coth_bar(x, q, p) == pytest.approx(coth_oracle(x, q, p, 80), rel=1e-12)


def test_default_grid():
    xs = default_x_grid()
    assert xs.size == 400 and xs[0] == pytest.approx(1e-3) and xs[-1] == pytest.approx(200)
    assert sub_unity_windows(np.arange(5.0), [2, 0.5, 0.5, 2, 0.1]) == [(1.0, 2.0), (4.0, 4.0)]


def test_suf11_examples():
    rep = su_f11_report(StateRequest(0.5j, 0, "even", IDENT))
    assert rep.extra["conditions"]["+cos2theta"] < 0
    assert rep.squeezed["X1"]
    rep = su_f11_report(StateRequest(math.sqrt(2) * 1j, 0, "odd", P2))
    assert rep.extra["conditions"]["+cos2theta"] == pytest.approx(-1 + 0.6231009, abs=1e-6)
    assert rep.squeezed["X1"]
    full = su_f11_report(StateRequest(0.9 * cmath.exp(0.3j), 1, "full", P2))
    assert full.variances["X1"] == pytest.approx(full.variances["X2"], rel=1e-10)
    assert not any(full.squeezed.values())
    assert full.extra["uncertainty_product_excess"] == pytest.approx(0.0, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.05, 2.0), th=st.floats(-3.1, 3.1), q=st.integers(-3, 3),
       parity=st.sampled_from(["even", "odd"]), which=st.integers(0, 2))
def test_reports_consistent(r, th, q, parity, which):
    req = StateRequest(r * cmath.exp(1j * th), q, parity, DEFORMS[which])
    su = su_f11_report(req)   # raises on closed-form mismatch
    assert all(v >= 0 for v in su.variances.values())
    bound = su.commutator_bound["X"]
    assert su.variances["X1"] * su.variances["X2"] >= bound ** 2 - 1e-10
    sm = single_mode_report(req)
    for v in sm.extra["vanishing"].values():
        assert v["value"] == 0 and v["sector_orthogonal"]
    assert not any(sm.squeezed.values())
    assert min(sm.margins.values()) > 0
    tm = two_mode_report(req)
    assert not any(tm.squeezed.values())
    assert min(tm.margins.values()) > 0
    ab = antibunch_report(req)
    assert ab.g2 == pytest.approx(ab.g2_closed, rel=1e-10)


def test_phase_covariance():
    base = su_f11_report(StateRequest(0.8, 1, "even", P2))
    rot = su_f11_report(StateRequest(0.8 * cmath.exp(1j * math.pi / 2), 1, "even", P2))
    assert rot.variances["X1"] == pytest.approx(base.variances["X2"], rel=1e-10)
    rot = su_f11_report(StateRequest(0.8 * cmath.exp(1j * math.pi), 1, "even", P2))
    assert rot.variances["X1"] == pytest.approx(base.variances["X1"], rel=1e-10)


def test_single_mode_vacuum_like():
    rep = single_mode_report(StateRequest(0, 2, "even", P2))
    assert rep.extra["excess_mode2"] == 0
    assert rep.margins["Z1"] == pytest.approx(0.0, abs=1e-15)
    rep = single_mode_report(StateRequest(1.0, 0, "odd", IDENT))
    assert not any(rep.squeezed.values())


def test_two_mode_full_parity_squeezing_found():
    hits = two_mode_squeezing_scan(P2, 0, moduli=np.linspace(0.05, 1.0, 8))
    assert hits
    assert all(m < 0 for *_, m in hits)
    rep = two_mode_report(StateRequest(0.7, 0, "even", P2))
    assert rep.extra["criterion"] == "two-mode f-squeezing"


def test_antibunching():
    rep = antibunch_report(StateRequest(0.8 * cmath.exp(0.2j), 2, "full", P2))
    assert rep.g2 == pytest.approx(1.0, abs=1e-10) and not rep.antibunched
    for x in (0.1, 0.5, 1.0):
        rep = antibunch_report(StateRequest(math.sqrt(x), 0, "odd", IDENT))
        assert rep.antibunched
    # beyond |xi| = f^2(1) tanh-bar exceeds 1 and the odd state bunches
    rep = antibunch_report(StateRequest(2.0, 0, "odd", IDENT))
    assert rep.g2 > 1 and not rep.antibunched
    rep = antibunch_report(StateRequest(math.sqrt(2), 0, "even", P2))
    assert rep.g2 == pytest.approx(0.6231009 ** 2, abs=1e-6)
    with pytest.raises(ValueError, match="undefined at vacuum"):
        antibunch_report(StateRequest(0, 0, "even", P2))


@pytest.mark.parametrize("x", [0.05, 1.0, 9.0])
def test_g_even_times_g_odd(x):
    n = normalization(x, 1, P2)
    assert (n.coth * n.tanh) ** 2 == pytest.approx(1.0, abs=1e-12)
    ge = antibunch_report(StateRequest(math.sqrt(x), 1, "even", P2)).g2
    go = antibunch_report(StateRequest(math.sqrt(x), 1, "odd", P2)).g2
    assert ge * go == pytest.approx(1.0, rel=1e-9)


def test_qdeformed_limit_matches_identity():
    req = StateRequest(0.9 * cmath.exp(0.4j), 1, "odd", IDENT)
    near = req.replace(deform=DeformationSpec.qdeformed(1 + 1e-5))
    a, b = su_f11_report(req), su_f11_report(near)
    for k in a.variances:
        assert abs(a.variances[k] - b.variances[k]) < 1e-8
    assert abs(antibunch_report(req).g2 - antibunch_report(near).g2) < 1e-8
