import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import iv, jv

from nlcharge.deform import DeformationSpec
from nlcharge.fock import ChargeSectorState, expect, sector_op
from nlcharge.states import (StateRequest, build_single_mode_state, build_state,
                             check_eigenpair, combine_from_full, decompose_full,
                             direct_overlap, generate_by_projection, normalization,
                             overlap, projection_fidelity, schmidt_profile, state_record)

IDENT = DeformationSpec.identity()
DEFORMS = [IDENT, DeformationSpec.power_law(2), DeformationSpec.qdeformed(1.5)]


def bessel_sums(x, q):
    """Identity-f cosh-bar and sinh-bar from I_q +- J_q (independent of the series code)."""
    q = abs(q)
    r = 2 * math.sqrt(x)
    full = iv(q, r) * x ** (-q / 2)
    alt = jv(q, r) * x ** (-q / 2)
    return 0.5 * (full + alt), 0.5 * (full - alt)


@pytest.mark.parametrize("x", [0.1, 1.0, 4.0, 30.0])
@pytest.mark.parametrize("q", [0, 1, -3])
def test_identity_normalization_matches_bessel(x, q):
    n = normalization(x, q, IDENT)
    ch, sh = bessel_sums(x, q)
    assert n.cosh == pytest.approx(ch, rel=1e-12)
    assert n.sinh == pytest.approx(sh, rel=1e-12)


def test_even_norm_example():
    _, n = build_state(StateRequest(1.0, 0, "even", IDENT))
    oracle = sum(1 / math.factorial(2 * k) ** 2 for k in range(15))
    assert oracle == pytest.approx(1.251738, abs=1e-6)
    assert n.Ne == pytest.approx(oracle ** -0.5, rel=1e-13)
    assert n.Ne == pytest.approx(0.89381, abs=1e-5)


def test_vacuum_limits():
    s, _ = build_state(StateRequest(0, 2, "even", DeformationSpec.power_law(3)))
    assert s.amplitudes[0] == 1 and np.all(s.amplitudes[1:] == 0)
    assert s.occupations()[0][0] == 2 and s.occupations()[1][0] == 0
    with pytest.raises(ValueError, match="odd state undefined"):
        StateRequest(0, 1, "odd")
    d = decompose_full(0, 1, IDENT)
    assert (d.weight_even, d.weight_odd) == (1.0, 0.0)


def test_radius_enforced():
    dual_p2 = DeformationSpec.power_law(2)
    StateRequest(0.9, 0, "even", dual_p2, dual=True)
    with pytest.raises(ValueError, match="convergence radius"):
        StateRequest(1.0, 0, "even", dual_p2, dual=True)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.05, 3.0), th=st.floats(-3.1, 3.1), q=st.integers(-4, 4),
       parity=st.sampled_from(["full", "even", "odd"]), which=st.integers(0, 2))
def test_state_invariants(r, th, q, parity, which):
    deform = DEFORMS[which]
    xi = r * cmath.exp(1j * th)
    s, n = build_state(StateRequest(xi, q, parity, deform))
    assert s.norm() == pytest.approx(1.0, abs=1e-12)
    assert n.N ** -2 == pytest.approx(n.Ne ** -2 + n.No ** -2, rel=1e-12)
    k = np.arange(s.amplitudes.size)
    if parity == "even":
        assert np.all(s.amplitudes[k % 2 == 1] == 0)
    if parity == "odd":
        assert np.all(s.amplitudes[k % 2 == 0] == 0)
    # phase covariance
    s0, _ = build_state(StateRequest(r, q, parity, deform, nmax=s.nmax))
    np.testing.assert_allclose(s.amplitudes, s0.amplitudes * np.exp(1j * k * th), atol=1e-13)
    # <N1> - <N2> = q
    dn = expect(sector_op("N1", deform) - sector_op("N2", deform), s)
    assert dn.real == pytest.approx(q, abs=1e-10)
    if parity != "full":
        assert check_eigenpair(s, xi, deform) < 1e-10


def test_full_state_single_pair_eigen():
    deform = DeformationSpec.power_law(2)
    xi = 0.9 * cmath.exp(0.4j)
    full, _ = build_state(StateRequest(xi, 2, "full", deform))
    assert check_eigenpair(full, xi, deform, power=1) < 1e-10
    even, _ = build_state(StateRequest(xi, 2, "even", deform))
    assert check_eigenpair(even, xi, deform, power=1) > 0.1


def test_qdeformed_reduction():
    # amplitudes with f(n)! = sqrt([n]!/n!) written out independently
    q = 1.8
    br = lambda n: (q ** n - q ** -n) / (q - 1 / q)
    qfact = lambda n: math.prod(br(k) for k in range(1, n + 1))
    xi, charge = 0.8, 2
    s, _ = build_state(StateRequest(xi, charge, "odd", DeformationSpec.qdeformed(q), nmax=20))
    ref = np.array([xi ** n / math.sqrt(qfact(n) * qfact(n + charge)) if n % 2 else 0.0
                    for n in range(21)])
    np.testing.assert_allclose(s.amplitudes, ref / np.linalg.norm(ref), atol=1e-14)


def test_dual_pairing_cancels_factorials():
    deform = DeformationSpec.power_law(2)
    xi, q = 0.7, 1
    ket, _ = build_state(StateRequest(xi, q, "even", deform, nmax=120))
    bra, _ = build_state(StateRequest(xi, q, "even", deform, dual=True, nmax=120))
    nk = normalization(xi ** 2, q, deform).Ne
    nb = normalization(xi ** 2, q, deform.dual()).Ne
    paired = np.sum(np.conj(bra.amplitudes) * ket.amplitudes) / (nk * nb)
    oracle = sum(xi ** (2 * m) / (math.factorial(m) * math.factorial(m + q))
                 for m in range(0, 60, 2))
    assert paired.real == pytest.approx(oracle, rel=1e-13)


def test_overlaps():
    a = StateRequest(0.9, 1, "even", IDENT)
    assert overlap(a, a.replace(parity="odd")) == 0
    assert overlap(a, a.replace(charge=2)) == 0
    e7 = StateRequest(0.7, 0, "even", IDENT)
    e3 = StateRequest(0.3, 0, "even", IDENT)
    assert abs(overlap(e7, e3) - direct_overlap(e7, e3)) < 1e-12
    c1 = StateRequest(1.1 * cmath.exp(0.6j), -2, "odd", DeformationSpec.power_law(2))
    c2 = c1.replace(xi=0.5 * cmath.exp(-1.3j))
    assert abs(overlap(c1, c2) - direct_overlap(c1, c2)) < 1e-12
    assert overlap(c1, c1) == pytest.approx(1.0, abs=1e-12)


def test_decomposition():
    d = decompose_full(1.0, 1, DeformationSpec.power_law(2))
    assert d.residual < 1e-12
    assert d.weight_even ** 2 + d.weight_odd ** 2 == pytest.approx(1.0, abs=1e-12)


def test_single_mode():
    s = build_single_mode_state(1.0, "full", IDENT)
    assert s.N == pytest.approx(math.exp(-0.5), rel=1e-12)
    vac = build_single_mode_state(0, "full", IDENT, nmax=5)
    assert vac.amplitudes[0] == 1 and np.all(vac.amplitudes[1:] == 0)
    with pytest.raises(ValueError):
        build_single_mode_state(0, "odd", IDENT)
    deform = DeformationSpec.qdeformed(1.4)
    xi = 0.8 * cmath.exp(0.3j)
    plus = build_single_mode_state(xi, "full", deform, nmax=40)
    minus = build_single_mode_state(-xi, "full", deform, nmax=40)
    even = build_single_mode_state(xi, "even", deform, nmax=40)
    combo = 0.5 * even.Ne / plus.N * (plus.amplitudes + minus.amplitudes)
    np.testing.assert_allclose(combo, even.amplitudes, atol=1e-14)


@pytest.mark.parametrize("q, parity", [(0, "even"), (3, "odd"), (-2, "even"), (-1, "odd")])
def test_combination_route(q, parity):
    deform = DeformationSpec.power_law(2)
    xi = 1.2 * cmath.exp(0.7j)
    ref, _ = build_state(StateRequest(xi, q, parity, deform))
    got = combine_from_full(xi, q, parity, deform, nmax=ref.nmax)
    np.testing.assert_allclose(got.amplitudes, ref.amplitudes, atol=1e-13)


@pytest.mark.parametrize("q, parity, deform", [(0, "even", IDENT), (-2, "odd", IDENT),
                                               (2, "even", DeformationSpec.power_law(2)),
                                               (-1, "odd", DeformationSpec.qdeformed(1.5))])
def test_projection_route(q, parity, deform):
    fid, norm = projection_fidelity(0.8, 0.8 * cmath.exp(0.4j), q, parity, deform)
    assert fid > 1 - 1e-10
    assert norm == pytest.approx(1.0, abs=1e-10)


def test_projection_node_guard():
    with pytest.raises(ValueError, match="need at least 12"):
        generate_by_projection(0.8, 0.8, 0, "even", IDENT, angular_nodes=11, nmax=5)


def test_schmidt():
    s, _ = build_state(StateRequest(0, 3, "even", IDENT))
    prof = schmidt_profile(s, cutoff=1e-300)
    assert prof.coefficients.tolist() == [1.0] and prof.entropy == 0
    s, _ = build_state(StateRequest(1.0, 0, "even", IDENT))
    c = np.array([1 / math.factorial(2 * k) for k in range(10)])
    p = c ** 2 / np.sum(c ** 2)
    oracle = -np.sum(p * np.log(p))
    prof = schmidt_profile(s, cutoff=1e-300)
    assert prof.entropy == pytest.approx(oracle, rel=1e-12)
    assert len(prof.coefficients) >= 2


def test_record_is_json():
    import json
    req = StateRequest(0.5j, -1, "odd", DeformationSpec.power_law(2))
    s, n = build_state(req)
    rec = json.loads(json.dumps(state_record(s, req, n)))
    assert rec["charge"] == -1 and rec["xi"] == [0.0, 0.5]
    back = ChargeSectorState(-1, np.array([complex(*a) for a in rec["amplitudes"]]))
    assert back.inner(s) == pytest.approx(1.0, abs=1e-14)
