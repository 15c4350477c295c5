"""Sector operators against dense two-mode matrices built independently."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlcharge.deform import DeformationSpec
from nlcharge.fock import (ChargeSectorState, ProbeTooCloseError, apply_operator,
                           commutator_check, expect, expectation, sector_op)
from nlcharge.states import StateRequest, build_state

DEFORMS = [DeformationSpec.identity(), DeformationSpec.power_law(3), DeformationSpec.qdeformed(2)]
DIM = 14   # single-mode cutoff of the dense oracle


def dense_ops(deform):
    """Dense A, A~, N on the two-mode space (mode 1 index major)."""
    n = np.arange(DIM)
    f = deform.f(n)
    a = np.diag(np.sqrt(n[1:]) * f[1:], 1)
    at = np.diag(np.sqrt(n[1:]) / f[1:], 1)
    num = np.diag(n.astype(float))
    eye = np.eye(DIM)
    k = np.kron
    return {"A1": k(a, eye), "A2": k(eye, a), "At1": k(at, eye), "At2": k(eye, at),
            "N1": k(num, eye), "N2": k(eye, num)}


def embed(state):
    v = np.zeros(DIM * DIM, dtype=complex)
    n1, n2 = state.occupations()
    ok = (n1 < DIM) & (n2 < DIM)
    v[n1[ok] * DIM + n2[ok]] = state.amplitudes[ok]
    return v


def dense_of(name, d):
    A1, A2, At1, At2 = d["A1"], d["A2"], d["At1"], d["At2"]
    table = {
        "A1": A1, "A2": A2, "A1d": A1.T, "A2d": A2.T, "At1": At1, "At2": At2,
        "At1d": At1.T, "At2d": At2.T, "N1": d["N1"], "N2": d["N2"],
        "K-": A1 @ A2, "K+": At1.T @ At2.T, "K-d": A2.T @ A1.T, "K+d": At2 @ At1,
        "K0": 0.5 * (d["N1"] + d["N2"] + np.eye(DIM * DIM)),
        "X1": 0.5 * (A2.T @ A1.T + A1 @ A2), "Y2": 0.5j * (A1.T - A1),
        "W1": (A1.T + A2.T + A1 + A2) / np.sqrt(8),
    }
    return table[name]


@pytest.mark.parametrize("deform", DEFORMS, ids=str)
@pytest.mark.parametrize("q", [-2, 0, 3])
@pytest.mark.parametrize("name", ["A1", "A2", "A1d", "A2d", "At1", "At2", "At1d", "At2d",
                                  "N1", "N2", "K-", "K+", "K-d", "K+d", "K0"])
def test_matches_dense_oracle(deform, q, name):
    rng = np.random.default_rng(abs(q) * 7 + len(name))
    amps = np.zeros(10, dtype=complex)
    amps[:6] = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    psi = ChargeSectorState(q, amps)
    out = apply_operator(sector_op(name, deform), psi)
    dense = dense_of(name, dense_ops(deform)) @ embed(psi)
    np.testing.assert_allclose(embed(out), dense, rtol=1e-13, atol=1e-12 * np.max(np.abs(dense)))


def test_unit_examples():
    b = ChargeSectorState.basis(2, 3, 6)
    out = apply_operator(sector_op("N1"), b)
    np.testing.assert_array_equal(out.amplitudes, 5 * b.amplitudes)
    out = apply_operator(sector_op("K-"), ChargeSectorState.basis(0, 1, 4))
    np.testing.assert_allclose(out.amplitudes, [1, 0, 0, 0, 0])
    assert out.charge == 0


def test_k_minus_twice_on_even_state():
    deform = DeformationSpec.power_law(2)
    psi, _ = build_state(StateRequest(0.5, 0, "even", deform, nmax=30))
    k = sector_op("K-", deform)
    out = apply_operator(k, apply_operator(k, psi))
    np.testing.assert_allclose(out.amplitudes[:-2], 0.25 * psi.amplitudes[:-2], atol=1e-12)


def test_charge_mapping_and_leakage():
    psi = ChargeSectorState(1, np.ones(5) / np.sqrt(5))
    assert apply_operator(sector_op("A1"), psi).charge == 0
    assert apply_operator(sector_op("A2"), psi).charge == 2
    for g in ("K-", "K+", "K0"):
        assert apply_operator(sector_op(g), psi).charge == 1
    assert apply_operator(sector_op("A1d"), psi).leakage == 0.0
    up = apply_operator(sector_op("K+"), psi)
    # top pair |5,4> raised to |6,5>: sqrt(6*5) / sqrt(5)
    assert up.leakage == pytest.approx(np.sqrt(6.0), rel=1e-14)
    with pytest.raises(ValueError):
        sector_op("B7")


def test_ladder_product_diagonal():
    deform = DeformationSpec.qdeformed(1.3)
    for n in range(1, 8):
        b = ChargeSectorState.basis(0, n, 10)
        out = apply_operator(sector_op("A1d", deform) @ sector_op("A1", deform), b)
        assert out.amplitudes[n] == pytest.approx(n * deform.f2(n), rel=1e-14)


def test_dual_tilde_matches_inverse_deformation():
    deform = DeformationSpec.power_law(2.5)
    psi = ChargeSectorState(1, np.linspace(1, 2, 8))
    a = apply_operator(sector_op("At1d", deform), psi)
    b = apply_operator(sector_op("A1d", deform.dual()), psi)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, rtol=1e-14)


def test_expectation_examples():
    psi, _ = build_state(StateRequest(1.0, 0, "even", DeformationSpec.identity()))
    assert expectation(sector_op("A1"), psi).sector_orthogonal
    assert expect(sector_op("A1"), psi) == 0
    kk = expect(sector_op("K-d") @ sector_op("K-"), psi).real
    # |xi|^2 tanh-bar(1): odd series 1 + 1/36 + ... over even series 1 + 1/4 + ...
    odd = sum(1 / math.factorial(2 * n + 1) ** 2 for n in range(12))
    even = sum(1 / math.factorial(2 * n) ** 2 for n in range(12))
    assert kk == pytest.approx(odd / even, rel=1e-13)
    assert kk == pytest.approx(0.8211360749, rel=1e-9)
    q = sector_op("Q")
    psi3, _ = build_state(StateRequest(0.4, -3, "odd", DeformationSpec.power_law(2)))
    assert expect(q, psi3).real == pytest.approx(-3, abs=1e-12)


PAIRS = [("N1", "A1"), ("N1", "A1d"), ("N2", "A2"), ("A1", "A1d"), ("A2", "A2d"),
         ("At1", "At1d"), ("K+", "K-"), ("K0", "K+"), ("K0", "K-"), ("K-d", "K+d"),
         ("K0", "K-d"), ("K0", "K+d"), ("K-", "K-d"), ("Q", "K+")]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), q=st.integers(-3, 3),
       pair=st.sampled_from(PAIRS), which=st.integers(0, 2))
def test_commutators_on_random_probes(seed, q, pair, which):
    deform = DEFORMS[which]
    rng = np.random.default_rng(seed)
    amps = np.zeros(31, dtype=complex)
    amps[:27] = rng.standard_normal(27) + 1j * rng.standard_normal(27)
    probe = ChargeSectorState(q, amps / np.linalg.norm(amps))
    a, b = (sector_op(n, deform) for n in pair)
    assert commutator_check(a, b, probe) < 1e-12


def test_probe_too_close():
    probe = ChargeSectorState(0, np.ones(6) / np.sqrt(6))
    with pytest.raises(ProbeTooCloseError, match="probe too close to truncation"):
        commutator_check(sector_op("N1"), sector_op("A1"), probe)
