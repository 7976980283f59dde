"""Tensor cones: spatial membership, maximal-cone verdicts, probes."""

import numpy as np
import pytest

from opsyskit import (
    PartnerNotCstarError,
    comm_membership,
    max_membership,
    max_tensor,
    min_membership,
    min_tensor,
    nuclearity_gap_probe,
)
from opsyskit.gallery import diagonal_algebra, matrix_algebra, partial_matrix_system
from opsyskit.tensor import TensorSystem, _pair_contraction, comm_tensor


def unit_matrix(i, j, d=2):
    E = np.zeros((d, d), dtype=complex)
    E[i, j] = 1.0
    return E


@pytest.fixture
def m2xm2():
    return min_tensor(matrix_algebra(2, "A"), matrix_algebra(2, "B"))


def min_positive_sample(TS, rng, delta=0.0):
    c = rng.normal(size=(TS.left.dim, TS.right.dim))
    m = np.zeros((TS.left.ambient_dim * TS.right.ambient_dim,) * 2, dtype=complex)
    for r in range(TS.left.dim):
        for s in range(TS.right.dim):
            m = m + c[r, s] * np.kron(TS.left.basis[r], TS.right.basis[s])
    lam = float(np.linalg.eigvalsh(m)[0])
    e = np.kron(TS.left.unit, TS.right.unit)
    return m - lam * e + delta * e


def test_min_membership_products_and_flip(m2xm2):
    p = np.array([[1, 0.3], [0.3, 0.5]], dtype=complex)
    q = np.array([[2, 0.1j], [-0.1j, 1]], dtype=complex)
    assert min_membership(m2xm2, np.kron(p, q))
    ent = sum(np.kron(unit_matrix(i, j), unit_matrix(i, j)) for i in range(2) for j in range(2))
    assert min_membership(m2xm2, ent)
    flip = sum(np.kron(unit_matrix(i, j), unit_matrix(j, i)) for i in range(2) for j in range(2))
    assert not min_membership(m2xm2, flip)


def test_tensor_system_layout_and_coefficients(m2xm2):
    u = np.kron(np.eye(2), np.eye(2)) + 0j
    ue = m2xm2.element_from_kron(u)
    F = m2xm2.coefficients(ue)
    back = m2xm2.from_coefficients(F)
    assert np.allclose(back.matrix, ue.matrix, atol=1e-10)


def test_max_shortcut_member_and_certificates(m2xm2, rng):
    for _ in range(5):
        u = min_positive_sample(m2xm2, rng, delta=0.1)
        v = max_membership(m2xm2, m2xm2.element_from_kron(u), k=1)
        assert v.status == "MEMBER"
        assert v.certificate.get("reason") == "NUCLEAR_PARTNER"


def test_max_shortcut_not_member_certificate(m2xm2):
    flip = sum(np.kron(unit_matrix(i, j), unit_matrix(j, i)) for i in range(2) for j in range(2))
    v = max_membership(m2xm2, m2xm2.element_from_kron(flip), k=1)
    assert v.status == "NOT_MEMBER"
    F = v.certificate["functional_coefficients"]
    # the separating functional evaluates negatively on the element
    val = v.certificate["value"]
    assert val < -1e-7


def test_max_audit_exact_regrouping_full_matrix(m2xm2, rng):
    for _ in range(5):
        u = min_positive_sample(m2xm2, rng)
        v = max_membership(m2xm2, m2xm2.element_from_kron(u), k=2, audit=True, rng=rng)
        assert v.status == "MEMBER"
        assert v.certificate["residual"] <= 1e-7
        # reassemble by hand
        total = np.zeros_like(u)
        for P, Q, k in v.certificate["pairs"]:
            total = total + _pair_contraction(
                P, Q, k, m2xm2.left.ambient_dim, m2xm2.right.ambient_dim
            )
        assert np.linalg.norm(total - u, 2) <= 1e-7 * max(1.0, np.linalg.norm(u, 2))


def test_max_audit_exact_regrouping_diagonal(rng):
    TS = max_tensor(matrix_algebra(2, "A"), diagonal_algebra(3, "l3"))
    for _ in range(5):
        u = min_positive_sample(TS, rng)
        v = max_membership(TS, TS.element_from_kron(u), k=1, audit=True, rng=rng)
        assert v.status == "MEMBER"
        assert v.certificate["residual"] <= 1e-7


def test_max_member_implies_min_member(rng):
    TS = max_tensor(diagonal_algebra(2), diagonal_algebra(3))
    for _ in range(5):
        u = min_positive_sample(TS, rng, delta=0.05)
        v = max_membership(TS, TS.element_from_kron(u), k=1, audit=True, rng=rng)
        if v.status == "MEMBER":
            assert min_membership(TS, TS.element_from_kron(u))


def test_alternating_inner_pass_products():
    # without full-algebra factors the alternation must still decompose a
    # product of positives plus a unit multiple
    S7 = partial_matrix_system()
    TS = max_tensor(S7, S7)
    rng = np.random.default_rng(5)
    p = np.diag([1.0, 0.5, 0.2]).astype(complex)
    u = np.kron(p, p) + 0.5 * np.kron(S7.unit, S7.unit)
    v = max_membership(TS, TS.element_from_kron(u), k=2, rng=3)
    assert v.status == "MEMBER"
    assert v.certificate.get("residual", 0.0) <= 1e-6 or "relaxed_dual_minimum" in v.certificate


def test_comm_membership_guard_and_delegation(rng):
    S7 = partial_matrix_system()
    with pytest.raises(PartnerNotCstarError):
        comm_tensor(S7, S7)
    TS = comm_tensor(S7, matrix_algebra(2, "M2"))
    u = min_positive_sample(TS, rng, delta=0.1)
    v = comm_membership(TS, TS.element_from_kron(u), k=1)
    assert v.status == "MEMBER"
    with pytest.raises(PartnerNotCstarError):
        comm_membership(TensorSystem(S7, S7, "MAX"), np.kron(S7.unit, S7.unit))


def test_nuclearity_probe_nuclear_partner():
    rep = nuclearity_gap_probe(diagonal_algebra(3), diagonal_algebra(3), budget=2, rng=0)
    assert rep["verdict"] == "NO_GAP"
    assert rep["reason"] == "NUCLEAR_PARTNER"
    rep = nuclearity_gap_probe(matrix_algebra(2), partial_matrix_system(), budget=2, rng=0)
    assert rep["verdict"] == "NO_GAP"


def test_nuclearity_probe_partial_matrix_exploratory():
    S7 = partial_matrix_system()
    rep = nuclearity_gap_probe(S7, S7, levels=(1,), budget=2, rng=1)
    assert rep["verdict"] in ("UNDECIDED", "NO_GAP", "GAP_CERTIFIED")
    # a gap claim would require a certificate
    if rep["verdict"] == "GAP_CERTIFIED":
        assert rep["certified_gap"] is not None
    assert len(rep["candidates"]) == 2


def test_level_two_matches_inflated_right_factor(rng):
    # testing a level-2 element of S (x) T equals testing the level-1
    # element of S (x) (M_2 tensor T) under the re-association permutation;
    # with a full-matrix factor both sides are exact, so they must agree
    S = diagonal_algebra(2, "l2")
    T = matrix_algebra(2, "T")
    TS = min_tensor(S, T)
    M2T = min_tensor(matrix_algebra(2, "M2lvl"), T)
    big = min_tensor(S, M2T.system)
    dS, dT = 2, 2
    for _ in range(10):
        u = min_positive_sample(TS, rng, delta=-0.01)  # straddle the boundary
        # level-2 diagonal inflation [[u, 0], [0, u]] over S (x) T
        U2 = np.zeros((2 * dS * dT, 2 * dS * dT), dtype=complex)
        U2[: dS * dT, : dS * dT] = u
        U2[dS * dT :, dS * dT :] = u
        lvl2 = bool(np.linalg.eigvalsh((U2 + U2.conj().T) / 2)[0] >= -1e-9)
        # re-associate: S (x) (M_2 (x) T) with the M_2 index in the middle
        Ur = U2.reshape(2, dS, dT, 2, dS, dT).transpose(1, 0, 2, 4, 3, 5)
        Ur = Ur.reshape(2 * dS * dT, 2 * dS * dT)
        assoc = min_membership(big, big.element_from_kron(Ur))
        assert assoc == lvl2


def test_comm_equals_max_on_sample(rng):
    # against a diagonal C*-factor the commuting product delegates to the
    # maximal one: identical verdicts across a 20-element sample
    S7 = partial_matrix_system()
    l2 = diagonal_algebra(2, "l2")
    TC = comm_tensor(S7, l2)
    TM = max_tensor(S7, l2)
    for i in range(20):
        u = min_positive_sample(TC, rng, delta=0.05 if i % 2 else -0.05)
        a = comm_membership(TC, TC.element_from_kron(u), k=1)
        b = max_membership(TM, TM.element_from_kron(u), k=1)
        assert a.status == b.status


def test_audit_mode_not_member_is_exactly_certified(m2xm2):
    # with a full-matrix factor the separating functional must pass the
    # exact positivity certification (slice map into the concrete dual)
    flip = sum(
        np.kron(unit_matrix(i, j), unit_matrix(j, i)) for i in range(2) for j in range(2)
    )
    v = max_membership(m2xm2, m2xm2.element_from_kron(flip), k=1, audit=True, rng=0)
    assert v.status == "NOT_MEMBER"
    assert v.certificate["value"] < -1e-7
    trail = v.certificate["positivity_audit"]
    assert trail["route"] == "exact-dual"
    # the Choi family certifying the functional's positivity is PSD on the nose
    for C in trail["choi_blocks"]:
        assert np.linalg.eigvalsh(C)[0] >= -1e-7
    # and the separating value matches the spectral bottom of the element
    assert abs(v.certificate["value"] + 1.0) <= 1e-6


def test_exact_dual_equals_spectral_bottom_on_full_span(rng):
    # over a full-span product the cone-positive functionals are exactly the
    # ambient states, so the exact dual minimum is the smallest eigenvalue
    from opsyskit.tensor import _exact_dual_minimum
    from opsyskit.linalg import DEFAULT_TOL

    TS = max_tensor(matrix_algebra(2, "A"), matrix_algebra(2, "B"))
    for _ in range(5):
        G = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u = (G + G.conj().T) / 2
        val, F, choi = _exact_dual_minimum(TS, u, DEFAULT_TOL)
        assert abs(val - np.linalg.eigvalsh(u)[0]) <= 1e-6


def test_exact_dual_nonnegative_on_nuclear_partial_span(rng):
    from opsyskit.tensor import _exact_dual_minimum
    from opsyskit.linalg import DEFAULT_TOL

    S7 = partial_matrix_system()
    TS = max_tensor(S7, matrix_algebra(2, "M2"))
    for _ in range(5):
        c = rng.normal(size=(S7.dim, 4))
        u = sum(
            c[r, s] * np.kron(S7.basis[r], TS.right.basis[s])
            for r in range(S7.dim)
            for s in range(4)
        )
        u = u - np.linalg.eigvalsh(u)[0] * np.kron(S7.unit, np.eye(2))
        val, _, _ = _exact_dual_minimum(TS, u, DEFAULT_TOL)
        assert val >= -1e-7
