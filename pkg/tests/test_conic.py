"""Conic solver: certified intervals, certificates, bisection, facial reduction."""

import numpy as np
import pytest

from opsyskit import BracketInvalidError, SDPBuilder, TolerancePolicy, bisect_scalar
from opsyskit.conic import (
    embed_hermitian,
    facial_reduce,
    minimize_over_states,
    unembed_hermitian,
)

TOL = TolerancePolicy()


def test_embed_unembed_roundtrip():
    rng = np.random.default_rng(0)
    H = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = (H + H.conj().T) / 2
    E = embed_hermitian(H)
    assert np.allclose(E, E.T)
    assert np.allclose(unembed_hermitian(E), H)
    wH = np.linalg.eigvalsh(H)
    wE = np.linalg.eigvalsh(E)
    assert np.allclose(np.sort(np.concatenate([wH, wH])), wE)


def test_largest_eigenvalue_sdp():
    # minimize lam s.t. lam I - diag(3,-1) >= 0  ->  3
    b = SDPBuilder()
    lam = b.scalar()
    b.lmi(-np.diag([3.0, -1.0]).astype(complex), [(lam, np.eye(2, dtype=complex))])
    b.objective({lam: 1.0}, "min")
    res = b.solve(TOL)
    assert res.status == "OPTIMAL"
    assert res.value_lo <= 3.0 + 1e-7 and res.value_hi >= 3.0 - 1e-7
    assert abs(res.value - 3.0) <= 1e-7
    # certified interval is tight
    assert res.value_hi - res.value_lo <= TOL.feas_margin * max(1.0, abs(res.value_hi))


def test_infeasible_expectation_with_certificate():
    # rho >= 0, Tr rho = 1, <rho, diag(1,-1)> = 2: beyond the spectral range
    b = SDPBuilder()
    v = b.hermitian(2)
    b.psd(v)
    b.eq(v.pairing(np.eye(2, dtype=complex)), 1.0)
    b.eq(v.pairing(np.diag([1.0, -1.0]).astype(complex)), 2.0)
    res = b.solve(TOL)
    assert res.status == "INFEASIBLE"
    assert res.certificate is not None


def test_unbounded_detection():
    b = SDPBuilder()
    x = b.scalar()
    b.lmi(np.zeros((1, 1), dtype=complex), [(x, np.eye(1, dtype=complex))])
    b.objective({x: 1.0}, "max")
    res = b.solve(TOL)
    assert res.status == "UNBOUNDED"


def test_weak_duality_recompute():
    # recomputing the objective at the returned primal stays in the interval
    rng = np.random.default_rng(4)
    for _ in range(5):
        A = rng.normal(size=(3, 3))
        A = (A + A.T) / 2 + 0j
        b = SDPBuilder()
        lam = b.scalar()
        b.lmi(-A, [(lam, np.eye(3, dtype=complex))])
        b.objective({lam: 1.0}, "min")
        res = b.solve(TOL)
        assert res.status == "OPTIMAL"
        val = res.x[lam]
        assert res.value_lo - TOL.feas_margin <= val <= res.value_hi + TOL.feas_margin
        assert abs(val - np.linalg.eigvalsh(A)[-1]) <= 1e-7


def test_variable_permutation_invariance():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(3, 3))
    A = (A + A.T) / 2 + 0j
    vals = []
    for order in ((0, 1), (1, 0)):
        b = SDPBuilder()
        ids = [b.scalar() for _ in range(2)]
        lam, mu = ids[order[0]], ids[order[1]]
        b.lmi(-A, [(lam, np.eye(3, dtype=complex))])
        b.lmi(np.eye(3, dtype=complex) * 10.0, [(mu, np.eye(3, dtype=complex))])
        b.objective({lam: 1.0, mu: 0.1}, "min")
        b.leq({mu: -1.0}, 0.0)  # mu >= 0
        res = b.solve(TOL)
        assert res.status == "OPTIMAL"
        vals.append(res.value)
    assert abs(vals[0] - vals[1]) <= 10 * TOL.feas_margin


def test_rank_deficient_equalities_are_reduced():
    b = SDPBuilder()
    x = b.scalar()
    y = b.scalar()
    b.lmi(np.zeros((1, 1), dtype=complex), [(x, np.eye(1, dtype=complex))])
    b.lmi(np.zeros((1, 1), dtype=complex), [(y, np.eye(1, dtype=complex))])
    b.eq({x: 1.0, y: 1.0}, 2.0)
    b.eq({x: 2.0, y: 2.0}, 4.0)  # dependent duplicate
    b.objective({x: 1.0}, "min")
    res = b.solve(TOL)
    assert res.status == "OPTIMAL"
    assert abs(res.x[x] + res.x[y] - 2.0) <= 1e-7


def test_inconsistent_equalities_infeasible():
    b = SDPBuilder()
    x = b.scalar()
    b.lmi(np.zeros((1, 1), dtype=complex), [(x, np.eye(1, dtype=complex))])
    b.eq({x: 1.0}, 1.0)
    b.eq({x: 1.0}, 2.0)
    res = b.solve(TOL)
    assert res.status == "INFEASIBLE"


def test_bisect_scalar_threshold():
    got = bisect_scalar(lambda s: s >= 2.0, 0.0, 10.0, 1e-7)
    assert abs(got - 2.0) <= 1e-7


def test_bisect_scalar_psd_shift():
    A = np.diag([-1.0, 5.0])

    def pred(s):
        return np.linalg.eigvalsh(s * np.eye(2) + A)[0] >= 0

    got = bisect_scalar(pred, 0.0, 10.0, 1e-7)
    assert abs(got - 1.0) <= 1e-7


def test_bisect_scalar_bad_bracket():
    with pytest.raises(BracketInvalidError):
        bisect_scalar(lambda s: True, 0.0, 1.0, 1e-6)
    with pytest.raises(BracketInvalidError):
        bisect_scalar(lambda s: False, 0.0, 1.0, 1e-6)


def test_facial_reduction_detects_psd_span():
    # span{E11} inside 2x2: every constrained state is supported on e2
    E11 = np.diag([1.0, 0.0]).astype(complex)
    isos, cons, dims, steps = facial_reduce(
        [[E11], [np.eye(2, dtype=complex)]], [0.0, 1.0], [2], TOL
    )
    assert steps >= 1
    assert dims == [1]
    V = isos[0]
    assert np.allclose(V.conj().T @ E11 @ V, 0.0, atol=1e-7)


def test_facial_reduction_regular_case():
    y = np.diag([-1.0, 0.0, 1.0, 2.0]).astype(complex)
    isos, cons, dims, steps = facial_reduce(
        [[y], [np.eye(4, dtype=complex)]], [0.0, 1.0], [4], TOL
    )
    assert dims == [4]


def test_minimize_over_states_cauchy_schwarz_face():
    # min 2 Re W12 over states with W11 = 0 is exactly 0 (W forced onto e2)
    E11 = np.diag([1.0, 0.0]).astype(complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    res = minimize_over_states([X], [[E11]], [2], TOL)
    assert res.status in ("OPTIMAL", "FEASIBLE")
    assert abs(res.value) <= 1e-8
    W = res.certificate["W_blocks"][0]
    assert abs(W[0, 0]) <= 1e-7
    assert abs(np.trace(W) - 1.0) <= 1e-7


def test_minimize_over_states_unconstrained_is_lambda_min():
    rng = np.random.default_rng(12)
    A = rng.normal(size=(3, 3))
    A = (A + A.T) / 2 + 0j
    res = minimize_over_states([A], [], [3], TOL)
    assert abs(res.value - np.linalg.eigvalsh(A)[0]) <= 1e-7


def test_minimize_over_states_infeasible_when_identity_constrained():
    # <W, I> = 0 with Tr W = 1 leaves no state
    res = minimize_over_states(
        [np.zeros((2, 2), dtype=complex)], [[np.eye(2, dtype=complex)]], [2], TOL
    )
    assert res.status == "INFEASIBLE"


def test_problem_sexpr_dump():
    from opsyskit.conic import problem_to_sexpr

    b = SDPBuilder()
    lam = b.scalar()
    b.lmi(-np.diag([3.0, -1.0]).astype(complex), [(lam, np.eye(2, dtype=complex))])
    b.eq({lam: 1.0}, 3.0)
    b.objective({lam: 1.0}, "min")
    text = problem_to_sexpr(b.build())
    assert text.startswith("(sdp")
    assert "(lmi" in text and "(eq" in text and "(objective" in text


def test_infeasibility_certificate_verifies():
    # certificate duals pair nonnegatively with any feasible-by-construction
    # cone point and expose the contradiction in the equalities
    b = SDPBuilder()
    v = b.hermitian(2)
    b.psd(v)
    b.eq(v.pairing(np.eye(2, dtype=complex)), 1.0)
    b.eq(v.pairing(np.diag([1.0, -1.0]).astype(complex)), 2.0)
    res = b.solve(TOL)
    assert res.status == "INFEASIBLE"
    y = res.certificate["y"]
    assert y is not None
    # Farkas: Z = y1 * I + y2 * diag(1,-1) >= 0 pairs nonnegatively with every
    # cone point, while the same combination of the right-hand sides is < 0
    Z = y[0] * np.eye(2) + y[1] * np.diag([1.0, -1.0])
    assert np.linalg.eigvalsh(Z)[0] >= -1e-8
    assert y[0] * 1.0 + y[1] * 2.0 < -1e-8
    rng = np.random.default_rng(0)
    for _ in range(10):
        G = rng.normal(size=(2, 2))
        W = G @ G.T  # feasible-by-construction cone point
        assert np.trace(W @ Z).real >= -1e-9


def test_concurrent_independent_solves():
    # independent solves share no mutable state (per-call backend options)
    import concurrent.futures

    def solve_one(shift):
        A = np.diag([3.0 + shift, -1.0]).astype(complex)
        b = SDPBuilder()
        lam = b.scalar()
        b.lmi(-A, [(lam, np.eye(2, dtype=complex))])
        b.objective({lam: 1.0}, "min")
        res = b.solve(TOL)
        return res.status, res.value, 3.0 + shift

    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as ex:
        for status, value, expect in ex.map(solve_one, range(16)):
            assert status == "OPTIMAL"
            assert abs(value - expect) <= 1e-7
