"""Complete positivity certificates, dual systems, bidual probes."""

import numpy as np
import pytest

from opsyskit import (
    CPMap,
    DualSystem,
    MatrixLevelElement,
    NotStarPreservingError,
    bidual_compare,
    cp_check,
    dual_cone_contains,
    lance_functional_to_map,
    level_positive,
)
from opsyskit.gallery import diagonal_algebra, matrix_algebra, partial_matrix_system


def transpose_map(m2):
    return CPMap(m2, 2, tuple(B.T.copy() for B in m2.basis))


def kraus_map(S, ops):
    k = ops[0].shape[0]
    return CPMap(
        S, k, tuple(sum(V @ B @ V.conj().T for V in ops) for B in S.basis)
    )


def direct_choi(phi):
    """Independent Choi construction for maps on a full matrix algebra."""
    S = phi.source
    d = S.ambient_dim
    C = np.zeros((d * phi.k, d * phi.k), dtype=complex)
    for p in range(d):
        for q in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[p, q] = 1.0
            img = phi(E)
            C[p * phi.k:(p + 1) * phi.k, q * phi.k:(q + 1) * phi.k] = img
    return C


def test_identity_is_cp(m2):
    v = cp_check(CPMap(m2, 2, tuple(m2.basis)))
    assert v.is_cp
    assert v.choi_blocks is not None


def test_transpose_not_cp_with_witness(m2):
    v = cp_check(transpose_map(m2))
    assert not v.is_cp
    X, vec, value = v.witness
    assert X.level == 2
    assert level_positive(X)
    img = transpose_map(m2).apply_level(X)
    quad = np.real(np.vdot(vec, img @ vec))
    assert quad < -1e-7
    assert abs(quad - value) <= 1e-9


def test_states_are_cp(m2):
    rho = np.array([[0.25, 0.1], [0.1, 0.75]], dtype=complex)
    action = tuple(np.array([[np.trace(rho @ B)]], dtype=complex) for B in m2.basis)
    assert cp_check(CPMap(m2, 1, action)).is_cp


def test_compression_is_cp():
    S = partial_matrix_system()
    sel = np.array([[1, 0, 0], [0, 0, 1.0]], dtype=complex)
    action = tuple(sel @ B @ sel.conj().T for B in S.basis)
    v = cp_check(CPMap(S, 2, action))
    assert v.is_cp
    assert v.info["path"] == "extension"


def test_extension_path_state_with_forced_face():
    # the coordinate state on l4 forces a rank-one Choi; the extension
    # feasibility must still certify it
    S = diagonal_algebra(4)
    action = tuple(np.array([[B[1, 1]]], dtype=complex) for B in S.basis)
    v = cp_check(CPMap(S, 1, action))
    assert v.is_cp


def test_extension_path_witness_on_proper_subsystem():
    # Bloch-inflation on span{I, X, Z}: not even positive, so not cp; the
    # infeasibility certificate must polish into a verifiable violation
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    from opsyskit.opsys import build_system
    from opsyskit.linalg import BlockShape

    S = build_system(BlockShape([2]), [X, Z], "IXZ")
    assert not S.is_full_algebra()
    imgs = []
    for B in S.basis:
        unit_part = (np.trace(B).real / 2) * np.eye(2)
        imgs.append(unit_part + 2 * (B - unit_part))
    phi = CPMap(S, 2, tuple(imgs))
    v = cp_check(phi)
    assert not v.is_cp
    assert v.info["path"] == "extension"
    Xw, vec, value = v.witness
    assert level_positive(Xw)
    img = phi.apply_level(Xw)
    assert np.real(np.vdot(vec, img @ vec)) < -1e-7

    dephase = CPMap(S, 2, tuple((B + Z @ B @ Z) / 2 for B in S.basis))
    assert cp_check(dephase).is_cp


def test_star_preservation_enforced(m2):
    bad = [B.copy() for B in m2.basis]
    bad[0] = 1j * bad[0]
    with pytest.raises(NotStarPreservingError):
        cp_check(CPMap(m2, 2, tuple(bad)))


def test_cp_check_agrees_with_direct_choi(rng):
    for p in (2, 3):
        S = matrix_algebra(p)
        for trial in range(30):
            if trial % 2 == 0:
                ops = [
                    rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
                    for _ in range(2)
                ]
                phi = kraus_map(S, ops)
            else:
                imgs = []
                for B in S.basis:
                    G = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
                    imgs.append((G + G.conj().T) / 2)
                phi = CPMap(S, p, tuple(imgs))
            ours = cp_check(phi).is_cp
            ref = bool(np.linalg.eigvalsh(direct_choi(phi))[0] >= -1e-9)
            assert ours == ref


def test_cp_composition_closure(rng, m2):
    for _ in range(5):
        ops1 = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))]
        ops2 = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))]
        phi = kraus_map(m2, ops1)
        # compose: psi o phi where psi acts on M2 by the second Kraus family
        comp_action = tuple(
            sum(V @ img @ V.conj().T for V in ops2) for img in phi.action
        )
        comp = CPMap(m2, 2, comp_action)
        assert cp_check(phi).is_cp
        assert cp_check(comp).is_cp


def test_cp_norm_attained_at_unit(rng, m2):
    ops = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))]
    phi = kraus_map(m2, ops)
    assert cp_check(phi).is_cp
    bound = np.linalg.norm(phi(m2.unit), 2)
    for _ in range(10):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        x = x / np.linalg.norm(x, 2)
        assert np.linalg.norm(phi(m2.project(x)), 2) <= bound * (1 + 1e-6) + 1e-9


def test_dual_system_unit_default_and_faithfulness(m2):
    D = DualSystem(m2)
    assert abs(D.unit(m2.unit) - 1.0) <= 1e-12
    # a non-faithful candidate is rejected
    with pytest.raises(ValueError):
        DualSystem(m2, unit_rep=np.diag([1.0, 0.0]).astype(complex))


def test_dual_cone_state_and_negation(m2):
    D = DualSystem(m2)
    rho = np.array([[0.5, 0.2], [0.2, 0.5]], dtype=complex)
    ok, _ = dual_cone_contains(D, [[rho.T]])
    assert ok
    ok, _ = dual_cone_contains(D, [[-rho.T]])
    assert not ok


def test_dual_cone_matches_choi_on_m2(rng, m2):
    D = DualSystem(m2)
    for _ in range(20):
        G = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        R = (G + G.conj().T) / 2
        ok, _ = dual_cone_contains(D, [[R.T]])
        assert ok == bool(np.linalg.eigvalsh(R)[0] >= -1e-9)


def test_bidual_compare_l3_exhaustive(l3):
    elements = []
    for signs in np.ndindex(3, 3, 3):
        vec = np.array(signs, dtype=float) - 1.0
        elements.append(
            MatrixLevelElement(l3, [[np.diag(vec).astype(complex)]])
        )
    rep = bidual_compare(l3, levels=(1,), elements=elements, rng=0)
    assert rep["agree"]
    assert rep["checked"] == 27


def test_bidual_compare_m2_random(m2):
    rep = bidual_compare(m2, levels=(1, 2), num_samples=25, rng=4)
    assert rep["agree"]
    assert rep["checked"] == 50


def test_lance_map_product_state(m2, l3):
    DT = DualSystem(l3)
    # f = g (x) h for states g, h: L_f(x) = g(x) h, a rank-one map
    g = np.diag([0.5, 0.5]).astype(complex)
    h = np.diag([0.2, 0.3, 0.5]).astype(complex)
    F = np.zeros((m2.dim, l3.dim), dtype=complex)
    for r, B in enumerate(m2.basis):
        for s, C in enumerate(l3.basis):
            F[r, s] = np.trace(g @ B) * np.trace(h @ C)
    L = lance_functional_to_map(F, m2, DT)
    img = L(m2.unit)
    assert np.allclose(DT.canonical(img), DT.canonical(h), atol=1e-9)
    zero = lance_functional_to_map(np.zeros_like(F), m2, DT)
    assert np.allclose(zero(m2.unit), 0.0)


def test_lance_map_choi_correspondence(rng, m2):
    # evaluation against a PSD matrix on M2 (x) M2 gives a cp slice map
    one = matrix_algebra(2, "M2b")
    DT = DualSystem(one)
    G = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    P = G @ G.conj().T
    F = np.zeros((m2.dim, one.dim), dtype=complex)
    for r, B in enumerate(m2.basis):
        for s, C in enumerate(one.basis):
            F[r, s] = np.trace(P @ np.kron(B, C))
    L = lance_functional_to_map(F, m2, DT)
    action = tuple(L(B).T for B in m2.basis)
    assert cp_check(CPMap(m2, 2, action)).is_cp


def test_random_choi_functional_matrices_certify(rng, m2):
    from opsyskit.dualsys import _random_cp_functional_matrix

    D = DualSystem(m2)
    for m in (1, 2):
        for _ in range(5):
            reps = _random_cp_functional_matrix(m2, m, rng)
            ok, verdict = dual_cone_contains(D, reps)
            assert ok, "a Choi-built functional matrix must certify positive"
