"""Concrete operator systems: construction, positivity, norms, states."""

import numpy as np
import pytest

from opsyskit import (
    BlockShape,
    MatrixLevelElement,
    NonHermitianError,
    ShapeMismatchError,
    SystemElement,
    build_system,
    find_state,
    level_positive,
    order_seminorm_hermitian,
    system_norm,
)
from opsyskit.gallery import diagonal_algebra, partial_matrix_system
from opsyskit.linalg import random_hermitian
from opsyskit.opsys import random_level_element

from conftest import random_system


def test_build_l4_from_projections(l4):
    assert l4.dim == 4
    assert l4.is_full_algebra()
    assert np.allclose(l4.unit, np.eye(4))


def test_build_partial_matrix_system():
    S = partial_matrix_system()
    assert S.dim == 7
    assert not S.is_full_algebra()
    # the forbidden corner stays outside the span
    E13 = np.zeros((3, 3), dtype=complex)
    E13[0, 2] = 1.0
    assert not S.contains(E13 + E13.conj().T)


def test_build_trivial_system():
    S = build_system(BlockShape([2]), [], "C")
    assert S.dim == 1
    B = S.basis[0]
    assert np.allclose(B, np.eye(2) / np.sqrt(2)) or np.allclose(B, -np.eye(2) / np.sqrt(2))


def test_build_rejects_bad_generators():
    with pytest.raises(NonHermitianError):
        build_system(BlockShape([2]), [np.array([[0, 1], [0, 0]], dtype=complex)])
    with pytest.raises(ShapeMismatchError):
        build_system(BlockShape([1, 1]), [np.array([[0, 1], [1, 0]], dtype=complex)])


def test_system_element_membership_enforced(m2):
    S = build_system(BlockShape([2]), [], "C")  # span{I}
    with pytest.raises(ShapeMismatchError):
        SystemElement(S, np.diag([1.0, 2.0]).astype(complex))


def test_level_positive_examples(l4, m2):
    n = 2
    x = np.diag([0.0, 1.0, n + 1.0, 0.0]).astype(complex)
    assert level_positive(MatrixLevelElement(l4, [[x]]))
    e = m2.unit
    X = MatrixLevelElement(m2, [[e, e], [e, e]])
    assert level_positive(X)
    bad = np.array([[0, 1], [1, 0]], dtype=complex)
    assert not level_positive(MatrixLevelElement(m2, [[bad]]))


def test_level_positive_compatibility(m2, rng):
    # scalar compressions preserve positivity: X* P X stays positive
    for _ in range(10):
        P = random_level_element(m2, 2, rng)
        A = P.assembled()
        A = A @ A.conj().T  # positive level element with entries in M2
        P = MatrixLevelElement.from_assembled(m2, A, 2)
        assert level_positive(P)
        X = rng.normal(size=(2, 1)) + 1j * rng.normal(size=(2, 1))
        Xbig = np.kron(X, np.eye(2))
        comp = Xbig.conj().T @ A @ Xbig
        assert level_positive(MatrixLevelElement.from_assembled(m2, comp, 1))


def test_system_norm_examples(l4, m2):
    assert abs(system_norm(SystemElement(l4, l4.unit)) - 1.0) <= 1e-12
    assert abs(system_norm(SystemElement(l4, np.diag([0.0, 1, 2, 0]).astype(complex))) - 2.0) <= 1e-12
    E12 = np.zeros((2, 2), dtype=complex)
    E12[0, 1] = 1.0
    assert abs(system_norm(SystemElement(m2, E12)) - 1.0) <= 1e-12


def test_system_norm_is_spectral_norm(rng):
    for _ in range(10):
        S = random_system(rng)
        x = random_hermitian(rng, S.shape)
        xe = SystemElement(S, S.project(x))
        direct = np.linalg.norm(xe.matrix, 2)
        assert abs(system_norm(xe) - direct) <= 1e-7 * max(1.0, direct)


def test_order_seminorm_diagonal(l3=None):
    S = diagonal_algebra(2)
    x = SystemElement(S, np.diag([3.0, -2.0]).astype(complex))
    assert abs(order_seminorm_hermitian(x) - 3.0) <= 1e-7


def test_order_seminorm_unit(m2):
    assert abs(order_seminorm_hermitian(SystemElement(m2, m2.unit)) - 1.0) <= 1e-7


def test_order_seminorm_matches_system_norm_on_hermitian(rng):
    # with the ambient positive cone, the seminorm is the norm (the unit is
    # Archimedean at finite dimension)
    for _ in range(6):
        S = random_system(rng)
        x = SystemElement(S, S.project(random_hermitian(rng, S.shape)))
        assert abs(order_seminorm_hermitian(x) - system_norm(x)) <= 1e-6


def test_find_state_coordinate_example(l4):
    y = np.diag([-1.0, 0.0, 1.0, 2.0]).astype(complex)
    x = np.diag([0.0, 1.0, 2.0, 0.0]).astype(complex)
    st, val = find_state(l4, annihilate=[y], separate=x)
    assert st is not None
    assert abs(val - 1.0) <= 1e-6  # best annihilating state reaches exactly 1
    assert abs(st(y)) <= 1e-7
    assert np.real(st(np.diag([0.0, 1.0, 0, 0]).astype(complex))) >= -1e-7


def test_find_state_cauchy_schwarz_none(m2):
    E11 = np.diag([1.0, 0.0]).astype(complex)
    E12 = np.zeros((2, 2), dtype=complex)
    E12[0, 1] = 1.0
    st, val = find_state(m2, annihilate=[E11], separate=E12)
    assert st is None
    assert val == 0.0


def test_find_state_any_state(m2):
    st, _ = find_state(m2, annihilate=[], separate=None)
    assert st is not None
    assert abs(st(m2.unit) - 1.0) <= 1e-7


def test_states_are_positive_on_positives(rng):
    for _ in range(5):
        S = random_system(rng)
        st, _ = find_state(S, annihilate=[], separate=S.unit)
        assert st is not None
        for _ in range(5):
            p = S.project(random_hermitian(rng, S.shape))
            w = np.linalg.eigvalsh(p)
            p = p - w[0] * S.unit  # positive element of S
            assert np.real(st(p)) >= -1e-7


def test_json_roundtrip(l4):
    obj = l4.to_json()
    S2 = type(l4).from_json(obj)
    assert S2.dim == l4.dim
    assert np.allclose(S2.unit, l4.unit)
    x = SystemElement(l4, np.diag([0.0, 1, 2, 0]).astype(complex))
    obj = x.to_json()
    assert obj["system"] == "l4"
