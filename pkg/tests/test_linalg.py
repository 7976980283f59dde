"""Matrix kernel: eigendecomposition, PSD tests, spans, serialization."""

import numpy as np
import pytest

from opsyskit import BlockShape, NonHermitianError, ShapeMismatchError, TolerancePolicy
from opsyskit import linalg


def test_eig_hermitian_diagonal():
    w, V = linalg.eig_hermitian(np.diag([3.0, -1.0]))
    assert np.allclose(w, [3.0, -1.0])


def test_eig_hermitian_pauli_x():
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    w, _ = linalg.eig_hermitian(X)
    assert np.allclose(w, [1.0, -1.0])


def test_eig_hermitian_identity():
    w, _ = linalg.eig_hermitian(np.eye(5))
    assert np.allclose(w, np.ones(5))


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        linalg.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eig_reconstruction_random():
    rng = np.random.default_rng(7)
    for _ in range(20):
        d = int(rng.integers(2, 9))
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        A = (A + A.conj().T) / 2
        w, V = linalg.eig_hermitian(A)
        R = (V * w) @ V.conj().T
        assert np.linalg.norm(R - A, 2) <= 1e-9 * max(1.0, np.linalg.norm(A, 2))
        assert np.all(np.diff(w) <= 1e-12)


def test_is_psd_examples():
    n = 3
    assert linalg.is_psd(np.diag([0.0, 1.0, n + 1.0, 0.0]))
    assert not linalg.is_psd(np.array([[0, 1], [1, 0]], dtype=complex))
    assert linalg.is_psd(np.zeros((3, 3)))


def test_psd_cone_pointedness_at_tolerance():
    tol = TolerancePolicy()
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = rng.normal(size=(4, 4))
        A = (A + A.T) / 2
        if linalg.is_psd(A, tol) and linalg.is_psd(-A, tol):
            assert np.linalg.norm(A, 2) <= 2 * tol.psd_tol * max(1.0, np.linalg.norm(A, 2))


def test_kron_examples():
    I2 = np.eye(2)
    assert np.allclose(linalg.kron(I2, I2), np.eye(4))
    E11 = np.diag([1.0, 0.0])
    E22 = np.diag([0.0, 1.0])
    K = linalg.kron(E11, E22)
    expected = np.zeros((4, 4))
    expected[1, 1] = 1.0
    assert np.allclose(K, expected)
    assert np.allclose(linalg.kron(np.diag([1.0, 2]), np.diag([3.0, 4])), np.diag([3.0, 4, 6, 8]))


def test_kron_multiplicative():
    rng = np.random.default_rng(11)
    A, B, C, D = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(4))
    lhs = linalg.kron(A @ B, C @ D)
    rhs = linalg.kron(A, C) @ linalg.kron(B, D)
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-10 * max(1.0, np.linalg.norm(lhs, 2))


def test_real_span_basis_collapses_dependent():
    I2 = np.eye(2, dtype=complex)
    basis = linalg.real_span_basis([I2, 2 * I2])
    assert len(basis) == 1
    assert np.allclose(abs(np.trace(basis[0] @ basis[0].conj().T)), 1.0)


def test_real_span_basis_orthonormal():
    E11 = np.diag([1.0, 0.0]).astype(complex)
    E22 = np.diag([0.0, 1.0]).astype(complex)
    basis = linalg.real_span_basis([E11, E22])
    assert len(basis) == 2
    G = np.array([[np.real(np.trace(a.conj().T @ b)) for b in basis] for a in basis])
    assert np.allclose(G, np.eye(2), atol=1e-12)


def test_real_span_basis_single_offdiagonal():
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    basis = linalg.real_span_basis([X])
    assert len(basis) == 1
    assert np.allclose(basis[0], X / np.sqrt(2)) or np.allclose(basis[0], -X / np.sqrt(2))


def test_project_to_span_idempotent():
    rng = np.random.default_rng(5)
    mats = [linalg.random_hermitian(rng, BlockShape([3])) for _ in range(2)]
    basis = linalg.real_span_basis(mats)
    A = linalg.random_hermitian(rng, BlockShape([3]))
    P = linalg.project_to_span(A, basis)
    P2 = linalg.project_to_span(P, basis)
    assert np.linalg.norm(P - P2) <= 1e-10
    assert linalg.in_span(P, basis)


def test_block_shape_roundtrip():
    shape = BlockShape([1, 2])
    assert shape.dim == 3
    A = np.diag([1.0, 2.0, 3.0]).astype(complex)
    A[1, 2] = 1j
    A[2, 1] = -1j
    blocks = shape.split(A)
    assert blocks[0].shape == (1, 1)
    assert blocks[1].shape == (2, 2)
    assert np.allclose(shape.assemble(blocks), A)
    bad = np.ones((3, 3), dtype=complex)
    assert not shape.conforms(bad)
    with pytest.raises(ShapeMismatchError):
        shape.validate(bad)


def test_level_blocks_roundtrip():
    shape = BlockShape([1, 2])
    rng = np.random.default_rng(1)
    n = 2
    A = np.zeros((n * 3, n * 3), dtype=complex)
    for u in range(n):
        for v in range(n):
            A[u * 3:(u + 1) * 3, v * 3:(v + 1) * 3] = linalg.random_hermitian(rng, shape)
    blocks = shape.level_blocks(A, n)
    assert [b.shape[0] for b in blocks] == [2, 4]
    assert np.allclose(shape.level_assemble(blocks, n), A)


def test_matrix_json_roundtrip():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    obj = linalg.matrix_to_json(A)
    assert np.allclose(linalg.matrix_from_json(obj), A)
    shape = BlockShape([1, 2])
    B = linalg.random_hermitian(rng, shape)
    objs = linalg.blocks_to_json(B, shape)
    assert len(objs) == 2
    assert np.allclose(linalg.blocks_from_json(objs, shape), B)


def test_tolerance_policy_validation():
    with pytest.raises(ValueError):
        TolerancePolicy(psd_tol=0.0)
