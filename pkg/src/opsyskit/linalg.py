"""Dense complex/hermitian matrix kernel.

Everything downstream works with block-diagonal complex matrices inside a
direct sum of full matrix algebras.  This module owns the hermitian
eigendecomposition, PSD tests with an explicit tolerance policy, Kronecker
and direct-sum constructions, and real-linear span manipulation of
hermitian matrices under the trace inner product  <A, B> = Re Tr(A* B).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonHermitianError, ShapeMismatchError

__all__ = [
    "TolerancePolicy",
    "BlockShape",
    "adjoint",
    "is_hermitian",
    "eig_hermitian",
    "spectral_norm",
    "lambda_min",
    "is_psd",
    "kron",
    "hermitian_basis",
    "real_span_basis",
    "project_to_span",
    "in_span",
    "span_coefficients",
    "random_hermitian",
    "matrix_to_json",
    "matrix_from_json",
    "blocks_to_json",
    "blocks_from_json",
]

DEFAULT_HERM_TOL = 1e-9


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical tolerances shared by every decision procedure.

    psd_tol      eigenvalue floor for PSD tests, relative with a max(1, norm) floor
    bisect_tol   target width for scalar bisections and epsilon-star decisions
    feas_margin  feasibility slack for solver certificates and state searches
    rep_bound    norm cap on representative coefficients in exact-feasibility
                 searches (distinguishes attained from merely asymptotic ones)
    """

    psd_tol: float = 1e-9
    bisect_tol: float = 1e-8
    feas_margin: float = 1e-7
    rep_bound: float = 1e3

    def __post_init__(self):
        for name in ("psd_tol", "bisect_tol", "feas_margin", "rep_bound"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = TolerancePolicy()


@dataclass(frozen=True)
class BlockShape:
    """Ordered block sizes d_1..d_k of the ambient algebra  M_{d_1} + ... + M_{d_k}.

    Elements are block-diagonal matrices of total dimension dim = sum(d_i);
    the scalar algebra l_m^inf is the shape (1,)*m.
    """

    blocks: tuple[int, ...]
    offsets: tuple[int, ...] = field(init=False, repr=False)

    def __init__(self, blocks):
        blocks = tuple(int(b) for b in blocks)
        if not blocks or any(b <= 0 for b in blocks):
            raise ValueError("block sizes must be positive integers")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "offsets", tuple(int(o) for o in np.cumsum((0,) + blocks[:-1])))

    @property
    def dim(self) -> int:
        return sum(self.blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def split(self, A: np.ndarray) -> list[np.ndarray]:
        """Diagonal blocks of A in this shape."""
        A = np.asarray(A, dtype=complex)
        return [
            A[o : o + d, o : o + d].copy() for o, d in zip(self.offsets, self.blocks)
        ]

    def assemble(self, blocks) -> np.ndarray:
        """Block-diagonal matrix from a list of per-block matrices."""
        if len(blocks) != self.num_blocks:
            raise ShapeMismatchError(
                f"expected {self.num_blocks} blocks, got {len(blocks)}"
            )
        A = np.zeros((self.dim, self.dim), dtype=complex)
        for o, d, B in zip(self.offsets, self.blocks, blocks):
            B = np.asarray(B, dtype=complex)
            if B.shape != (d, d):
                raise ShapeMismatchError(f"block of shape {B.shape}, expected ({d},{d})")
            A[o : o + d, o : o + d] = B
        return A

    def project(self, A: np.ndarray) -> np.ndarray:
        """Zero out all off-block entries (pinching onto the ambient algebra)."""
        return self.assemble(self.split(A))

    def conforms(self, A: np.ndarray, tol: float = DEFAULT_HERM_TOL) -> bool:
        A = np.asarray(A, dtype=complex)
        if A.shape != (self.dim, self.dim):
            return False
        off = A - self.project(A)
        return np.linalg.norm(off) <= tol * max(1.0, np.linalg.norm(A))

    def validate(self, A: np.ndarray, what: str = "matrix") -> np.ndarray:
        A = np.asarray(A, dtype=complex)
        if A.shape != (self.dim, self.dim):
            raise ShapeMismatchError(
                f"{what} has shape {A.shape}, ambient needs ({self.dim},{self.dim})"
            )
        if not self.conforms(A):
            raise ShapeMismatchError(f"{what} has entries outside the block pattern")
        return A

    def level_blocks(self, A: np.ndarray, n: int) -> list[np.ndarray]:
        """Blocks of M_n(ambient) = sum_i M_{n*d_i} under the gathering permutation.

        A is an (n*dim) x (n*dim) matrix laid out as an n x n grid of ambient
        elements; returns one (n*d_i) x (n*d_i) matrix per ambient block.
        """
        D = self.dim
        A = np.asarray(A, dtype=complex)
        if A.shape != (n * D, n * D):
            raise ShapeMismatchError(f"level-{n} element must be {n * D} x {n * D}")
        out = []
        for o, d in zip(self.offsets, self.blocks):
            B = np.zeros((n * d, n * d), dtype=complex)
            for u in range(n):
                for v in range(n):
                    B[u * d : (u + 1) * d, v * d : (v + 1) * d] = A[
                        u * D + o : u * D + o + d, v * D + o : v * D + o + d
                    ]
            out.append(B)
        return out

    def level_assemble(self, blocks: list[np.ndarray], n: int) -> np.ndarray:
        """Inverse of level_blocks."""
        D = self.dim
        A = np.zeros((n * D, n * D), dtype=complex)
        for (o, d, B) in zip(self.offsets, self.blocks, blocks):
            for u in range(n):
                for v in range(n):
                    A[u * D + o : u * D + o + d, v * D + o : v * D + o + d] = B[
                        u * d : (u + 1) * d, v * d : (v + 1) * d
                    ]
        return A


def adjoint(A: np.ndarray) -> np.ndarray:
    return np.asarray(A).conj().T


def is_hermitian(A: np.ndarray, tol: float = DEFAULT_HERM_TOL) -> bool:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    return np.linalg.norm(A - A.conj().T) <= tol * max(1.0, np.linalg.norm(A))


def _require_hermitian(A: np.ndarray, tol: float) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if not is_hermitian(A, tol):
        raise NonHermitianError(
            f"matrix deviates from hermitian by {np.linalg.norm(A - A.conj().T):.3e}"
        )
    return (A + A.conj().T) / 2.0


def eig_hermitian(A: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL):
    """Eigenvalues (descending) and unitary eigenvector columns of hermitian A."""
    A = _require_hermitian(A, tol.psd_tol)
    w, V = np.linalg.eigh(A)
    order = np.argsort(w)[::-1]
    return w[order], V[:, order]


def spectral_norm(A: np.ndarray) -> float:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def lambda_min(A: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of a hermitian matrix."""
    A = _require_hermitian(A, tol.psd_tol)
    if A.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(A)[0])


def is_psd(A: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """PSD within tolerance: lambda_min(A) >= -psd_tol * max(1, ||A||)."""
    A = _require_hermitian(A, tol.psd_tol)
    if A.size == 0:
        return True
    return lambda_min(A, tol) >= -tol.psd_tol * max(1.0, spectral_norm(A))


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal hermitian basis of M_d: diagonal units, then symmetrized pairs."""
    out = []
    for i in range(d):
        M = np.zeros((d, d), dtype=complex)
        M[i, i] = 1.0
        out.append(M)
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            M = np.zeros((d, d), dtype=complex)
            M[i, j] = M[j, i] = s
            out.append(M)
            M = np.zeros((d, d), dtype=complex)
            M[i, j] = -1j * s
            M[j, i] = 1j * s
            out.append(M)
    return out


def _vec(A: np.ndarray) -> np.ndarray:
    return np.asarray(A, dtype=complex).reshape(-1)


def real_span_basis(mats, rank_tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormal hermitian basis of the real span of hermitian matrices.

    Orthonormal under <A,B> = Re Tr(A* B); empty input gives an empty basis.
    """
    mats = [np.asarray(M, dtype=complex) for M in mats]
    if not mats:
        return []
    shape = mats[0].shape
    for M in mats:
        if M.shape != shape:
            raise ShapeMismatchError("span inputs must share one shape")
        if not is_hermitian(M):
            raise NonHermitianError("real_span_basis expects hermitian inputs")
    # Re Tr(A* B) for hermitian A, B equals the real dot product of
    # (Re-part, Im-part) stackings, so an SVD over those gives the span.
    rows = np.array([np.concatenate([_vec(M).real, _vec(M).imag]) for M in mats])
    scale = max(np.abs(rows).max(), 1e-300)
    _, s, vt = np.linalg.svd(rows / scale, full_matrices=False)
    keep = s > rank_tol * max(1.0, s[0] if len(s) else 0.0)
    half = shape[0] * shape[1]
    out = []
    for row in vt[keep]:
        M = (row[:half] + 1j * row[half:]).reshape(shape)
        out.append((M + M.conj().T) / 2.0)
    return out


def span_coefficients(A: np.ndarray, basis) -> np.ndarray:
    """Real coefficients of A against an orthonormal hermitian basis."""
    return np.array([np.real(np.trace(B.conj().T @ A)) for B in basis])


def project_to_span(A: np.ndarray, basis) -> np.ndarray:
    """Orthogonal projection of hermitian A onto the real span of the basis."""
    A = np.asarray(A, dtype=complex)
    out = np.zeros_like(A)
    for B in basis:
        out = out + np.real(np.trace(B.conj().T @ A)) * B
    return out


def in_span(A: np.ndarray, basis, tol: float = 1e-9) -> bool:
    A = np.asarray(A, dtype=complex)
    res = A - project_to_span(A, basis)
    return np.linalg.norm(res) <= tol * max(1.0, np.linalg.norm(A))


def random_hermitian(rng: np.random.Generator, shape: BlockShape, scale: float = 1.0) -> np.ndarray:
    """Random hermitian block-diagonal matrix with N(0, scale) entries."""
    blocks = []
    for d in shape.blocks:
        G = rng.normal(size=(d, d), scale=scale) + 1j * rng.normal(size=(d, d), scale=scale)
        blocks.append((G + G.conj().T) / 2.0)
    return shape.assemble(blocks)


# ---------------------------------------------------------------------------
# JSON wire format: a matrix is {"re": [[...]], "im": [[...]]}; a
# block-diagonal element is a list of such objects matching a BlockShape.
# ---------------------------------------------------------------------------

def matrix_to_json(A: np.ndarray) -> dict:
    A = np.asarray(A, dtype=complex)
    return {"re": A.real.tolist(), "im": A.imag.tolist()}

def matrix_from_json(obj: dict) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ShapeMismatchError("re and im parts must have equal shapes")
    return re + 1j * im

def blocks_to_json(A: np.ndarray, shape: BlockShape) -> list:
    return [matrix_to_json(B) for B in shape.split(shape.validate(A))]

def blocks_from_json(objs, shape: BlockShape) -> np.ndarray:
    return shape.assemble([matrix_from_json(o) for o in objs])
