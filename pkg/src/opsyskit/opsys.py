"""Concrete finite-dimensional operator systems.

A system S is a unital *-closed subspace of a direct sum of matrix
algebras, stored as an orthonormal hermitian basis of its hermitian part.
Positivity at every matrix level is inherited from the ambient algebra,
states are represented by ambient density-style matrices (every positive
functional on S extends to the ambient at finite dimension, so that
parametrization is exact), and the norm comes from the standard 2x2
positivity trick, which here coincides with the ambient spectral norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .conic import bisect_scalar, minimize_over_states
from .errors import NonHermitianError, ShapeMismatchError, SolverFailure
from .linalg import DEFAULT_TOL, BlockShape, TolerancePolicy

__all__ = [
    "ConcreteOperatorSystem",
    "SystemElement",
    "MatrixLevelElement",
    "StateVector",
    "build_system",
    "level_positive",
    "system_norm",
    "order_seminorm_hermitian",
    "find_state",
    "random_element",
    "random_level_element",
]


@dataclass(frozen=True)
class ConcreteOperatorSystem:
    """Span of an orthonormal hermitian basis inside a block-diagonal ambient.

    The unit (ambient identity) always lies in the span; the complex span
    of the basis is *-closed by construction.
    """

    shape: BlockShape
    basis: tuple
    name: str = "S"

    @property
    def dim(self) -> int:
        """Real dimension of the hermitian part = complex dimension of S."""
        return len(self.basis)

    @property
    def ambient_dim(self) -> int:
        return self.shape.dim

    @property
    def unit(self) -> np.ndarray:
        return self.shape.identity()

    def is_full_algebra(self, block_indices=None) -> bool:
        """True when the span is the whole ambient algebra (or the named blocks)."""
        blocks = self.shape.blocks if block_indices is None else [
            self.shape.blocks[i] for i in block_indices
        ]
        return self.dim == sum(d * d for d in blocks)

    def element(self, matrix: np.ndarray) -> "SystemElement":
        return SystemElement(self, matrix)

    def contains(self, matrix: np.ndarray, tol: float = 1e-9) -> bool:
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (self.ambient_dim, self.ambient_dim):
            return False
        h = (matrix + matrix.conj().T) / 2.0
        ah = (matrix - matrix.conj().T) / (2.0j)
        return linalg.in_span(h, self.basis, tol) and linalg.in_span(ah, self.basis, tol)

    def project(self, matrix: np.ndarray) -> np.ndarray:
        """Orthogonal projection of an ambient matrix onto span_C(basis)."""
        matrix = np.asarray(matrix, dtype=complex)
        h = (matrix + matrix.conj().T) / 2.0
        ah = (matrix - matrix.conj().T) / (2.0j)
        return linalg.project_to_span(h, self.basis) + 1j * linalg.project_to_span(
            ah, self.basis
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "shape": list(self.shape.blocks),
            "generators": [linalg.blocks_to_json(B, self.shape) for B in self.basis],
        }

    @staticmethod
    def from_json(obj: dict) -> "ConcreteOperatorSystem":
        shape = BlockShape(obj["shape"])
        gens = [linalg.blocks_from_json(g, shape) for g in obj.get("generators", [])]
        # an already-orthonormal hermitian family containing the unit in its
        # span is kept verbatim, so serialization round-trips basis-exactly
        # (maps given on the basis stay aligned)
        if gens and all(linalg.is_hermitian(g) for g in gens):
            G = np.array(
                [
                    [np.real(np.trace(a.conj().T @ b)) for b in gens]
                    for a in gens
                ]
            )
            unit_ok = linalg.in_span(shape.identity(), gens)
            if unit_ok and np.allclose(G, np.eye(len(gens)), atol=1e-9):
                return ConcreteOperatorSystem(
                    shape=shape, basis=tuple(gens), name=obj.get("name", "S")
                )
        return build_system(shape, gens, obj.get("name", "S"))


def build_system(shape: BlockShape, generators, name: str = "S") -> ConcreteOperatorSystem:
    """Operator system spanned by hermitian generators with the unit adjoined.

    The unit is always adjoined rather than validated, so the result is a
    well-formed system even from an empty generator list.
    """
    mats = []
    for G in generators:
        G = shape.validate(np.asarray(G, dtype=complex), "generator")
        if not linalg.is_hermitian(G):
            raise NonHermitianError("generators must be hermitian")
        mats.append(G)
    basis = linalg.real_span_basis([shape.identity()] + mats)
    return ConcreteOperatorSystem(shape=shape, basis=tuple(basis), name=name)


@dataclass(frozen=True)
class SystemElement:
    """An element of a system, stored as its ambient block-diagonal matrix."""

    parent: ConcreteOperatorSystem
    matrix: np.ndarray

    def __post_init__(self):
        m = self.parent.shape.validate(np.asarray(self.matrix, dtype=complex), "element")
        if not self.parent.contains(m):
            raise ShapeMismatchError("matrix does not lie in the span of the system")
        object.__setattr__(self, "matrix", m)

    @property
    def is_hermitian(self) -> bool:
        return linalg.is_hermitian(self.matrix)

    def adjoint(self) -> "SystemElement":
        return SystemElement(self.parent, self.matrix.conj().T)

    def to_json(self) -> dict:
        return {
            "system": self.parent.name,
            "matrix": linalg.blocks_to_json(self.matrix, self.parent.shape),
        }


class MatrixLevelElement:
    """An n x n array of elements of one system: an element of M_n(S)."""

    def __init__(self, parent: ConcreteOperatorSystem, entries):
        entries = [
            [np.asarray(e.matrix if isinstance(e, SystemElement) else e, dtype=complex)
             for e in row]
            for row in entries
        ]
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise ShapeMismatchError("matrix-level element must be square")
        for row in entries:
            for e in row:
                if not parent.contains(e):
                    raise ShapeMismatchError("entry outside the system span")
        self.parent = parent
        self.level = n
        self.entries = tuple(tuple(row) for row in entries)

    @classmethod
    def from_assembled(cls, parent: ConcreteOperatorSystem, A: np.ndarray, n: int):
        D = parent.ambient_dim
        A = np.asarray(A, dtype=complex)
        if A.shape != (n * D, n * D):
            raise ShapeMismatchError("assembled matrix has the wrong shape")
        entries = [
            [A[u * D : (u + 1) * D, v * D : (v + 1) * D] for v in range(n)]
            for u in range(n)
        ]
        return cls(parent, entries)

    def assembled(self) -> np.ndarray:
        D = self.parent.ambient_dim
        n = self.level
        A = np.zeros((n * D, n * D), dtype=complex)
        for u in range(n):
            for v in range(n):
                A[u * D : (u + 1) * D, v * D : (v + 1) * D] = self.entries[u][v]
        return A

    @property
    def is_hermitian(self) -> bool:
        return linalg.is_hermitian(self.assembled())

    def scaled(self, c: float) -> "MatrixLevelElement":
        return MatrixLevelElement(
            self.parent, [[c * e for e in row] for row in self.entries]
        )


@dataclass(frozen=True)
class StateVector:
    """A state of S represented by an ambient block-diagonal density matrix.

    Functionals are identified modulo the orthocomplement of S, so equality
    of states is equality of projected representatives.
    """

    parent: ConcreteOperatorSystem
    rho: np.ndarray

    def __post_init__(self):
        r = self.parent.shape.validate(np.asarray(self.rho, dtype=complex), "state")
        if not linalg.is_hermitian(r):
            raise NonHermitianError("state representative must be hermitian")
        if abs(np.trace(r).real - 1.0) > 1e-7:
            raise ValueError("state representative must have unit trace")
        r = (r + r.conj().T) / 2.0
        if not linalg.is_psd(r, DEFAULT_TOL):
            raise ValueError("state representative must be positive semidefinite")
        object.__setattr__(self, "rho", r)

    def __call__(self, x) -> complex:
        m = x.matrix if isinstance(x, SystemElement) else np.asarray(x, dtype=complex)
        return complex(np.trace(self.rho @ m))

    def canonical(self) -> np.ndarray:
        """Representative projected onto the system span (mod S-perp)."""
        return self.parent.project(self.rho)


def _as_level(parent, X) -> MatrixLevelElement:
    if isinstance(X, MatrixLevelElement):
        return X
    if isinstance(X, SystemElement):
        return MatrixLevelElement(parent, [[X]])
    return MatrixLevelElement(parent, [[X]])


def level_positive(X: MatrixLevelElement, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """PSD test of the assembled nD x nD matrix (M_n(S) order from M_n(ambient))."""
    A = X.assembled()
    if not linalg.is_hermitian(A, tol.psd_tol):
        raise NonHermitianError("level element is not hermitian")
    return linalg.is_psd(A, tol)


def system_norm(x) -> float:
    """Norm induced by the operator system structure.

    inf{lam : [[lam e, x], [x*, lam e]] >= 0} equals the ambient spectral
    norm, so it is computed from the hermitian dilation's top eigenvalue.
    """
    m = x.assembled() if isinstance(x, MatrixLevelElement) else np.asarray(
        x.matrix if isinstance(x, SystemElement) else x, dtype=complex
    )
    d = m.shape[0]
    dil = np.zeros((2 * d, 2 * d), dtype=complex)
    dil[:d, d:] = m
    dil[d:, :d] = m.conj().T
    return float(np.linalg.eigvalsh(dil)[-1])


def order_seminorm_hermitian(
    x: SystemElement,
    cone_contains=None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> float:
    """inf{lam >= 0 : lam e + x and lam e - x both in the cone}, by bisection.

    cone_contains takes an ambient hermitian matrix and decides membership
    of its class in a level-1 cone; the default is the ambient PSD cone,
    for which the seminorm equals the system norm on hermitians.
    """
    if not x.is_hermitian:
        raise NonHermitianError("order seminorm needs a hermitian element")
    if cone_contains is None:
        cone_contains = lambda m: linalg.is_psd(m, tol)
    e = x.parent.unit

    def pred(lam: float) -> bool:
        return cone_contains(lam * e + x.matrix) and cone_contains(lam * e - x.matrix)

    hi = system_norm(x) + 1.0
    if pred(0.0):
        return 0.0
    if not pred(hi):
        raise SolverFailure("order unit bound failed; cone oracle inconsistent")
    return bisect_scalar(pred, 0.0, hi, tol.bisect_tol)


def random_element(
    S: ConcreteOperatorSystem, rng, hermitian: bool = True, scale: float = 1.0
) -> SystemElement:
    """Random element of S from normal coefficients over its basis."""
    c = rng.normal(size=S.dim, scale=scale)
    m = sum(ci * B for ci, B in zip(c, S.basis))
    if not hermitian:
        c2 = rng.normal(size=S.dim, scale=scale)
        m = m + 1j * sum(ci * B for ci, B in zip(c2, S.basis))
    return SystemElement(S, m)


def random_level_element(
    S: ConcreteOperatorSystem, n: int, rng, scale: float = 1.0
) -> MatrixLevelElement:
    """Random hermitian element of M_n(S): hermitian diagonal, free offdiagonal."""
    entries = [[None] * n for _ in range(n)]
    for u in range(n):
        entries[u][u] = random_element(S, rng, hermitian=True, scale=scale).matrix
        for v in range(u + 1, n):
            m = random_element(S, rng, hermitian=False, scale=scale).matrix
            entries[u][v] = m
            entries[v][u] = m.conj().T
    return MatrixLevelElement(S, entries)


def find_state(
    parent: ConcreteOperatorSystem,
    annihilate=(),
    separate=None,
    tol: TolerancePolicy = DEFAULT_TOL,
):
    """State of the parent annihilating given elements, separating a target.

    Maximizes |f(x)| for the separate target over states f with f(k) = 0
    for all k in annihilate; returns (StateVector, value) or (None, 0.0)
    when every such state has |f(x)| below feas_margin.  With no separate
    target, returns any annihilating state.

    A non-hermitian target is split into hermitian and antihermitian parts;
    since annihilating states are real on hermitians, |f(x)| > 0 if and
    only if one of the parts is separated.
    """
    shape = parent.shape
    dims = list(shape.blocks)
    cons = []
    for k in annihilate:
        m = k.matrix if isinstance(k, SystemElement) else np.asarray(k, dtype=complex)
        h = (m + m.conj().T) / 2.0
        ah = (m - m.conj().T) / (2.0j)
        for part in (h, ah):
            if np.linalg.norm(part) > 1e-12:
                cons.append(shape.split(part))

    def best_hermitian(target: np.ndarray):
        out = None
        for sign in (1.0, -1.0):
            res = minimize_over_states(
                shape.split(sign * target), cons, dims, tol
            )
            if res.status == "INFEASIBLE":
                return "infeasible"
            if res.status not in ("OPTIMAL", "FEASIBLE"):
                raise SolverFailure(f"state search failed: {res.status}")
            val = -res.value  # maximized sign * f(target)
            if out is None or val > out[0]:
                out = (val, res.certificate["W_blocks"])
        return out

    if separate is None:
        res = minimize_over_states(
            [np.zeros((d, d), dtype=complex) for d in dims], cons, dims, tol
        )
        if res.status == "INFEASIBLE":
            return None, 0.0
        rho = shape.assemble(res.certificate["W_blocks"])
        return StateVector(parent, rho), 1.0

    m = separate.matrix if isinstance(separate, SystemElement) else np.asarray(
        separate, dtype=complex
    )
    h = (m + m.conj().T) / 2.0
    ah = (m - m.conj().T) / (2.0j)
    best = None
    for part in (h, ah):
        if np.linalg.norm(part) <= 1e-12:
            continue
        got = best_hermitian(part)
        if got == "infeasible":
            return None, 0.0
        if best is None or got[0] > best[0]:
            best = got
    if best is None or best[0] < tol.feas_margin:
        return None, 0.0
    rho = shape.assemble(best[1])
    state = StateVector(parent, rho)
    return state, abs(state(m))
