"""Kernels and quotient operator systems.

A *-closed subspace J (not containing the unit) is a kernel exactly when
the states of S vanishing on J separate the rest of S from J; the
certification loop here collects one separating state per unresolved
complement direction and stops either with a finite separating family (the
KERNEL certificate) or with a direction annihilated by every J-vanishing
state (the NOT_KERNEL witness).

On the quotient, two cone families compete at every matrix level: the
algebraic image cones (membership: some representative of the coset is
positive) and their Archimedean closures (membership: representatives get
positive after every unit inflation).  The closure membership, and with it
the quotient operator-system norm, is computed through the dual program
over J-annihilating states, which is compact and attained even when the
algebraic problem's optimum is only approached asymptotically; the
algebraic cone keeps an explicit norm cap on representatives, which is
what separates "attained" from "asymptotic" at finite numerical scale.
The quotient operator-space norm is the plain representative-norm minimum,
a single well-posed program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .conic import SDPBuilder, minimize_over_states
from .errors import (
    NonHermitianError,
    NotAKernelError,
    SolverFailure,
    SubspaceNotAnnihilatedError,
    UnitInSubspaceError,
)
from .linalg import DEFAULT_TOL, TolerancePolicy
from .opsys import (
    ConcreteOperatorSystem,
    MatrixLevelElement,
    StateVector,
    SystemElement,
    find_state,
    random_element,
    random_level_element,
)

__all__ = [
    "KernelSubspace",
    "QuotientSystem",
    "ConeMembership",
    "is_kernel",
    "certify_kernel",
    "d_cone_contains",
    "c_cone_contains",
    "osy_norm",
    "osp_norm",
    "j_dec_norm",
    "quotient_embedding_check",
    "proximinality_probe",
]


@dataclass(frozen=True)
class KernelSubspace:
    """A *-closed, unit-excluding subspace with its certification status.

    hermitian_basis spans the hermitian part J_h orthonormally; the complex
    span J = J_h + i J_h.  verdict is KERNEL, NOT_KERNEL, or UNKNOWN;
    the certificate is a separating family of states (KERNEL) or a witness
    element annihilated by every J-vanishing state (NOT_KERNEL).
    """

    parent: ConcreteOperatorSystem
    hermitian_basis: tuple
    verdict: str = "UNKNOWN"
    certificate: dict = field(default_factory=dict)

    @staticmethod
    def from_matrices(parent: ConcreteOperatorSystem, mats, verdict="UNKNOWN",
                      certificate=None) -> "KernelSubspace":
        parts = []
        for m in mats:
            m = np.asarray(m, dtype=complex)
            if not parent.contains(m):
                raise ValueError("kernel basis element outside the system span")
            h = (m + m.conj().T) / 2.0
            ah = (m - m.conj().T) / (2.0j)
            for p in (h, ah):
                if np.linalg.norm(p) > 1e-12:
                    parts.append(p)
        basis = linalg.real_span_basis(parts)
        J = KernelSubspace(
            parent=parent,
            hermitian_basis=tuple(basis),
            verdict=verdict,
            certificate=certificate or {},
        )
        if J.contains(parent.unit):
            raise UnitInSubspaceError("the unit lies in the candidate kernel")
        return J

    @property
    def dim(self) -> int:
        """Complex dimension of J (= real dimension of its hermitian part)."""
        return len(self.hermitian_basis)

    def contains(self, m: np.ndarray, tol: float = 1e-9) -> bool:
        m = np.asarray(m, dtype=complex)
        h = (m + m.conj().T) / 2.0
        ah = (m - m.conj().T) / (2.0j)
        return linalg.in_span(h, self.hermitian_basis, tol) and linalg.in_span(
            ah, self.hermitian_basis, tol
        )

    def project(self, m: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the complex span of J."""
        m = np.asarray(m, dtype=complex)
        h = (m + m.conj().T) / 2.0
        ah = (m - m.conj().T) / (2.0j)
        return linalg.project_to_span(h, self.hermitian_basis) + 1j * linalg.project_to_span(
            ah, self.hermitian_basis
        )

    def to_json(self) -> dict:
        return {
            "system": self.parent.name,
            "basis": [
                linalg.blocks_to_json(B, self.parent.shape)
                for B in self.hermitian_basis
            ],
        }


def _complement_basis(S: ConcreteOperatorSystem, J: KernelSubspace):
    """Orthonormal hermitian basis of the trace-orthogonal complement of J in S."""
    residuals = []
    for B in S.basis:
        r = B - linalg.project_to_span(B, J.hermitian_basis)
        if np.linalg.norm(r) > 1e-12:
            residuals.append(r)
    return linalg.real_span_basis(residuals)


def _sparse_witness(S: ConcreteOperatorSystem, J: KernelSubspace, directions):
    """Prefer a matrix-unit witness inside span_C(directions) + J, off J."""
    D = S.ambient_dim
    pool = list(directions) + [1j * d for d in directions] + [
        B for B in J.hermitian_basis
    ] + [1j * B for B in J.hermitian_basis]
    # real span of the pool equals span_C(directions) + span_C(J)
    pool_basis = linalg.real_span_basis(
        [(p + p.conj().T) / 2 for p in pool]
        + [(p - p.conj().T) / 2j for p in pool]
    )
    for i in range(D):
        for j in range(D):
            if i == j:
                continue
            E = np.zeros((D, D), dtype=complex)
            E[i, j] = 1.0
            h = (E + E.conj().T) / 2.0
            ah = (E - E.conj().T) / (2.0j)
            if (
                linalg.in_span(h, pool_basis)
                and linalg.in_span(ah, pool_basis)
                and not J.contains(E)
                and S.contains(E)
            ):
                return E
    return directions[0]


def is_kernel(
    S: ConcreteOperatorSystem,
    J_mats,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> KernelSubspace:
    """Certify whether span(J_mats) is the kernel of a completely positive map.

    KERNEL comes with a finite family of J-annihilating states whose common
    kernel inside S is exactly J.  NOT_KERNEL comes with a witness x not in
    J on which every J-annihilating state vanishes (certified by the dual
    bound of the state search).
    """

    J0 = (
        J_mats
        if isinstance(J_mats, KernelSubspace)
        else KernelSubspace.from_matrices(S, J_mats)
    )
    comp = _complement_basis(S, J0)
    if not comp:
        # J = S is impossible since the unit is excluded at construction
        raise UnitInSubspaceError("kernel candidate spans the whole system")

    states: list[StateVector] = []
    annihilate = list(J0.hermitian_basis)
    for _ in range(len(comp) + 1):
        # common kernel of collected states inside the hermitian complement
        if states:
            rows = np.array(
                [[np.real(st(c)) for c in comp] for st in states], dtype=float
            )
            scale = max(1.0, np.abs(rows).max())
            _, sv, vt = np.linalg.svd(rows / scale, full_matrices=True)
            rank = int(np.sum(sv > 1e-9 * max(1.0, sv[0] if len(sv) else 0)))
            null = vt[rank:]
        else:
            null = np.eye(len(comp))
        if null.shape[0] == 0:
            return KernelSubspace(
                parent=S,
                hermitian_basis=J0.hermitian_basis,
                verdict="KERNEL",
                certificate={"states": states},
            )
        x_dir = sum(c * B for c, B in zip(null[0], comp))
        x_dir = x_dir / max(np.linalg.norm(x_dir), 1e-300)
        st, value = find_state(S, annihilate=annihilate, separate=x_dir, tol=tol)
        if st is None:
            # every direction left in the common kernel that also fails the
            # state search is certified non-separable; collect them so a
            # sparse canonical witness can be preferred
            unresolved = [x_dir]
            for row in null[1:]:
                cand = sum(c * B for c, B in zip(row, comp))
                cand = cand / max(np.linalg.norm(cand), 1e-300)
                other, _ = find_state(S, annihilate=annihilate, separate=cand, tol=tol)
                if other is None:
                    unresolved.append(cand)
            witness = _sparse_witness(S, J0, unresolved)
            if witness is not unresolved[0]:
                check, _ = find_state(S, annihilate=annihilate, separate=witness, tol=tol)
                if check is not None:
                    witness = unresolved[0]
            return KernelSubspace(
                parent=S,
                hermitian_basis=J0.hermitian_basis,
                verdict="NOT_KERNEL",
                certificate={
                    "witness": witness,
                    "states": states,
                    "unresolved_directions": unresolved,
                },
            )
        states.append(st)
    raise SolverFailure("kernel certification did not converge")


def certify_kernel(S, J_mats, tol: TolerancePolicy = DEFAULT_TOL) -> KernelSubspace:
    """Alias of is_kernel returning the certified KernelSubspace."""
    return is_kernel(S, J_mats, tol)


@dataclass(frozen=True)
class QuotientSystem:
    """S/J with coset representatives in the trace-orthogonal complement of J.

    Formal quotients by non-kernels are allowed (the cone computations are
    still meaningful and exhibit the failure of the Archimedean property),
    but the norm computations refuse them.
    """

    kernel: KernelSubspace
    complement_basis: tuple = field(init=False)

    def __post_init__(self):
        comp = _complement_basis(self.kernel.parent, self.kernel)
        object.__setattr__(self, "complement_basis", tuple(comp))

    @property
    def parent(self) -> ConcreteOperatorSystem:
        return self.kernel.parent

    @property
    def dim(self) -> int:
        return len(self.complement_basis)

    @property
    def genuine(self) -> bool:
        return self.kernel.verdict == "KERNEL"

    def canonical_rep(self, x) -> np.ndarray:
        """Representative of the coset x + J orthogonal to J."""
        m = x.matrix if isinstance(x, SystemElement) else np.asarray(x, dtype=complex)
        return m - self.kernel.project(m)

    def coset_is_zero(self, x, tol: float = 1e-9) -> bool:
        return np.linalg.norm(self.canonical_rep(x)) <= tol

    def unit_coset(self) -> SystemElement:
        return SystemElement(self.parent, self.parent.unit)

    def _require_genuine(self, what: str):
        if not self.genuine:
            raise NotAKernelError(
                f"{what} needs a certified kernel; verdict is {self.kernel.verdict}"
            )


def _as_level(Q: QuotientSystem, X) -> MatrixLevelElement:
    if isinstance(X, MatrixLevelElement):
        return X
    if isinstance(X, SystemElement):
        return MatrixLevelElement(Q.parent, [[X]])
    return MatrixLevelElement(Q.parent, [[X]])


def _level_subspace_tuples(Q: QuotientSystem, n: int):
    """Hermitian basis of M_n(J), as per-block tuples in the gathered layout."""
    shape = Q.parent.shape
    tuples = []
    for h in Q.kernel.hermitian_basis:
        for u in range(n):
            P = np.zeros((n, n), dtype=complex)
            P[u, u] = 1.0
            tuples.append(shape.level_blocks(np.kron(P, h), n))
        for u in range(n):
            for v in range(u + 1, n):
                P = np.zeros((n, n), dtype=complex)
                P[u, v] = P[v, u] = 1.0
                tuples.append(shape.level_blocks(np.kron(P, h), n))
                P = np.zeros((n, n), dtype=complex)
                P[u, v] = 1j
                P[v, u] = -1j
                tuples.append(shape.level_blocks(np.kron(P, h), n))
    return tuples


@dataclass
class ConeMembership:
    """Cone-membership verdict with its certificate.

    For the closure cones, eps_star is the least unit inflation making the
    coset's representatives positive; a separating J-annihilating state
    certifies non-membership.  For the algebraic cones, rep_coeffs give the
    optimizing representative shift inside the rep_bound cap and margin is
    its achieved smallest eigenvalue.
    """

    member: bool
    eps_star: float | None = None
    margin: float | None = None
    separating_state: StateVector | None = None
    rep_coeffs: np.ndarray | None = None
    representative: np.ndarray | None = None
    info: dict = field(default_factory=dict)


def c_cone_contains(
    Q: QuotientSystem,
    X,
    n: int | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> ConeMembership:
    """Membership of a hermitian coset in the Archimedeanized quotient cone.

    eps_star = inf{eps >= 0 : some representative of eps(e x I_n) + X is
    PSD}; by conic duality this equals the negative part of the minimum of
    <X, W> over J-annihilating states W at level n, a compact program that
    is exact even when the infimum over representatives is not attained.
    Membership is decided at eps_star <= bisect_tol.
    """
    X = _as_level(Q, X)
    n = X.level if n is None else n
    A = X.assembled()
    if not linalg.is_hermitian(A):
        raise NonHermitianError("cone membership needs a hermitian coset")
    shape = Q.parent.shape
    dims = [n * d for d in shape.blocks]
    res = minimize_over_states(
        shape.level_blocks(A, n), _level_subspace_tuples(Q, n), dims, tol
    )
    if res.status == "INFEASIBLE":
        # no J-annihilating state at this level: the quotient order collapses
        return ConeMembership(member=True, eps_star=0.0, info={"degenerate": True})
    val_lo, val_hi = res.value_lo, res.value_hi
    eps_star = max(0.0, -res.value)
    member = eps_star <= tol.bisect_tol
    sep = None
    if not member:
        W = shape.level_assemble(res.certificate["W_blocks"], n)
        sep = ("level_state", res.certificate["W_blocks"], W)
    return ConeMembership(
        member=member,
        eps_star=eps_star,
        separating_state=sep,
        info={"value_interval": (val_lo, val_hi), "fr_steps": res.certificate.get("fr_steps")},
    )


def d_cone_contains(
    Q: QuotientSystem,
    X,
    n: int | None = None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> ConeMembership:
    """Membership of a hermitian coset in the algebraic quotient cone.

    Searches an actual PSD representative X + K with K in M_n(J) and
    coefficients capped at rep_bound * max(1, ||X||); the cap is what makes
    "no exact representative, only asymptotic ones" detectable at finite
    scale.  Membership: the best representative's smallest eigenvalue
    clears -psd_tol * max(1, ||X||).
    """
    X = _as_level(Q, X)
    n = X.level if n is None else n
    A = X.assembled()
    if not linalg.is_hermitian(A):
        raise NonHermitianError("cone membership needs a hermitian coset")
    shape = Q.parent.shape
    scale = max(1.0, linalg.spectral_norm(A))
    cap = tol.rep_bound * scale
    tuples = _level_subspace_tuples(Q, n)
    Ablocks = shape.level_blocks(A, n)
    dims = [n * d for d in shape.blocks]

    b = SDPBuilder()
    coeffs = [b.scalar(lo=-cap, hi=cap) for _ in tuples]
    t = b.scalar()
    for i, d in enumerate(dims):
        terms = [(c, tup[i]) for c, tup in zip(coeffs, tuples)]
        terms.append((t, -np.eye(d, dtype=complex)))
        b.lmi(Ablocks[i], terms)
    b.objective({t: 1.0}, "max")
    res = b.solve(tol)
    if res.status != "OPTIMAL":
        raise SolverFailure(f"representative search failed: {res.status}")
    margin = res.value
    x = res.x
    rep_coeffs = np.array([x[c] for c in coeffs])
    K = np.zeros_like(A)
    for c, tup in zip(rep_coeffs, tuples):
        K = K + c * shape.level_assemble(tup, n)
    member = margin >= -tol.psd_tol * scale
    return ConeMembership(
        member=member,
        margin=margin,
        rep_coeffs=rep_coeffs,
        representative=A + K,
        info={"cap": cap},
    )


def osy_norm(
    Q: QuotientSystem,
    X,
    tol: TolerancePolicy = DEFAULT_TOL,
    with_certificate: bool = False,
):
    """Quotient operator-system norm of a coset at its level.

    inf{lam : [[lam e I, X], [X*, lam e I]] in the closure cone at level 2n}
    collapses, through the dual state program, to the exact value
    max{-<dilation(X), W>} over J-annihilating states W at level 2n.
    """
    Q._require_genuine("the operator-system quotient norm")
    X = _as_level(Q, X)
    n = X.level
    A = X.assembled()
    D = Q.parent.ambient_dim
    dil = np.zeros((2 * n * D, 2 * n * D), dtype=complex)
    dil[: n * D, n * D :] = A
    dil[n * D :, : n * D] = A.conj().T
    shape = Q.parent.shape
    dims = [2 * n * d for d in shape.blocks]
    res = minimize_over_states(
        shape.level_blocks(dil, 2 * n), _level_subspace_tuples(Q, 2 * n), dims, tol
    )
    if res.status == "INFEASIBLE":
        raise SolverFailure("no annihilating states; quotient is degenerate")
    value = max(0.0, -res.value)
    if with_certificate:
        return value, res
    return value


def osp_norm(
    Q: QuotientSystem,
    X,
    tol: TolerancePolicy = DEFAULT_TOL,
    with_certificate: bool = False,
):
    """Quotient operator-space norm: min ||X + K|| over K in M_n(J).

    One dilation program; the optimizing J-coefficients are reported so the
    minimizing representative can be reproduced exactly.
    """
    Q._require_genuine("the operator-space quotient norm")
    X = _as_level(Q, X)
    n = X.level
    A = X.assembled()
    shape = Q.parent.shape
    dims = [n * d for d in shape.blocks]
    Ablocks = shape.level_blocks(A, n)

    # K ranges over all of M_n(J): entry (u,v) takes arbitrary complex
    # J-coefficients; hermiticity of the dilation pairs (u,v) with (v,u).
    patterns = []
    for h in Q.kernel.hermitian_basis:
        for u in range(n):
            for v in range(n):
                for z in (1.0, 1j):
                    P = np.zeros((n, n), dtype=complex)
                    P[u, v] = z
                    patterns.append(np.kron(P, h))

    b = SDPBuilder()
    t = b.scalar()
    coeffs = [b.scalar() for _ in patterns]
    # dilation blocks at level 2n in the gathered layout
    dil_const = np.zeros((2 * n * shape.dim, 2 * n * shape.dim), dtype=complex)
    D = shape.dim
    dil_const[: n * D, n * D :] = A
    dil_const[n * D :, : n * D] = A.conj().T
    const_blocks = shape.level_blocks(dil_const, 2 * n)
    term_blocks = []
    for P in patterns:
        dil = np.zeros_like(dil_const)
        dil[: n * D, n * D :] = P
        dil[n * D :, : n * D] = P.conj().T
        term_blocks.append(shape.level_blocks(dil, 2 * n))
    for i, d in enumerate([2 * n * d for d in shape.blocks]):
        terms = [(c, tb[i]) for c, tb in zip(coeffs, term_blocks)]
        terms.append((t, np.eye(d, dtype=complex)))
        b.lmi(const_blocks[i], terms)
    b.objective({t: 1.0}, "min")
    res = b.solve(tol)
    if res.status != "OPTIMAL":
        raise SolverFailure(f"representative-norm program failed: {res.status}")
    value = res.value
    if with_certificate:
        K = np.zeros_like(A)
        for c, P in zip(coeffs, patterns):
            K = K + res.x[c] * P
        return value, {"K": K, "coeffs": np.array([res.x[c] for c in coeffs]),
                       "result": res}
    return value


def j_dec_norm(
    phi,
    J: KernelSubspace,
    tol: TolerancePolicy = DEFAULT_TOL,
):
    """Least max(||psi_1||, ||psi_2||) over cp corner maps vanishing on J
    that make the 2x2 block map around phi completely positive.

    phi is a CPMap-shaped map (not necessarily cp) that must already vanish
    on J.  The block map is certified through one PSD Choi family on
    ambient (x) M_2k, with the corners of its induced map pinned to phi and
    the diagonal corners constrained to vanish on J; the value reported is
    a lower bound for the representation-independent constant, since the
    target dimension is fixed.  Returns (value, details) or the string
    "INFEASIBLE" status in details when no decomposition exists at this
    target size.
    """
    S = phi.source
    if J.parent is not S:
        raise ValueError("kernel and map must share the source system")
    k = phi.k
    scale = max(1.0, max(linalg.spectral_norm(M) for M in phi.action))
    for h in J.hermitian_basis:
        if linalg.spectral_norm(phi(h)) > tol.feas_margin * scale:
            raise SubspaceNotAnnihilatedError("phi does not vanish on J")

    shape = S.shape
    twok = 2 * k
    target_basis = linalg.hermitian_basis(twok)
    corner12 = [
        T for T in target_basis
        if np.linalg.norm(T[:k, :k]) < 1e-14 and np.linalg.norm(T[k:, k:]) < 1e-14
    ]
    corner_diag = [
        T for T in target_basis
        if np.linalg.norm(T[:k, k:]) < 1e-14 and np.linalg.norm(T[k:, :k]) < 1e-14
    ]

    b = SDPBuilder()
    dims = [d * twok for d in shape.blocks]
    hvars = [b.hermitian(d) for d in dims]
    t = b.scalar()
    for v, d in zip(hvars, dims):
        b.psd(v)

    def agreement(h, T, value):
        hblocks = shape.split(h)
        coeffs: dict[int, float] = {}
        for v, hb in zip(hvars, hblocks):
            for j, c in v.pairing(np.kron(hb.T, T)).items():
                if c != 0.0:
                    coeffs[j] = coeffs.get(j, 0.0) + c
        b.eq(coeffs, value)

    # off-diagonal corner of the block map equals phi on the whole basis
    for h, img in zip(S.basis, phi.action):
        big = np.zeros((twok, twok), dtype=complex)
        big[:k, k:] = img
        big[k:, :k] = img.conj().T
        for T in corner12:
            agreement(h, T, float(np.real(np.trace(T.conj().T @ big))))
    # diagonal corners vanish on J
    for h in J.hermitian_basis:
        for T in corner_diag:
            agreement(h, T, 0.0)
    # ||psi_i|| = ||psi_i(e)||: tie both diagonal corners of the image of the
    # unit under t I
    eblocks = shape.split(S.unit)
    for corner in (0, 1):
        terms = [(t, np.eye(k, dtype=complex))]
        sel = np.zeros((twok, k), dtype=complex)
        sel[corner * k : (corner + 1) * k, :] = np.eye(k)
        for v, eb, d in zip(hvars, eblocks, shape.blocks):
            # psi_corner(e) as a linear image of the Choi variable
            for j, B in zip(v.indices, v.basis):
                M = np.zeros((k, k), dtype=complex)
                for p, q, E in _unit_mats(d):
                    M = M + eb[p, q] * (
                        sel.conj().T
                        @ B[p * twok : (p + 1) * twok, q * twok : (q + 1) * twok]
                        @ sel
                    )
                M = (M + M.conj().T) / 2.0
                if np.linalg.norm(M) > 1e-14:
                    terms.append((j, -M))
        b.lmi(np.zeros((k, k), dtype=complex), terms)
    b.objective({t: 1.0}, "min")
    res = b.solve(tol)
    if res.status == "INFEASIBLE":
        return None, {"status": "INFEASIBLE", "result": res}
    if res.status != "OPTIMAL":
        raise SolverFailure(f"J-decomposition program failed: {res.status}")
    return res.value, {
        "status": "OPTIMAL",
        "interval": (res.value_lo, res.value_hi),
        "result": res,
        "lower_bound_only": True,
    }


def _unit_mats(d):
    for p in range(d):
        for q in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[p, q] = 1.0
            yield p, q, E


@dataclass
class EmbeddingReport:
    verdict: str  # ORDER_EMBEDDING or NOT_EMBEDDING
    witness: np.ndarray | None = None
    witness_eps_star: float | None = None
    levels_checked: tuple = ()
    samples_checked: int = 0
    kernel: KernelSubspace | None = None


def quotient_embedding_check(
    S: ConcreteOperatorSystem,
    ideal_blocks,
    candidates=(),
    levels=(1, 2, 3),
    num_samples: int = 24,
    rng=None,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> EmbeddingReport:
    """Does S / (S cap I) order-embed into the C*-quotient A / I?

    I is the sub-sum of the named ambient blocks.  The C*-quotient order is
    exact: a coset is positive exactly when the surviving blocks are PSD.
    The forward direction always holds; the probe searches the backward
    one: elements whose surviving blocks are PSD but whose coset misses the
    quotient closure cone (certified by a separating annihilating state).
    Sampled candidates are shifted to the image-positivity boundary, where
    violations concentrate.
    """
    rng = np.random.default_rng(rng)
    shape = S.shape
    ideal_blocks = sorted(set(int(i) for i in ideal_blocks))
    keep_blocks = [i for i in range(shape.num_blocks) if i not in ideal_blocks]
    if not keep_blocks:
        raise ValueError("the ideal must be a proper sub-sum of blocks")

    def surviving(m):
        return [shape.split(m)[i] for i in keep_blocks]

    def image_psd(m) -> bool:
        mats = surviving(m)
        lam = min(float(np.linalg.eigvalsh(B)[0]) for B in mats)
        sc = max(1.0, max(linalg.spectral_norm(B) for B in mats))
        return lam >= -tol.psd_tol * sc

    # J = S cap I: coefficient vectors whose surviving blocks vanish
    rows = np.array(
        [np.concatenate([b.flatten() for b in surviving(B)]) for B in S.basis]
    )
    stacked = np.hstack([rows.real, rows.imag])  # (dim S, 2*flat)
    _, sv, vt = np.linalg.svd(stacked.T, full_matrices=True)
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0] if len(sv) else 0)))
    null = vt[rank:]
    J_mats = [sum(c * B for c, B in zip(row, S.basis)) for row in null]
    J_mats = [m for m in J_mats if np.linalg.norm(m) > 1e-9]
    J = is_kernel(S, J_mats, tol)
    Q = QuotientSystem(J)

    cands = [np.asarray(c, dtype=complex) for c in candidates]
    for _ in range(num_samples):
        x = random_element(S, rng, hermitian=True).matrix
        mats = surviving(x)
        lam = min(float(np.linalg.eigvalsh(B)[0]) for B in mats)
        cands.append(x - lam * S.unit)  # image-positivity boundary

    checked = 0

    def violation(X, n):
        mem = c_cone_contains(Q, X, n, tol)
        return None if mem.member else mem

    for x in cands:
        if not image_psd(x):
            continue
        for n in levels:
            checked += 1
            if n == 1:
                X = MatrixLevelElement(S, [[x]])
            else:
                # diagonal inflation x (x) I_n stays image-positive
                entries = [
                    [x if u == v else np.zeros_like(x) for v in range(n)]
                    for u in range(n)
                ]
                X = MatrixLevelElement(S, entries)
            mem = violation(X, n)
            if mem is not None:
                return EmbeddingReport(
                    verdict="NOT_EMBEDDING",
                    witness=x,
                    witness_eps_star=mem.eps_star,
                    levels_checked=tuple(levels),
                    samples_checked=checked,
                    kernel=J,
                )
    return EmbeddingReport(
        verdict="ORDER_EMBEDDING",
        levels_checked=tuple(levels),
        samples_checked=checked,
        kernel=J,
    )


@dataclass
class ProximinalityReport:
    samples: int = 0
    order_gap_events: list = field(default_factory=list)
    max_order_gap: float = 0.0
    max_norm_gap: float = 0.0


def proximinality_probe(
    Q: QuotientSystem,
    num_samples: int = 12,
    levels=(1,),
    rng=None,
    tol: TolerancePolicy = DEFAULT_TOL,
    elements=None,
) -> ProximinalityReport:
    """Compare the algebraic and closure cones and the two norm programs.

    For each sampled hermitian coset: an order-proximinality gap event is a
    coset inside the closure cone with no capped PSD representative; the
    norm-proximinality gap is the difference between the representative
    norm achieved by the optimizing coefficients and the certified
    operator-space quotient norm (zero when the minimum is attained).
    """
    rng = np.random.default_rng(rng)
    rep = ProximinalityReport()
    S = Q.parent
    for n in levels:
        pool = elements if elements is not None else [
            None for _ in range(num_samples)
        ]
        for item in pool:
            if item is None:
                X = random_level_element(S, n, rng)
            else:
                X = _as_level(Q, item)
                if X.level != n:
                    continue
            rep.samples += 1
            cmem = c_cone_contains(Q, X, n, tol)
            dmem = d_cone_contains(Q, X, n, tol)
            if cmem.member and not dmem.member:
                gap = max(0.0, -(dmem.margin or 0.0))
                rep.order_gap_events.append(
                    {"level": n, "eps_star": cmem.eps_star, "margin": dmem.margin}
                )
                rep.max_order_gap = max(rep.max_order_gap, gap)
            if Q.genuine:
                value, cert = osp_norm(Q, X, tol, with_certificate=True)
                achieved = linalg.spectral_norm(X.assembled() + cert["K"])
                rep.max_norm_gap = max(rep.max_norm_gap, abs(achieved - value))
    return rep
