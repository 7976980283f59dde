"""Complete positivity certificates and dual systems.

A linear map from a concrete system S into M_k is completely positive
exactly when it admits a completely positive extension to the ambient
algebra, and cp maps on a full matrix algebra are detected by one PSD
(Choi) matrix.  Deciding cp-ness therefore reduces to a single feasibility
problem: find a PSD Choi block family whose induced map agrees with the
given one on the span of S.  Infeasibility certificates translate back
into concrete violations: a positive matrix over S at level k whose image
under the amplified map has a strictly negative expectation.

The dual space S* carries the matrix ordering in which a matrix of
functionals is positive exactly when the associated map into M_n is
completely positive; a faithful state serves as its Archimedean unit at
finite dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .conic import SDPBuilder
from .errors import NotStarPreservingError, SolverFailure
from .linalg import DEFAULT_TOL, TolerancePolicy
from .opsys import (
    ConcreteOperatorSystem,
    MatrixLevelElement,
    level_positive,
    random_level_element,
)

__all__ = [
    "CPMap",
    "CPVerdict",
    "DualSystem",
    "cp_check",
    "dual_cone_contains",
    "bidual_compare",
    "lance_functional_to_map",
    "choi_blocks_direct",
]


@dataclass(frozen=True)
class CPMap:
    """Linear map S -> M_k recorded by its images on the hermitian basis."""

    source: ConcreteOperatorSystem
    k: int
    action: tuple  # images of source.basis, each k x k

    def __post_init__(self):
        imgs = []
        for M in self.action:
            M = np.asarray(M, dtype=complex)
            if M.shape != (self.k, self.k):
                raise ValueError(f"image must be {self.k} x {self.k}")
            imgs.append(M)
        if len(imgs) != self.source.dim:
            raise ValueError("need one image per basis element")
        object.__setattr__(self, "action", tuple(imgs))

    def require_star_preserving(self, tol: float = 1e-9):
        for M in self.action:
            if not linalg.is_hermitian(M, tol):
                raise NotStarPreservingError(
                    "image of a hermitian basis element is not hermitian"
                )

    def __call__(self, x) -> np.ndarray:
        m = x.matrix if hasattr(x, "matrix") else np.asarray(x, dtype=complex)
        h = (m + m.conj().T) / 2.0
        ah = (m - m.conj().T) / (2.0j)
        ch = linalg.span_coefficients(h, self.source.basis)
        cah = linalg.span_coefficients(ah, self.source.basis)
        out = np.zeros((self.k, self.k), dtype=complex)
        for c, ci, M in zip(ch, cah, self.action):
            out = out + (c + 1j * ci) * M
        return out

    def apply_level(self, X: MatrixLevelElement) -> np.ndarray:
        n = X.level
        out = np.zeros((n * self.k, n * self.k), dtype=complex)
        for u in range(n):
            for v in range(n):
                out[u * self.k:(u + 1) * self.k, v * self.k:(v + 1) * self.k] = (
                    self(X.entries[u][v])
                )
        return out

    def to_json(self) -> dict:
        return {
            "source": self.source.name,
            "k": self.k,
            "action": [linalg.matrix_to_json(M) for M in self.action],
        }

    @staticmethod
    def from_json(obj: dict, source: ConcreteOperatorSystem) -> "CPMap":
        return CPMap(
            source=source,
            k=int(obj["k"]),
            action=tuple(linalg.matrix_from_json(M) for M in obj["action"]),
        )


# ---------------------------------------------------------------------------
# Choi machinery.  Convention: for a map on the ambient block algebra, the
# Choi block of ambient block i is C_i[(p, a), (q, b)] = map(E_pq^(i))_{ab},
# so that map(s)_{ab} = sum_{pq} s_pq C_i[(p,a),(q,b)] and the agreement
# constraint <map(h), T> = <phi(h), T> reads <h^T tensor T, C> with the
# real trace pairing.
# ---------------------------------------------------------------------------


def _unit_matrices(d):
    for p in range(d):
        for q in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[p, q] = 1.0
            yield p, q, E


def choi_blocks_direct(phi: CPMap) -> list[np.ndarray]:
    """Choi blocks of a map defined on a full block algebra (exact, no solve)."""
    S = phi.source
    if not S.is_full_algebra():
        raise ValueError("direct Choi blocks need a full block algebra source")
    k = phi.k
    out = []
    for o, d in zip(S.shape.offsets, S.shape.blocks):
        C = np.zeros((d * k, d * k), dtype=complex)
        for p, q, E in _unit_matrices(d):
            big = np.zeros((S.ambient_dim, S.ambient_dim), dtype=complex)
            big[o + p, o + q] = 1.0
            img = phi(big)
            C[p * k:(p + 1) * k, q * k:(q + 1) * k] = img
        out.append(C)
    return out


def _choi_constraint_tuples(S: ConcreteOperatorSystem, k: int):
    """Agreement constraints: tuples A(h_m, T_q) = (h_m^T restricted to block i) x T_q."""
    target_basis = linalg.hermitian_basis(k)
    tuples, meta = [], []
    for m, h in enumerate(S.basis):
        hblocks = S.shape.split(h)
        for q, T in enumerate(target_basis):
            tup = [np.kron(hb.T, T) for hb in hblocks]
            tuples.append(tup)
            meta.append((m, q))
    return tuples, meta, target_basis


def _entangled_level_element(S: ConcreteOperatorSystem, block: int) -> MatrixLevelElement:
    """The canonical positive element of M_d(S) built from one block's matrix units."""
    o = S.shape.offsets[block]
    d = S.shape.blocks[block]
    entries = []
    for p in range(d):
        row = []
        for q in range(d):
            big = np.zeros((S.ambient_dim, S.ambient_dim), dtype=complex)
            big[o + p, o + q] = 1.0
            row.append(big)
        entries.append(row)
    return MatrixLevelElement(S, entries)


@dataclass
class CPVerdict:
    """Outcome of a cp check: a PSD extension certificate, or a violation.

    For is_cp, choi_blocks induce a map agreeing with the input on its
    basis.  Otherwise witness = (X, v, value) with X a positive element of
    M_n(S), v a unit vector, and value = <v, phi^(n)(X) v> < 0; farkas
    carries the raw separating data from the extension problem.
    """

    is_cp: bool
    choi_blocks: list | None = None
    witness: tuple | None = None
    farkas: dict | None = None
    info: dict = field(default_factory=dict)


def _witness_from_farkas(phi: CPMap, W_list, tol: TolerancePolicy):
    """Turn multipliers W_m (one per basis element) into a clean violation.

    The separating data satisfies sum_m h_m^T (x) W_m >= 0 while
    sum_m <W_m, phi(h_m)> < 0; swapping tensor factors and transposing
    turns the first matrix into X := sum_m W_m^T (x) h_m, a positive
    element of M_k(S), on which the maximally entangled vector exhibits
    the violation of the amplified map.
    """
    S, k = phi.source, phi.k
    n = k
    entries = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            m = np.zeros((S.ambient_dim, S.ambient_dim), dtype=complex)
            for Wm, h in zip(W_list, S.basis):
                m = m + Wm.T[a, b] * h
            entries[a][b] = m
    X = MatrixLevelElement(S, entries)
    A = X.assembled()
    lam = float(np.linalg.eigvalsh((A + A.conj().T) / 2.0)[0])
    if lam < 0:
        # numerical slack from the solver certificate; shift inside the cone
        shift = -lam * 1.0000001
        eD = S.unit
        for a in range(n):
            entries[a][a] = entries[a][a] + shift * eD
        X = MatrixLevelElement(S, entries)
    img = phi.apply_level(X)
    w, V = np.linalg.eigh((img + img.conj().T) / 2.0)
    v = V[:, 0]
    value = float(w[0])
    scale = max(1.0, linalg.spectral_norm(X.assembled()))
    return X, v, value, scale


def cp_check(phi: CPMap, tol: TolerancePolicy = DEFAULT_TOL) -> CPVerdict:
    """Decide complete positivity of a map S -> M_k.

    On a full block algebra the Choi blocks are computed directly and
    tested for positivity.  Otherwise the extension feasibility problem
    runs: maximize t with Choi blocks C - tI PSD subject to agreement on
    the basis of S; cp exactly when the optimum is nonnegative.  The
    negative case returns both the separating (Farkas) data and a polished
    level-k violation witness.
    """
    phi.require_star_preserving()
    S, k = phi.source, phi.k

    if S.is_full_algebra():
        blocks = choi_blocks_direct(phi)
        lam = min(
            (float(np.linalg.eigvalsh(C)[0]) if C.size else 0.0) for C in blocks
        )
        scale = max(1.0, max(linalg.spectral_norm(C) for C in blocks))
        if lam >= -tol.psd_tol * scale:
            return CPVerdict(is_cp=True, choi_blocks=blocks, info={"path": "direct"})
        worst = int(
            np.argmin([float(np.linalg.eigvalsh(C)[0]) if C.size else 0.0 for C in blocks])
        )
        X = _entangled_level_element(S, worst)
        img = phi.apply_level(X)
        w, V = np.linalg.eigh((img + img.conj().T) / 2.0)
        return CPVerdict(
            is_cp=False,
            witness=(X, V[:, 0], float(w[0])),
            farkas={"choi_block": worst, "lambda_min": lam},
            info={"path": "direct"},
        )

    tuples, meta, target_basis = _choi_constraint_tuples(S, k)
    rhs = [
        float(np.real(np.trace(target_basis[q].conj().T @ phi.action[m])))
        for (m, q) in meta
    ]
    dims = [d * k for d in S.shape.blocks]

    b = SDPBuilder()
    hvars = [b.hermitian(d) for d in dims]
    t = b.scalar()
    for i, (v, d) in enumerate(zip(hvars, dims)):
        b.lmi(
            np.zeros((d, d), dtype=complex),
            v.lmi_terms() + [(t, -np.eye(d, dtype=complex))],
        )
    for tup, r in zip(tuples, rhs):
        coeffs: dict[int, float] = {}
        for v, A in zip(hvars, tup):
            for j, c in v.pairing(A).items():
                if c != 0.0:
                    coeffs[j] = coeffs.get(j, 0.0) + c
        b.eq(coeffs, r)
    b.objective({t: 1.0}, "max")
    res = b.solve(tol)
    if res.status != "OPTIMAL":
        raise SolverFailure(f"cp extension problem not certified: {res.status}")
    tstar = res.value
    scale = max(1.0, linalg.spectral_norm(phi(S.unit)))
    if tstar >= -tol.psd_tol * scale:
        blocks = [v.value(res.x) for v in hvars]
        # clip the t-slack so the certificate is PSD on the nose
        clipped = []
        for C in blocks:
            w, V = np.linalg.eigh(C)
            clipped.append((V * np.clip(w, 0.0, None)) @ V.conj().T)
        return CPVerdict(is_cp=True, choi_blocks=clipped, info={"path": "extension", "t": tstar})

    # not cp: rebuild multipliers from the dual blocks by least squares
    Z = res.lmi_duals
    rows = []
    for tup in tuples:
        rows.append(
            np.concatenate([np.asarray(A, dtype=complex).flatten() for A in tup])
        )
    zvec = np.concatenate([np.asarray(Zi, dtype=complex).flatten() for Zi in Z])
    Arows = np.array(rows).T  # columns indexed by constraints
    nu, *_ = np.linalg.lstsq(
        np.vstack([Arows.real, Arows.imag]),
        np.concatenate([zvec.real, zvec.imag]),
        rcond=None,
    )
    W_list = []
    nq = len(target_basis)
    for m in range(S.dim):
        Wm = np.zeros((k, k), dtype=complex)
        for q in range(nq):
            Wm = Wm + nu[m * nq + q] * target_basis[q]
        W_list.append(Wm)
    X, v, value, scale = _witness_from_farkas(phi, W_list, tol)
    return CPVerdict(
        is_cp=False,
        witness=(X, v, value),
        farkas={"multipliers": W_list, "t": tstar},
        info={"path": "extension"},
    )


@dataclass(frozen=True)
class DualSystem:
    """S* as a matrix-ordered space with a designated faithful-state unit.

    Functionals are ambient matrices modulo the orthocomplement of S, with
    the orthogonal projection onto span(S) as the canonical representative;
    pairing is f_rho(x) = Tr(rho x).  The default unit is the normalized
    trace, and any user-supplied unit is verified faithful by minimizing it
    over the unit-trace positive cone of S.
    """

    base: ConcreteOperatorSystem
    unit_rep: np.ndarray = None

    def __post_init__(self):
        if self.unit_rep is None:
            rep = self.base.unit / self.base.ambient_dim
        else:
            rep = self.base.project(np.asarray(self.unit_rep, dtype=complex))
            if not linalg.is_hermitian(rep):
                raise NotStarPreservingError("dual unit must be a hermitian functional")
            margin = self._faithfulness_margin(rep)
            if margin <= DEFAULT_TOL.feas_margin:
                raise ValueError(
                    f"candidate dual unit is not faithful (margin {margin:.2e})"
                )
        object.__setattr__(self, "unit_rep", rep)

    def _faithfulness_margin(self, rep: np.ndarray) -> float:
        """min Tr(rep p) over p in S+, Tr p = 1; positive iff rep is faithful."""
        S = self.base
        b = SDPBuilder()
        coords = [b.scalar() for _ in range(S.dim)]
        terms = [(j, B) for j, B in zip(coords, S.basis)]
        b.lmi(np.zeros((S.ambient_dim, S.ambient_dim), dtype=complex), terms)
        b.eq({j: float(np.real(np.trace(B))) for j, B in zip(coords, S.basis)}, 1.0)
        b.objective(
            {j: float(np.real(np.trace(rep @ B))) for j, B in zip(coords, S.basis)},
            "min",
        )
        res = b.solve()
        if res.status != "OPTIMAL":
            raise SolverFailure(f"faithfulness check failed: {res.status}")
        return res.value

    def canonical(self, rep: np.ndarray) -> np.ndarray:
        return self.base.project(np.asarray(rep, dtype=complex))

    def functionals_equal(self, rep1, rep2, tol: float = 1e-8) -> bool:
        d = self.canonical(rep1) - self.canonical(rep2)
        return np.linalg.norm(d) <= tol * max(
            1.0, np.linalg.norm(self.canonical(rep1))
        )

    def unit(self, x) -> complex:
        m = x.matrix if hasattr(x, "matrix") else np.asarray(x, dtype=complex)
        return complex(np.trace(self.unit_rep @ m))


def dual_cone_contains(
    D: DualSystem, F, tol: TolerancePolicy = DEFAULT_TOL
) -> tuple[bool, CPVerdict]:
    """Membership of an n x n matrix of functionals in M_n(S*)+.

    F[i][j] are ambient representatives; the test is complete positivity of
    s |-> (f_ij(s)) as a map S -> M_n.
    """
    S = D.base
    F = [[np.asarray(f, dtype=complex) for f in row] for row in F]
    n = len(F)
    action = []
    for Bm in S.basis:
        M = np.array(
            [[np.trace(F[i][j] @ Bm) for j in range(n)] for i in range(n)],
            dtype=complex,
        )
        action.append(M)
    phi = CPMap(source=S, k=n, action=tuple(action))
    phi.require_star_preserving()
    verdict = cp_check(phi, tol)
    return verdict.is_cp, verdict


def _random_cp_functional_matrix(S: ConcreteOperatorSystem, m: int, rng):
    """A random element of M_m(S*)+, built from one PSD Choi matrix P on
    ambient (x) C^m: the map s -> (Tr(rho_ij s))_ij has Choi matrix P, so it
    is completely positive, and rho_ij[q, p] = P[(p,i),(q,j)]."""
    D = S.ambient_dim
    G = rng.normal(size=(D * m, D * m)) + 1j * rng.normal(size=(D * m, D * m))
    P = G @ G.conj().T
    P = P / np.trace(P).real
    Pr = P.reshape(D, m, D, m)
    reps = [[Pr[:, i, :, j].T.copy() for j in range(m)] for i in range(m)]
    return reps


def bidual_compare(
    S: ConcreteOperatorSystem,
    levels=(1, 2),
    num_samples: int = 20,
    num_functional_matrices: int = 5,
    rng=None,
    tol: TolerancePolicy = DEFAULT_TOL,
    elements=None,
) -> dict:
    """Probe that the canonical inclusion of S into its bidual preserves order.

    For sampled hermitian elements at the given levels, direct ambient
    positivity is compared with membership in the double-dual cone; the
    latter is evaluated by pairing against dual-positive functional
    matrices (a dual_cone_contains-certified random family plus the
    canonical matrix-unit family, which is exact).  Any disagreement beyond
    tolerance is reported.
    """
    rng = np.random.default_rng(rng)
    report = {"system": S.name, "levels": list(levels), "disagreements": [], "checked": 0}
    fams = []
    for _ in range(num_functional_matrices):
        m = int(rng.integers(1, 3))
        reps = _random_cp_functional_matrix(S, m, rng)
        ok, _ = dual_cone_contains(DualSystem(S), reps, tol)
        if ok:
            fams.append(reps)
    for n in levels:
        count = len(elements) if elements is not None else num_samples
        for s in range(count):
            if elements is not None:
                X = elements[s]
                if X.level != n:
                    continue
            else:
                X = random_level_element(S, n, rng)
            direct = level_positive(X, tol)
            # canonical family: pairing with matrix units is a permutation of
            # the assembled matrix, so it decides non-positivity exactly
            A = X.assembled()
            scale = max(1.0, linalg.spectral_norm(A))
            nested = float(np.linalg.eigvalsh((A + A.conj().T) / 2)[0]) >= -tol.psd_tol * scale
            for reps in fams:
                m = len(reps)
                P = np.zeros((X.level * m, X.level * m), dtype=complex)
                for u in range(X.level):
                    for v in range(X.level):
                        blk = np.array(
                            [
                                [np.trace(reps[i][j] @ X.entries[u][v]) for j in range(m)]
                                for i in range(m)
                            ],
                            dtype=complex,
                        )
                        P[u * m:(u + 1) * m, v * m:(v + 1) * m] = blk
                lam = float(np.linalg.eigvalsh((P + P.conj().T) / 2)[0])
                if lam < -tol.feas_margin * max(1.0, linalg.spectral_norm(P)):
                    nested = False
            report["checked"] += 1
            if direct != nested:
                report["disagreements"].append(
                    {"level": n, "index": s, "direct": direct, "nested": nested}
                )
    report["agree"] = not report["disagreements"]
    return report


@dataclass(frozen=True)
class DualValuedMap:
    """A map S -> T* recorded by dual representatives of the basis images."""

    source: ConcreteOperatorSystem
    target_dual: DualSystem
    reps: tuple

    def __call__(self, x) -> np.ndarray:
        m = x.matrix if hasattr(x, "matrix") else np.asarray(x, dtype=complex)
        h = (m + m.conj().T) / 2.0
        ah = (m - m.conj().T) / (2.0j)
        ch = linalg.span_coefficients(h, self.source.basis)
        cah = linalg.span_coefficients(ah, self.source.basis)
        out = np.zeros_like(self.reps[0])
        for c, ci, R in zip(ch, cah, self.reps):
            out = out + (c + 1j * ci) * R
        return out


def lance_functional_to_map(
    coeff_matrix: np.ndarray,
    S: ConcreteOperatorSystem,
    T_dual: DualSystem,
) -> DualValuedMap:
    """The map x |-> f(x tensor .) of a functional on S tensor T.

    coeff_matrix[r, s] = f(b_r tensor c_s) over the hermitian bases; the
    image of b_r is represented by sum_s coeff[r, s] c_s in the dual of T.
    No positivity judgement is made here.
    """
    T = T_dual.base
    F = np.asarray(coeff_matrix, dtype=complex)
    if F.shape != (S.dim, T.dim):
        raise ValueError(f"coefficient matrix must be {S.dim} x {T.dim}")
    reps = []
    for r in range(S.dim):
        rho = np.zeros((T.ambient_dim, T.ambient_dim), dtype=complex)
        for s in range(T.dim):
            rho = rho + F[r, s] * T.basis[s]
        reps.append(rho)
    return DualValuedMap(source=S, target_dual=T_dual, reps=tuple(reps))
