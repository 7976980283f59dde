"""Certificate-bearing dense conic solver for small hermitian SDPs and LPs.

Problems are stated over real scalar variables x with linear equalities,
linear inequalities, and LMI blocks  F0 + sum_j x_j Fj >= 0  whose
coefficients are complex hermitian matrices.  Hermitian blocks are solved
through their real symmetric embedding [[Re, -Im], [Im, Re]], so a single
cone type backs everything; 1x1 blocks and box bounds ride in the linear
cone.  The backend is cvxopt's primal-dual interior point (conelp), which
reports matched primal/dual objectives (the certified interval) and Farkas
certificates for infeasible or unbounded problems.

The module also provides the two workhorses built on top of the raw
solver: a bisection driver for monotone predicates, and a minimizer over
normalized positive block-diagonal functionals ("states") with certified
facial reduction, which keeps interior-point iterations well-posed on the
boundary cases where the feasible set has empty interior.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as _cvxmat
from cvxopt import solvers as _cvxsolvers

from .errors import BracketInvalidError, SolverFailure
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    hermitian_basis,
)

__all__ = [
    "LMIBlock",
    "SDPProblem",
    "ConicResult",
    "SDPBuilder",
    "HermitianVar",
    "solve_sdp",
    "bisect_scalar",
    "facial_reduce",
    "minimize_over_states",
    "embed_hermitian",
    "unembed_hermitian",
]

_SOLVER_OPTIONS = {
    "show_progress": False,
    "abstol": 1e-9,
    "reltol": 1e-9,
    "feastol": 1e-9,
    "maxiters": 200,
    "refinement": 2,
}


def embed_hermitian(H: np.ndarray) -> np.ndarray:
    """Complex hermitian d x d  ->  real symmetric 2d x 2d, PSD-equivalently."""
    H = np.asarray(H, dtype=complex)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def unembed_hermitian(E: np.ndarray) -> np.ndarray:
    """Left inverse of embed_hermitian on symmetric matrices (averages the copies)."""
    d = E.shape[0] // 2
    A = (E[:d, :d] + E[d:, d:]) / 2.0
    B = (E[d:, :d] - E[:d, d:]) / 2.0
    H = A + 1j * B
    return (H + H.conj().T) / 2.0


@dataclass
class LMIBlock:
    """Affine hermitian expression const + sum_j x_{terms[j][0]} * terms[j][1] >= 0."""

    const: np.ndarray
    terms: list  # list[(var_index, hermitian ndarray)]

    @property
    def dim(self) -> int:
        return self.const.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        M = np.array(self.const, dtype=complex)
        for j, F in self.terms:
            M = M + x[j] * F
        return M


@dataclass
class SDPProblem:
    """min/max  objective . x  over equalities, inequalities and LMI blocks."""

    num_vars: int
    objective: np.ndarray
    sense: str  # "min" or "max"
    eq_rows: np.ndarray
    eq_rhs: np.ndarray
    lin_rows: np.ndarray  # rows r with r . x <= rhs
    lin_rhs: np.ndarray
    lmis: list


@dataclass
class ConicResult:
    """Solver outcome with a certified value interval and certificates.

    status is one of OPTIMAL, FEASIBLE, INFEASIBLE, UNBOUNDED, NUMERIC_FAIL.
    For OPTIMAL the true optimum lies in [value_lo, value_hi] up to solver
    residuals; lmi_duals hold the complex hermitian dual blocks, and for
    INFEASIBLE the certificate carries the Farkas data.
    """

    status: str
    value_lo: float | None = None
    value_hi: float | None = None
    x: np.ndarray | None = None
    lmi_duals: list | None = None
    eq_duals: np.ndarray | None = None
    certificate: dict | None = None
    solver_info: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        if self.value_lo is None or self.value_hi is None:
            raise SolverFailure(f"no certified value on a {self.status} result")
        return 0.5 * (self.value_lo + self.value_hi)


class HermitianVar:
    """A hermitian matrix variable: a coordinate slot per orthonormal basis element."""

    def __init__(self, dim: int, first_index: int):
        self.dim = dim
        self.basis = hermitian_basis(dim)
        self.indices = list(range(first_index, first_index + len(self.basis)))

    def lmi_terms(self, sign: float = 1.0, lift=None):
        """Terms [(index, sign * basis)] for use inside an LMIBlock; lift embeds
        each basis element into a larger constant pattern when given."""
        out = []
        for j, B in zip(self.indices, self.basis):
            out.append((j, sign * (lift(B) if lift is not None else B)))
        return out

    def pairing(self, M: np.ndarray) -> dict:
        """Coefficients of Re Tr(M* X) as a linear functional of the coordinates."""
        M = np.asarray(M, dtype=complex)
        return {
            j: float(np.real(np.trace(B.conj().T @ M)))
            for j, B in zip(self.indices, self.basis)
        }

    def value(self, x: np.ndarray) -> np.ndarray:
        M = np.zeros((self.dim, self.dim), dtype=complex)
        for j, B in zip(self.indices, self.basis):
            M = M + x[j] * B
        return M


class SDPBuilder:
    """Incremental construction of an SDPProblem."""

    def __init__(self):
        self._n = 0
        self._obj: dict[int, float] = {}
        self._sense = "min"
        self._eqs: list[tuple[dict, float]] = []
        self._ineqs: list[tuple[dict, float]] = []
        self._lmis: list[LMIBlock] = []

    def scalar(self, lo: float | None = None, hi: float | None = None) -> int:
        j = self._n
        self._n += 1
        if lo is not None:
            self.leq({j: -1.0}, -lo)
        if hi is not None:
            self.leq({j: 1.0}, hi)
        return j

    def hermitian(self, dim: int) -> HermitianVar:
        v = HermitianVar(dim, self._n)
        self._n += len(v.basis)
        return v

    def objective(self, coeffs: dict, sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self._obj = dict(coeffs)
        self._sense = sense

    def eq(self, coeffs: dict, rhs: float):
        self._eqs.append((dict(coeffs), float(rhs)))

    def leq(self, coeffs: dict, rhs: float):
        self._ineqs.append((dict(coeffs), float(rhs)))

    def lmi(self, const: np.ndarray, terms):
        merged: dict[int, np.ndarray] = {}
        for j, F in terms:
            merged[j] = merged.get(j, 0) + np.asarray(F, dtype=complex)
        self._lmis.append(
            LMIBlock(np.asarray(const, dtype=complex), sorted(merged.items()))
        )

    def psd(self, var: HermitianVar):
        """Constrain a hermitian variable itself to be PSD."""
        self.lmi(np.zeros((var.dim, var.dim), dtype=complex), var.lmi_terms())

    def build(self) -> SDPProblem:
        def rows(items):
            A = np.zeros((len(items), self._n))
            b = np.zeros(len(items))
            for r, (coeffs, rhs) in enumerate(items):
                for j, c in coeffs.items():
                    A[r, j] = c
                b[r] = rhs
            return A, b

        eq_rows, eq_rhs = rows(self._eqs)
        lin_rows, lin_rhs = rows(self._ineqs)
        obj = np.zeros(self._n)
        for j, c in self._obj.items():
            obj[j] = c
        return SDPProblem(
            num_vars=self._n,
            objective=obj,
            sense=self._sense,
            eq_rows=eq_rows,
            eq_rhs=eq_rhs,
            lin_rows=lin_rows,
            lin_rhs=lin_rhs,
            lmis=self._lmis,
        )

    def solve(self, tol: TolerancePolicy = DEFAULT_TOL) -> ConicResult:
        return solve_sdp(self.build(), tol)


def _reduce_equalities(A: np.ndarray, b: np.ndarray):
    """Replace A x = b by an equivalent full-row-rank system U_r^T A x = U_r^T b.

    Returns (A_red, b_red, U_r, consistent); inconsistency means the
    equality system alone is infeasible, with b's unexplained component as
    a Farkas direction.
    """
    if A.shape[0] == 0:
        return A, b, np.zeros((0, 0)), True
    scale = max(1.0, np.abs(A).max())
    U, s, _ = np.linalg.svd(A / scale, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if len(s) else 0)))
    Ur = U[:, :rank]
    resid = b - Ur @ (Ur.T @ b)
    consistent = np.linalg.norm(resid) <= 1e-9 * max(1.0, np.linalg.norm(b))
    return Ur.T @ A, Ur.T @ b, Ur, consistent


def _conelp(problem: SDPProblem):
    n = problem.num_vars
    sign = 1.0 if problem.sense == "min" else -1.0
    c = sign * problem.objective

    G_parts, h_parts, sdims = [], [], []
    nl = problem.lin_rows.shape[0]
    if nl:
        G_parts.append(problem.lin_rows)
        h_parts.append(problem.lin_rhs)
    for lmi in problem.lmis:
        E0 = embed_hermitian(lmi.const)
        d = E0.shape[0]
        sdims.append(d)
        cols = np.zeros((d * d, n))
        for j, F in lmi.terms:
            cols[:, j] = -embed_hermitian(F).flatten(order="F")
        G_parts.append(cols)
        h_parts.append(E0.flatten(order="F"))
    if not G_parts:
        # purely linear-algebraic problem; give the solver a trivial cone row
        G_parts.append(np.zeros((1, n)))
        h_parts.append(np.ones(1))
        nl = 1
    Gfull = np.vstack(G_parts)
    hfull = np.concatenate(h_parts)

    A, b, Ur, consistent = _reduce_equalities(problem.eq_rows, problem.eq_rhs)
    if not consistent:
        return {"status": "primal infeasible", "x": None, "z": None, "y": None,
                "preprocessed": "inconsistent equalities"}, nl, sdims, sign

    # cvxopt requires Rank([G; A]) = n: eliminate variable directions that no
    # constraint sees.  Along such a direction the objective is either flat
    # (pin it to zero) or the problem is unbounded.
    stacked = np.vstack([Gfull, A]) if A.shape[0] else Gfull
    scale = max(1.0, np.abs(stacked).max())
    _, s, vt = np.linalg.svd(stacked / scale, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if len(s) else 0)))
    Vr = vt[:rank].T  # n x rank
    lift = None
    if rank < n:
        cnull = c - Vr @ (Vr.T @ c)
        if np.linalg.norm(cnull) > 1e-10 * max(1.0, np.linalg.norm(c)):
            ray = -cnull / max(np.linalg.norm(cnull), 1e-300)
            return {"status": "dual infeasible", "x": _cvxmat(ray),
                    "z": None, "y": None,
                    "preprocessed": "objective unbounded along unconstrained direction"}, nl, sdims, sign
        lift = Vr
        c = Vr.T @ c
        Gfull = Gfull @ Vr
        if A.shape[0]:
            A = A @ Vr

    kwargs = {}
    if A.shape[0]:
        kwargs["A"] = _cvxmat(A)
        kwargs["b"] = _cvxmat(b)

    try:
        # per-call options keep independent solves safe to run concurrently
        sol = _cvxsolvers.conelp(
            _cvxmat(c), _cvxmat(Gfull), _cvxmat(hfull),
            {"l": nl, "q": [], "s": sdims},
            options=dict(_SOLVER_OPTIONS), **kwargs
        )
    except (ValueError, ArithmeticError, ZeroDivisionError) as exc:
        sol = {"status": "unknown", "x": None, "z": None, "y": None,
               "backend_error": str(exc)}

    if lift is not None and sol.get("x") is not None:
        sol["x"] = _cvxmat(lift @ np.array(sol["x"]).flatten())
    if Ur.size and sol.get("y") is not None:
        sol["y"] = _cvxmat(Ur @ np.array(sol["y"]).flatten())
    return sol, nl, sdims, sign


def _split_duals(zflat: np.ndarray, nl: int, sdims):
    """Linear-cone dual part and complex hermitian dual blocks from a z vector."""
    zlin = zflat[:nl].copy()
    out = []
    off = nl
    for d in sdims:
        Z = zflat[off : off + d * d].reshape((d, d), order="F")
        out.append(unembed_hermitian((Z + Z.T) / 2.0))
        off += d * d
    return zlin, out


def solve_sdp(problem: SDPProblem, tol: TolerancePolicy = DEFAULT_TOL) -> ConicResult:
    """Solve an SDPProblem, returning a certified ConicResult.

    OPTIMAL results carry [value_lo, value_hi] from the dual and primal
    iterates; INFEASIBLE results carry the Farkas certificate (y, duals)
    normalized by the solver; UNBOUNDED results carry an improving ray.
    A feasibility problem (zero objective) reports FEASIBLE instead of
    OPTIMAL.  Statuses the backend cannot certify map to NUMERIC_FAIL.
    """
    sol, nl, sdims, sign = _conelp(problem)
    info = {
        "backend_status": sol["status"],
        "gap": sol.get("gap"),
        "relative_gap": sol.get("relative gap"),
        "primal_infeasibility": sol.get("primal infeasibility"),
        "dual_infeasibility": sol.get("dual infeasibility"),
    }
    status = sol["status"]
    if status == "optimal":
        x = np.array(sol["x"]).flatten()
        _, lmi_duals = _split_duals(np.array(sol["z"]).flatten(), nl, sdims)
        eq_duals = (
            np.array(sol["y"]).flatten() if sol.get("y") is not None else None
        )
        pobj = float(sol["primal objective"])
        dobj = float(sol["dual objective"])
        if problem.sense == "min":
            lo, hi = dobj, pobj
        else:
            lo, hi = -pobj, -dobj
        if lo > hi:
            lo, hi = hi, lo
        feasibility_only = not np.any(problem.objective)
        return ConicResult(
            status="FEASIBLE" if feasibility_only else "OPTIMAL",
            value_lo=lo,
            value_hi=hi,
            x=x,
            lmi_duals=lmi_duals,
            eq_duals=eq_duals,
            solver_info=info,
        )
    if status == "primal infeasible":
        if sol.get("z") is not None:
            zlin, lmi_duals = _split_duals(np.array(sol["z"]).flatten(), nl, sdims)
        else:
            zlin, lmi_duals = None, None
        y = np.array(sol["y"]).flatten() if sol.get("y") is not None else None
        return ConicResult(
            status="INFEASIBLE",
            lmi_duals=lmi_duals,
            eq_duals=y,
            certificate={"y": y, "z_lin": zlin, "lmi_duals": lmi_duals,
                         "note": sol.get("preprocessed")},
            solver_info=info,
        )
    if status == "dual infeasible":
        x = np.array(sol["x"]).flatten()
        return ConicResult(
            status="UNBOUNDED",
            x=x,
            certificate={"ray": x},
            solver_info=info,
        )
    result = ConicResult(status="NUMERIC_FAIL", solver_info=info)
    if sol.get("x") is not None:
        result.x = np.array(sol["x"]).flatten()
        if sol.get("primal objective") is not None and sol.get("dual objective") is not None:
            pobj, dobj = float(sol["primal objective"]), float(sol["dual objective"])
            pair = (dobj, pobj) if problem.sense == "min" else (-pobj, -dobj)
            info["uncertified_interval"] = (min(pair), max(pair))
    return result


def problem_to_sexpr(problem: SDPProblem) -> str:
    """Plain-text dump of a problem for offline reproduction.

    The format is a readable s-expression: objective, equalities,
    inequalities and LMI blocks with their coefficient matrices in
    (re ... im ...) pairs.  There is no parser; the dump exists so a
    failing solve can be reproduced and reported exactly.
    """

    def mat(M):
        M = np.asarray(M, dtype=complex)
        re = " ".join(f"{v:.17g}" for v in M.real.flatten())
        im = " ".join(f"{v:.17g}" for v in M.imag.flatten())
        return f"(mat {M.shape[0]} {M.shape[1]} (re {re}) (im {im}))"

    out = [f"(sdp (vars {problem.num_vars}) (sense {problem.sense})"]
    obj = " ".join(f"{v:.17g}" for v in problem.objective)
    out.append(f"  (objective {obj})")
    for row, rhs in zip(problem.eq_rows, problem.eq_rhs):
        coeffs = " ".join(f"{v:.17g}" for v in row)
        out.append(f"  (eq ({coeffs}) {rhs:.17g})")
    for row, rhs in zip(problem.lin_rows, problem.lin_rhs):
        coeffs = " ".join(f"{v:.17g}" for v in row)
        out.append(f"  (leq ({coeffs}) {rhs:.17g})")
    for lmi in problem.lmis:
        terms = " ".join(f"(term {j} {mat(F)})" for j, F in lmi.terms)
        out.append(f"  (lmi (const {mat(lmi.const)}) {terms})")
    out.append(")")
    return "\n".join(out)


def bisect_scalar(pred, lo: float, hi: float, tol: float) -> float:
    """Least s in [lo, hi] with pred(s) true, for monotone nondecreasing pred.

    Requires pred(lo) false and pred(hi) true; the returned midpoint is
    within tol of the true threshold.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if pred(lo):
        raise BracketInvalidError("pred(lo) must be False")
    if not pred(hi):
        raise BracketInvalidError("pred(hi) must be True")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Facial reduction and the state-form minimizer.
#
# The compact problem  min <X, W>  over block-diagonal W >= 0 with
# Tr W = 1 and finitely many pairings <B_i, W> = b_i  is the dual shape of
# every cone-membership and quotient-norm computation in this package.  Its
# feasible set can have empty interior exactly when some PSD combination
# sum_i lambda_i B_i (with lambda . b = 0) exists; interior-point solvers
# stall there.  The classical remedy is certified facial reduction: detect
# such a combination Z, compress onto ker Z, and repeat.  Detection itself
# is a Slater-regular SDP (maximize t s.t. tI <= Y <= I over Y orthogonal
# to the combination span): a strictly positive optimum exhibits an
# interior point of the reduced problem, while optimum zero yields Z from
# the dual block.
# ---------------------------------------------------------------------------


def _tuple_coords(mats_tuple, bases):
    return np.concatenate(
        [
            np.array([np.real(np.trace(B.conj().T @ M)) for B in basis])
            for M, basis in zip(mats_tuple, bases)
        ]
    )


def _tuple_from_coords(coords, bases, dims):
    out = []
    off = 0
    for basis, d in zip(bases, dims):
        M = np.zeros((d, d), dtype=complex)
        for B in basis:
            M = M + coords[off] * B
            off += 1
        out.append(M)
    return out


def _reducing_direction(constraint_tuples, rhs, dims, tol: TolerancePolicy):
    """One facial-reduction detection step.

    Returns ('regular', t, None) when the span {sum lambda_i B_i : lambda.b = 0}
    contains no nonzero PSD tuple (t > 0 exhibits a strictly feasible state),
    ('reduce', t, Z_blocks) with a trace-one PSD tuple in the span otherwise,
    or ('fail', status, None) if the detection SDP could not be certified.
    """
    bases = [hermitian_basis(d) for d in dims]
    total = sum(len(b) for b in bases)
    rows = np.array([_tuple_coords(t, bases) for t in constraint_tuples])
    rhs = np.asarray(rhs, dtype=float)
    if len(constraint_tuples) == 0:
        span_rows = np.zeros((0, total))
    else:
        # combinations with lambda . rhs = 0
        if np.linalg.norm(rhs) > 0:
            _, s, vt = np.linalg.svd(rhs.reshape(1, -1))
            null = vt[1:]
            span_rows = null @ rows
        else:
            span_rows = rows
    # orthonormal basis of the span and of its orthocomplement
    if span_rows.shape[0]:
        scale = max(np.abs(span_rows).max(), 1e-300)
        _, s, vt = np.linalg.svd(span_rows / scale, full_matrices=True)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if len(s) else 0)))
        span_on = vt[:rank]
        perp = vt[rank:]
    else:
        span_on = np.zeros((0, total))
        perp = np.eye(total)

    b = SDPBuilder()
    ycoords = [b.scalar() for _ in range(perp.shape[0])]
    t = b.scalar()
    terms_minus_t = []
    terms_y = {j: [] for j in ycoords}
    # assemble per-block LMIs: Y_i - t I >= 0 and I - Y_i >= 0
    perp_tuples = [_tuple_from_coords(row, bases, dims) for row in perp]
    for i, d in enumerate(dims):
        eye = np.eye(d, dtype=complex)
        terms_pos = [(j, T[i]) for j, T in zip(ycoords, perp_tuples)]
        terms_neg = [(j, -T[i]) for j, T in zip(ycoords, perp_tuples)]
        b.lmi(np.zeros((d, d), dtype=complex), terms_pos + [(t, -eye)])
        b.lmi(eye, terms_neg)
    b.objective({t: 1.0}, "max")
    res = b.solve(tol)
    if res.status != "OPTIMAL":
        return ("fail", res.status, None)
    tstar = res.value
    if tstar > 10 * tol.feas_margin:
        return ("regular", tstar, None)
    # dual of the (Y - tI >= 0) blocks carries the PSD tuple in the span
    Zt = [res.lmi_duals[2 * i] for i in range(len(dims))]
    coords = _tuple_coords(Zt, bases)
    proj = span_on.T @ (span_on @ coords) if span_on.shape[0] else np.zeros(total)
    Z = _tuple_from_coords(proj, bases, dims)
    # clip to PSD and normalize the total trace
    clipped = []
    for M in Z:
        w, V = np.linalg.eigh((M + M.conj().T) / 2.0)
        w = np.clip(w, 0.0, None)
        clipped.append((V * w) @ V.conj().T)
    tr = sum(np.trace(M).real for M in clipped)
    if tr < 10 * tol.feas_margin:
        return ("fail", "degenerate reducing direction", None)
    return ("reduce", tstar, [M / tr for M in clipped])


def facial_reduce(constraint_tuples, rhs, dims, tol: TolerancePolicy = DEFAULT_TOL):
    """Compress block dimensions until {W >= 0 : <B_i, W> = b_i} has interior.

    Returns (isometries, reduced_constraints, reduced_dims, steps) where
    isometries[i] is a dims[i] x r_i matrix V_i with the face W = V W' V*.
    Blocks may reduce to zero columns.  The reduced constraint tuples
    correspond one-to-one with the inputs.
    """
    dims = list(dims)
    isometries = [np.eye(d, dtype=complex) for d in dims]
    cons = [[np.asarray(M, dtype=complex) for M in t] for t in constraint_tuples]
    steps = 0
    for _ in range(sum(dims) + 1):
        live = [i for i, d in enumerate(dims) if d > 0]
        if not live:
            break
        sub_cons = [[t[i] for i in live] for t in cons]
        verdict, t, Z = _reducing_direction(
            sub_cons, rhs, [dims[i] for i in live], tol
        )
        if verdict == "regular":
            break
        if verdict == "fail":
            raise SolverFailure(f"facial reduction step failed: {t}")
        reduced_any = False
        for pos, i in enumerate(live):
            M = Z[pos]
            w, V = np.linalg.eigh((M + M.conj().T) / 2.0)
            keep = V[:, w < tol.feas_margin * max(1.0, float(w.max()) if len(w) else 1.0)]
            if keep.shape[1] < dims[i]:
                reduced_any = True
                isometries[i] = isometries[i] @ keep
                dims[i] = keep.shape[1]
                for tup in cons:
                    tup[i] = keep.conj().T @ tup[i] @ keep
        steps += 1
        if not reduced_any:
            break
    return isometries, cons, dims, steps


def _solve_state_problem(objective_blocks, constraint_tuples, rhs, dims, tol):
    """One direct solve of min <X, W>, W >= 0 blocks, <B_i, W> = b_i."""
    b = SDPBuilder()
    hvars = []
    obj_coeffs: dict[int, float] = {}
    for i, d in enumerate(dims):
        if d == 0:
            hvars.append(None)
            continue
        v = b.hermitian(d)
        hvars.append(v)
        b.psd(v)
        for j, c in v.pairing(objective_blocks[i]).items():
            obj_coeffs[j] = obj_coeffs.get(j, 0.0) + c
    for tup, r in zip(constraint_tuples, rhs):
        coeffs: dict[int, float] = {}
        for i, v in enumerate(hvars):
            if v is None:
                continue
            for j, c in v.pairing(tup[i]).items():
                if c != 0.0:
                    coeffs[j] = coeffs.get(j, 0.0) + c
        if coeffs:
            b.eq(coeffs, r)
        elif abs(r) > tol.feas_margin:
            return (
                ConicResult(
                    status="INFEASIBLE",
                    certificate={"reason": "constraint with empty support"},
                ),
                hvars,
            )
    b.objective(obj_coeffs, "min")
    return b.solve(tol), hvars


def minimize_over_states(
    objective_blocks,
    constraint_tuples,
    dims,
    tol: TolerancePolicy = DEFAULT_TOL,
):
    """min <X, W> over block-diagonal states W (PSD, total trace 1) with
    <B_i, W> = 0 for every constraint tuple.

    A direct interior-point solve is attempted first; when the backend
    cannot certify it (typically because the annihilation constraints force
    W onto a face of the cone, so the feasible set has empty interior), the
    problem is compressed by certified facial reduction and re-solved.
    The optimal W blocks, lifted back to the original dimensions, ride in
    result.certificate["W_blocks"]; status INFEASIBLE means no state
    satisfies the constraints at all.
    """
    dims = list(dims)
    objective_blocks = [np.asarray(M, dtype=complex) for M in objective_blocks]
    tuples = [
        [np.asarray(M, dtype=complex) for M in t] for t in constraint_tuples
    ] + [[np.eye(d, dtype=complex) for d in dims]]
    rhs = [0.0] * len(constraint_tuples) + [1.0]

    res, hvars = _solve_state_problem(objective_blocks, tuples, rhs, dims, tol)
    if res.status in ("OPTIMAL", "FEASIBLE"):
        W_blocks = [
            np.zeros((d, d), dtype=complex) if v is None else v.value(res.x)
            for v, d in zip(hvars, dims)
        ]
        res.certificate = {"W_blocks": W_blocks, "fr_steps": 0}
        return res
    if res.status == "INFEASIBLE":
        return res

    # rescue path: facial reduction, then retry on the compressed face
    isos, red_cons, red_dims, steps = facial_reduce(tuples, rhs, dims, tol)
    if sum(red_dims) == 0:
        return ConicResult(
            status="INFEASIBLE",
            certificate={"reason": "no state survives facial reduction"},
            solver_info={"fr_steps": steps},
        )
    red_obj = [V.conj().T @ M @ V for V, M in zip(isos, objective_blocks)]
    res, hvars = _solve_state_problem(red_obj, red_cons, rhs, red_dims, tol)
    if res.status not in ("OPTIMAL", "FEASIBLE"):
        if res.status == "INFEASIBLE":
            res.solver_info["fr_steps"] = steps
            return res
        raise SolverFailure(
            f"state minimization not certified after facial reduction: "
            f"{res.status} ({res.solver_info})"
        )
    W_blocks = []
    for i, v in enumerate(hvars):
        if v is None:
            W_blocks.append(np.zeros((dims[i], dims[i]), dtype=complex))
        else:
            W_blocks.append(isos[i] @ v.value(res.x) @ isos[i].conj().T)
    res.certificate = {"W_blocks": W_blocks, "fr_steps": steps}
    return res
