"""Bundled example gallery.

Each entry is a compiled-in constructor (never a data file, so the
examples cannot drift from the code) that builds its systems, runs the
relevant computations, and returns a plain report dictionary with the
values and certificates a scenario run embeds.
"""

from __future__ import annotations

import numpy as np

from . import linalg, opsys, quotient, tensor
from .errors import InvalidInputError
from .linalg import DEFAULT_TOL, BlockShape

__all__ = ["GALLERY_KEYS", "build_gallery_report", "four_point_interval_system",
           "matrix_algebra", "partial_matrix_system", "traceless_direct_sum_system"]


def matrix_algebra(d: int, name: str | None = None) -> opsys.ConcreteOperatorSystem:
    """The full matrix algebra M_d as a concrete system."""
    gens = linalg.hermitian_basis(d)
    return opsys.build_system(BlockShape([d]), gens, name or f"M{d}")


def diagonal_algebra(m: int, name: str | None = None) -> opsys.ConcreteOperatorSystem:
    """The diagonal algebra with m coordinates."""
    gens = [np.diag(np.eye(m)[i]).astype(complex) for i in range(m)]
    return opsys.build_system(BlockShape([1] * m), gens, name or f"l{m}")


def four_point_interval_system(n: int):
    """The four-coordinate example family: kernel span (-1,0,n,2n), element
    (0,1,n+1,0); the two quotient norms differ by the factor (2/3)(n+1)."""
    S = diagonal_algebra(4, "l4")
    y = np.diag([-1.0, 0.0, float(n), 2.0 * n]).astype(complex)
    x = np.diag([0.0, 1.0, float(n + 1), 0.0]).astype(complex)
    return S, y, x


def partial_matrix_system() -> opsys.ConcreteOperatorSystem:
    """The 7-dimensional subsystem of M_3 with vanishing (1,3) and (3,1) entries."""
    def mk(i, j, val):
        m = np.zeros((3, 3), dtype=complex)
        m[i, j] = val
        return m

    gens = [
        mk(0, 0, 1), mk(1, 1, 1), mk(2, 2, 1),
        mk(0, 1, 1) + mk(1, 0, 1), mk(0, 1, 1j) + mk(1, 0, -1j),
        mk(1, 2, 1) + mk(2, 1, 1), mk(1, 2, 1j) + mk(2, 1, -1j),
    ]
    return opsys.build_system(BlockShape([3]), gens, "partial3")


def traceless_direct_sum_system():
    """S = {(lam I + a) (+) (lam I - a)} in M_3 (+) M_3, a traceless hermitian."""
    gens = [np.eye(6, dtype=complex)]
    basis3 = linalg.hermitian_basis(3)
    for B in basis3:
        B0 = B - (np.trace(B) / 3.0) * np.eye(3)
        if np.linalg.norm(B0) < 1e-12:
            continue
        big = np.zeros((6, 6), dtype=complex)
        big[:3, :3] = B0
        big[3:, 3:] = -B0
        gens.append(big)
    S = opsys.build_system(BlockShape([3, 3]), gens, "mirror33")
    a = np.diag([2.0, -1.0, -1.0]).astype(complex)
    witness = np.zeros((6, 6), dtype=complex)
    witness[:3, :3] = np.eye(3) + a
    witness[3:, 3:] = np.eye(3) - a
    return S, witness


def _report_example_44(n: int, tol) -> dict:
    S, y, x = four_point_interval_system(n)
    J = quotient.is_kernel(S, [y], tol)
    Q = quotient.QuotientSystem(J)
    xe = opsys.SystemElement(S, x)
    osy, osy_res = quotient.osy_norm(Q, xe, tol, with_certificate=True)
    osp, cert = quotient.osp_norm(Q, xe, tol, with_certificate=True)
    alpha = float(np.real(np.trace(cert["K"] @ np.diag([1.0, 0, 0, 0]))) / (-1.0))
    osp_res = cert["result"]
    return {
        "n": n,
        "kernel_verdict": J.verdict,
        "osy": osy,
        "osy_interval": [max(0.0, -osy_res.value_hi), max(0.0, -osy_res.value_lo)],
        "osp": osp,
        "osp_interval": [osp_res.value_lo, osp_res.value_hi],
        "expected_osp": (2.0 / 3.0) * (n + 1),
        "optimizing_alpha": alpha,
        "coefficients": cert["coeffs"].tolist(),
    }


def _report_e11(tol) -> dict:
    S = matrix_algebra(2, "M2")
    E11 = np.zeros((2, 2), dtype=complex)
    E11[0, 0] = 1.0
    J = quotient.is_kernel(S, [E11], tol)
    Q = quotient.QuotientSystem(J)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    xe = opsys.SystemElement(S, x)
    c = quotient.c_cone_contains(Q, xe, 1, tol)
    d = quotient.d_cone_contains(Q, xe, 1, tol)
    sem = opsys.order_seminorm_hermitian(
        xe,
        cone_contains=lambda m: quotient.c_cone_contains(
            Q, opsys.SystemElement(S, m), 1, tol
        ).member,
        tol=tol,
    )
    return {
        "kernel_verdict": J.verdict,
        "witness": linalg.matrix_to_json(J.certificate["witness"]),
        "closure_cone_member": c.member,
        "eps_star": c.eps_star,
        "algebraic_cone_member": d.member,
        "algebraic_margin": d.margin,
        "order_seminorm": sem,
    }


def _report_direct_sum_ratio(m_max: int, tol) -> dict:
    rows = []
    for m in range(1, m_max + 1):
        S, y, _ = four_point_interval_system(m)
        x = np.diag([0.0, 1.0 / (m + 1), 1.0, 0.0]).astype(complex)
        J = quotient.is_kernel(S, [y], tol)
        Q = quotient.QuotientSystem(J)
        xe = opsys.SystemElement(S, x)
        osy = quotient.osy_norm(Q, xe, tol)
        osp = quotient.osp_norm(Q, xe, tol)
        rows.append(
            {
                "m": m,
                "osy": osy,
                "osp": osp,
                "ratio": osp / osy,
                "expected_ratio": (2.0 / 3.0) * (m + 1),
            }
        )
    return {"family": rows, "unbounded_in_m": True}


def _report_embedding(tol) -> dict:
    S, witness = traceless_direct_sum_system()
    rep = quotient.quotient_embedding_check(
        S, ideal_blocks=[1], candidates=[witness], levels=(1, 2), rng=7, tol=tol
    )
    A = opsys.build_system(
        S.shape,
        [m for m in _full_direct_sum_generators()],
        "M3plusM3",
    )
    rep_full = quotient.quotient_embedding_check(
        A, ideal_blocks=[1], levels=(1, 2), rng=7, tol=tol
    )
    return {
        "subsystem_verdict": rep.verdict,
        "witness": None if rep.witness is None else linalg.matrix_to_json(rep.witness),
        "witness_eps_star": rep.witness_eps_star,
        "full_algebra_verdict": rep_full.verdict,
    }


def _full_direct_sum_generators():
    basis3 = linalg.hermitian_basis(3)
    gens = []
    for B in basis3:
        big = np.zeros((6, 6), dtype=complex)
        big[:3, :3] = B
        gens.append(big.copy())
        big = np.zeros((6, 6), dtype=complex)
        big[3:, 3:] = B
        gens.append(big)
    return gens


def _report_nuclear_partner(p: int, m: int, samples: int, seed, tol) -> dict:
    Mp = matrix_algebra(p)
    lm = diagonal_algebra(m)
    rng = np.random.default_rng(seed)
    TS = tensor.max_tensor(Mp, lm)
    agree = 0
    for _ in range(samples):
        u = linalg.random_hermitian(rng, BlockShape([p * m]))
        # project into the span and shift to min-positivity
        ue = opsys.SystemElement(TS.system, TS.system.project(TS.from_kron(u)))
        lam = float(np.linalg.eigvalsh(ue.matrix)[0])
        u2 = opsys.SystemElement(TS.system, ue.matrix - lam * TS.system.unit)
        v = tensor.max_membership(TS, u2, k=1, tol=tol)
        if v.status == "MEMBER":
            agree += 1
    return {
        "left": Mp.name,
        "right": lm.name,
        "samples": samples,
        "members": agree,
        "all_member": agree == samples,
    }


def _report_partial_matrix(budget: int, seed, tol) -> dict:
    S7 = partial_matrix_system()
    rep = tensor.nuclearity_gap_probe(S7, S7, levels=(1,), budget=budget, rng=seed, tol=tol)
    return {
        "system_dim": S7.dim,
        "probe_verdict": rep["verdict"],
        "num_candidates": len(rep["candidates"]),
        "certified_gap": rep["certified_gap"] is not None,
    }


GALLERY_KEYS = (
    "example-4.4",
    "e11-non-kernel",
    "direct-sum-ratio",
    "traceless-direct-sum",
    "partial-matrix-7dim",
    "nuclear-partner-demo",
)


def build_gallery_report(key: str, n: int = 1, seed: int = 0, tol=DEFAULT_TOL) -> dict:
    """Run one gallery example and return its report payload."""
    if key == "example-4.4":
        return _report_example_44(max(1, n), tol)
    if key == "e11-non-kernel":
        return _report_e11(tol)
    if key == "direct-sum-ratio":
        return _report_direct_sum_ratio(max(1, n if n > 1 else 6), tol)
    if key == "traceless-direct-sum":
        return _report_embedding(tol)
    if key == "partial-matrix-7dim":
        return _report_partial_matrix(max(1, n), seed, tol)
    if key == "nuclear-partner-demo":
        return _report_nuclear_partner(2, 2, max(4, n), seed, tol)
    raise InvalidInputError(
        f"unknown gallery key {key!r}; available: {', '.join(GALLERY_KEYS)}"
    )
