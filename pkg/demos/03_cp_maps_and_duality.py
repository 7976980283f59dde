"""Certifying complete positivity, and the dual picture.

A map from a subsystem of matrices into matrices is completely positive
exactly when it extends completely positively to the ambient algebra, and
on the ambient algebra one PSD (Choi) matrix decides everything.  The
checker below returns that extension as the certificate, or, on failure,
a positive matrix over the subsystem whose image has a strictly negative
expectation.  The same criterion orders the dual space: a matrix of
functionals counts as positive when evaluation is a completely positive
map, and pairing sampled dual positives against elements reproduces the
original order (the bidual probe).
"""

import numpy as np

from opsyskit import CPMap, DualSystem, bidual_compare, cp_check, dual_cone_contains
from opsyskit.gallery import diagonal_algebra, matrix_algebra, partial_matrix_system


def main():
    M2 = matrix_algebra(2, "M2")

    print("transpose on M2:")
    v = cp_check(CPMap(M2, 2, tuple(B.T.copy() for B in M2.basis)))
    X, vec, value = v.witness
    print(f"  completely positive: {v.is_cp}")
    print(f"  witness: a positive level-{X.level} element whose image has "
          f"expectation {value:.6f}\n")

    print("a compression of the partial-matrix system (extension route):")
    S7 = partial_matrix_system()
    sel = np.array([[1, 0, 0], [0, 0, 1.0]], dtype=complex)
    v = cp_check(CPMap(S7, 2, tuple(sel @ B @ sel.conj().T for B in S7.basis)))
    print(f"  completely positive: {v.is_cp} (path: {v.info['path']})\n")

    print("dual cone of M2 under the trace pairing:")
    D = DualSystem(M2)
    rho = np.array([[0.6, 0.2], [0.2, 0.4]], dtype=complex)
    ok, _ = dual_cone_contains(D, [[rho.T]])
    print(f"  density-matrix functional positive: {ok}")
    ok, _ = dual_cone_contains(D, [[-rho.T]])
    print(f"  its negative positive: {ok}\n")

    print("bidual probe (order restored by pairing against dual positives):")
    for S in (diagonal_algebra(3, "l3"), M2):
        rep = bidual_compare(S, levels=(1, 2), num_samples=15, rng=1)
        print(f"  {S.name}: {rep['checked']} checks, agree = {rep['agree']}")


if __name__ == "__main__":
    main()
