"""Which subspaces are kernels of completely positive maps, and which are not.

A *-closed subspace avoiding the unit need not be realizable as a kernel:
the span of the corner projection E11 inside M2 fails, because any state
killing E11 is forced by Cauchy-Schwarz to kill the whole first row and
column.  The certification loop exhibits that failure as a concrete
witness, and the quotient cones make the failure geometric: the coset of
E12 + E21 enters every unit-inflated cone (so it lies in the closure) yet
admits no positive representative at any bounded coefficient, and the
order seminorm on the quotient degenerates exactly as predicted.
"""

import numpy as np

from opsyskit import (
    QuotientSystem,
    SystemElement,
    c_cone_contains,
    d_cone_contains,
    is_kernel,
    order_seminorm_hermitian,
)
from opsyskit.gallery import matrix_algebra


def main():
    M2 = matrix_algebra(2, "M2")
    E11 = np.diag([1.0, 0.0]).astype(complex)

    print("candidate kernel: span{E11} inside M2")
    J = is_kernel(M2, [E11])
    print(f"verdict: {J.verdict}")
    print("witness annihilated by every E11-killing state:")
    print(np.round(J.certificate["witness"], 6), "\n")

    Q = QuotientSystem(J)
    x = SystemElement(M2, np.array([[0, 1], [1, 0]], dtype=complex))
    c = c_cone_contains(Q, x)
    d = d_cone_contains(Q, x)
    print("coset of E12 + E21 in the formal quotient M2 / span{E11}:")
    print(f"  closure cone:    member = {c.member}, eps* = {c.eps_star:.2e}")
    print(f"  algebraic cone:  member = {d.member}, best margin = {d.margin:.2e}")
    print("  (representatives [[a, 1], [1, 0]] approach positivity only as a -> inf)")

    sem = order_seminorm_hermitian(
        x, cone_contains=lambda m: c_cone_contains(Q, SystemElement(M2, m)).member
    )
    print(f"  order seminorm of the coset: {sem:.2e}  (a seminorm, not a norm)")

    print("\ncontrast: an indefinite span is always a kernel")
    y = np.diag([3.0, -2.0]).astype(complex)
    J2 = is_kernel(M2, [y])
    print(f"span{{diag(3, -2)}}: verdict = {J2.verdict}, "
          f"separating states found = {len(J2.certificate['states'])}")


if __name__ == "__main__":
    main()
