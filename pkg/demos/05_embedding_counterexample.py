"""A subsystem quotient that refuses to embed into the C*-quotient.

Inside M3 (+) M3, take the mirrored subsystem of pairs (lam I + a,
lam I - a) with a traceless hermitian.  It meets the ideal 0 (+) M3 only
at zero, so quotienting changes nothing on the subsystem side, while the
C*-quotient just forgets the second block.  Forgetting the mirror loses
order information: with a = diag(2, -1, -1) the surviving block I + a is
positive, but the mirrored partner I - a is not, so the induced map is
not an order embedding.  Running the full algebra through the same check
shows the contrast: C*-quotients of C*-algebras never lose order.
"""

import numpy as np

from opsyskit import build_system, quotient_embedding_check
from opsyskit.gallery import _full_direct_sum_generators, traceless_direct_sum_system
from opsyskit.linalg import BlockShape


def main():
    S, witness = traceless_direct_sum_system()
    print("subsystem of mirrored pairs in M3 (+) M3, ideal = second block")
    rep = quotient_embedding_check(S, [1], candidates=[witness], levels=(1, 2), rng=7)
    print(f"verdict: {rep.verdict}")
    print("witness (block diagonal):")
    print(np.round(rep.witness.real, 3))
    print(f"distance of its coset from the quotient cone: eps* = "
          f"{rep.witness_eps_star:.4f}\n")

    A = build_system(BlockShape([3, 3]), _full_direct_sum_generators(), "M3+M3")
    rep = quotient_embedding_check(A, [1], levels=(1, 2), num_samples=12, rng=7)
    print(f"control, full algebra through the same ideal: {rep.verdict} "
          f"({rep.samples_checked} candidates checked)")


if __name__ == "__main__":
    main()
