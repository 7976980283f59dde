"""Two competing norms on a quotient of the four-coordinate diagonal algebra.

Quotienting an operator system by the span of an indefinite hermitian
element leaves two natural norms on the cosets: the operator-system one
(computed through unital completely positive maps that kill the kernel)
and the operator-space one (the plain minimum over representatives).
On this family the first stays at 1 while the second grows linearly, so
no constant relates them uniformly.
"""

import numpy as np

from opsyskit import QuotientSystem, SystemElement, is_kernel, osp_norm, osy_norm
from opsyskit.gallery import four_point_interval_system


def main():
    print("coset of x = (0, 1, n+1, 0) modulo span{(-1, 0, n, 2n)}\n")
    print(f"{'n':>3} {'osy':>10} {'osp':>10} {'(2/3)(n+1)':>12} {'best shift':>11}")
    for n in range(1, 9):
        S, y, x = four_point_interval_system(n)
        kernel = is_kernel(S, [y])
        assert kernel.verdict == "KERNEL"
        Q = QuotientSystem(kernel)
        xe = SystemElement(S, x)
        osy = osy_norm(Q, xe)
        osp, cert = osp_norm(Q, xe, with_certificate=True)
        alpha = -cert["K"][0, 0].real  # the K = alpha * y entry at coordinate 1
        print(f"{n:>3} {osy:>10.6f} {osp:>10.6f} {(2/3)*(n+1):>12.6f} {alpha:>11.6f}")

    print("\nScaling the element by 1/(m+1) pins osp at 2/3 while osy shrinks,")
    print("so the ratio (2/3)(m+1) is unbounded:\n")
    for m in (1, 3, 6, 10):
        S, y, _ = four_point_interval_system(m)
        x = np.diag([0.0, 1.0 / (m + 1), 1.0, 0.0]).astype(complex)
        Q = QuotientSystem(is_kernel(S, [y]))
        xe = SystemElement(S, x)
        r = osp_norm(Q, xe) / osy_norm(Q, xe)
        print(f"  m={m:>2}: ratio = {r:.6f}")


if __name__ == "__main__":
    main()
