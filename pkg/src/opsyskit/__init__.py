"""opsyskit: finite-dimensional operator systems at desk scale.

Quotients by certified kernels, the competing operator-space and
operator-system quotient norms, complete-positivity certificates, dual
and bidual orderings, and min/max tensor cone membership, all on dense
complex matrices backed by a certificate-bearing conic solver.
"""

__version__ = "0.1.0"

from .errors import (
    BracketInvalidError,
    InvalidInputError,
    NonHermitianError,
    NotAKernelError,
    NotStarPreservingError,
    OpsyskitError,
    PartnerNotCstarError,
    ShapeMismatchError,
    SolverFailure,
    SubspaceNotAnnihilatedError,
    UnitInSubspaceError,
)
from .linalg import (
    BlockShape,
    TolerancePolicy,
    eig_hermitian,
    hermitian_basis,
    is_hermitian,
    is_psd,
    kron,
    real_span_basis,
    spectral_norm,
)
from .conic import ConicResult, SDPBuilder, bisect_scalar, solve_sdp
from .opsys import (
    ConcreteOperatorSystem,
    MatrixLevelElement,
    StateVector,
    SystemElement,
    build_system,
    find_state,
    level_positive,
    order_seminorm_hermitian,
    system_norm,
)
from .quotient import (
    KernelSubspace,
    QuotientSystem,
    c_cone_contains,
    d_cone_contains,
    is_kernel,
    j_dec_norm,
    osp_norm,
    osy_norm,
    proximinality_probe,
    quotient_embedding_check,
)
from .dualsys import (
    CPMap,
    DualSystem,
    bidual_compare,
    cp_check,
    dual_cone_contains,
    lance_functional_to_map,
)
from .tensor import (
    MaxVerdict,
    TensorSystem,
    comm_membership,
    max_membership,
    max_tensor,
    min_membership,
    min_tensor,
    nuclearity_gap_probe,
)
from .gallery import GALLERY_KEYS, build_gallery_report
