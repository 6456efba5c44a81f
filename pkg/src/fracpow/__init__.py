"""Real powers A^alpha of square matrices, and their action on vectors, by quadrature."""

from .action import ActionReport, cg_solve_shifted, de_action_adaptive, gj_action_doubling
from .convergence import (
    SpeedRow,
    SpeedTable,
    d0,
    f_de_eval,
    pole_imag,
    pole_location,
    recommend_method,
    scalar_de_predict,
    speed_de,
    speed_gj1,
    speed_gj2,
)
from .de import (
    QuadratureReport,
    ToleranceSpec,
    TruncationInterval,
    de_adaptive,
    de_fixed,
    de_integrand,
    get_interval,
    trapezoid_refine,
    trapezoid_sum,
    truncation_error_bound,
)
from .errors import *  # noqa: F401,F403
from .gauss_jacobi import (
    JacobiRule,
    TauSelection,
    gj1,
    gj2,
    gj2_preconditioned,
    jacobi_rule,
    lambert_w,
    select_tau,
)
from .linalg import CsrMatrix, NormEstimates, estimate_norms, lu_solve_shifted, symmetric_eig
from .matrices import (
    gen_nonsymmetric,
    gen_spd,
    laplacian_1d,
    poisson_2d,
    read_matrix_market,
    write_matrix_market,
)
from .operators import (
    CallbackOperator,
    DenseLUOperator,
    ScaledOperator,
    ShiftedLinearOperator,
    SparseCGOperator,
)
from .oracles import db_sqrt, hpd_power, inv_newton_root, matrix_root, rational_power, scale_matrix
from .powm import fractional_action, fractional_power

__version__ = "0.1.0"
