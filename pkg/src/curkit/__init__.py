"""curkit: CUR/skeleton low-rank approximation toolkit.

Builds skeleton (column/row) approximations of dense matrices, verifies the
exact-decomposition identities, evaluates perturbation bounds on the
reconstruction error of every rank-enforcement variant, and runs desk-scale
sampling experiments.
"""

from .bounds import (
    BoundReport,
    MaxvolBounds,
    NoiseDecomposition,
    NormSpec,
    StewartReport,
    bound_maxvol,
    bound_plain,
    bound_projection,
    bound_projection_rank,
    bound_rank_u,
    bound_thresholded,
    mirsky_gap,
    mu_for,
    perturbation_terms,
    singular_vector_terms,
    stewart_pinv_check,
    weyl_gap,
)
from .cur import (
    CurFactors,
    CurVariant,
    approximate,
    check_identities,
    extract_cur,
    verify_exact_cur,
)
from .experiments import (
    ExperimentConfig,
    TrialResult,
    gen_decay_spectrum,
    gen_gaussian_kernel,
    gen_hilbert,
    gen_noise,
    gen_spsd_lowrank,
    general_truncation_check,
    nystrom_truncation_check,
    rank_truncation_counterexample,
    relative_error,
    run_experiment,
    summarize,
)
from .linalg import (
    SvdFactors,
    numerical_rank,
    pinv,
    rank_truncate,
    schatten_norm,
    singular_values,
    submatrix,
    svd,
    threshold_svd,
    truncated_svd,
    volume,
)
from .matio import read_matrix, write_matrix
from .sampling import (
    IndexSet,
    certify_maxvol,
    exhaustive_maxvol,
    leverage_sample,
    leverage_scores,
    length_sample,
    maxvol_select,
    spawn_rng,
    t_factor,
    t_factor_frobenius,
    uniform_sample,
)

__version__ = "0.1.0"
