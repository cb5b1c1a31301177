"""PCA matrix denoising with uniform (2, infinity) error tracking.

Library layout:

* :mod:`udn.linalg`      - SVD, norms, projections, symmetric eigensolver
* :mod:`udn.datagen`     - zigzag curves, two-class model, noise injection
* :mod:`udn.denoise`     - rank-r spectral denoising and the gap check
* :mod:`udn.bounds`      - error-bound evaluators and the lower-bound oracle
* :mod:`udn.downstream`  - k-means, graph Laplacian, agreement metrics
* :mod:`udn.experiments` - config-driven simulation harness
* :mod:`udn.matrixio`    - CSV / UDMX matrix files
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    LowerBoundThresholds,
    MonteCarloLowerBound,
    bayes_t_estimator,
    bayes_t_estimator_sigma_squared_form,
    leave_one_out_residual,
    lower_bound_montecarlo,
    lower_bound_thresholds,
    theorem1_bounds,
)
from .datagen import (
    LabeledSample,
    NoiseSpec,
    TwoClassZigzagModel,
    ZigzagCurve,
    add_noise,
    curve_covariance,
    curve_covariance_bound,
    generate_zigzag,
    make_two_class_model,
    orthonormal_embedding,
    sample_curve,
    sample_two_class,
)
from .denoise import (
    DenoiseResult,
    SpectralGapReport,
    pca_denoise,
    select_rank,
    spectral_gap_check,
)
from .downstream import (
    AssumptionReport,
    Clustering,
    LaplacianResult,
    adjusted_rand_index,
    check_cluster_assumption,
    clustering_accuracy,
    erm_gap_check,
    kmeans,
    laplacian_inf_distance,
    make_average_error_matrix,
    normalized_laplacian,
    sign_cluster,
)
from .errors import ConfigError, DataError, NumericalError, UdnError
from .linalg import (
    EigPairs,
    SvdResult,
    frobenius_norm,
    inf_operator_norm,
    project_rows,
    spectral_norm,
    svd,
    sym_eig_smallest,
    two_inf_norm,
)
from .metrics import ErrorReport, error_report
from .rng import make_rng, seed_for

__all__ = [name for name in dir() if not name.startswith("_")]
