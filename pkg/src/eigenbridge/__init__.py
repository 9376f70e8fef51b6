"""Partial-sum bridge processes of random matrix eigenvectors.

The package samples Haar rotations and sample covariance models, turns
eigenvector coordinates into pinned partial-sum processes, and verifies
their limit behavior (Brownian bridge paths, Marchenko-Pastur bulk,
rank-one detection) with reproducible replicated experiments.
"""

__version__ = "0.1.0"

from .errors import (
    BadDimension,
    BadParam,
    BadTheta,
    BadVariance,
    ConfigError,
    Degenerate,
    EigenbridgeError,
    LengthMismatch,
    NoConvergence,
    NoRoot,
    NotOrthogonal,
    NotSymmetric,
    NotUnit,
    PoleTooClose,
    RankDeficient,
    TooFewPaths,
)
from .linalg import QrFactors, SpectralDecomposition, gram_schmidt, resolvent_quadratic_form, sym_eig
from .rand import (
    ComplexGaussian,
    Rademacher,
    RealGaussian,
    RngStream,
    SymmetricTwoPoint,
    law_from_name,
    sample_matrix,
    sign_vector_family,
)
from .haar import haar_columns, haar_orthogonal, haar_unitary, randomize_eigenspaces
from .processes import (
    StepProcess,
    TimeChangedProcess,
    cross_process_complex,
    cross_process_real,
    diag_process_complex,
    diag_process_real,
    time_change,
    weighted_spectral_cdf,
)
from .mp import DiscreteLaw, MarchenkoPastur, mp_cdf, mp_density, mp_support_edges, resolvent_moment
from .spike import (
    SpikeSolution,
    build_spiked,
    detectability_threshold,
    largest_eig_secular,
    projection_stat,
    theoretical_solution,
    top_eigvec_resolvent,
)
from .stats import (
    TestReport,
    bridge_covariance_check,
    covariance_statistic,
    cross_independence_check,
    gaussian_moment_check,
    kolmogorov_cdf,
    ks_distance,
    weighted_ks_distance,
)
from .harness import EXPERIMENTS, ExperimentConfig, ReplicateRecord, collect_records, run_experiment
