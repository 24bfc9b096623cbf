"""Shape inference through squared canonical correlations.

The geometric information of a landmark pair that survives translation,
rotation and a common relabelling of the coordinate axes is carried by the
squared canonical correlations of the Helmertized configurations.  This
package evaluates their exact joint density (a finite Euler-relation form
when the landmark/dimension parities allow it, a zonal-polynomial series
otherwise), estimates the population correlations by maximum likelihood, and
computes tail probabilities for comparing correlation shape structure.
"""

from .density import (
    CanonicalCorrModel,
    CorrelationSample,
    SampleDomainError,
    density_cell_means,
    integrate_density,
    log_density_polynomial,
    log_density_series,
    log_norm_constant,
)
from .hypergeom import (
    SeriesReport,
    SeriesSpec,
    gauss_2f1_terminating,
    hyper_two_matrix,
    mv_gamma,
    mv_log_gamma,
)
from .inference import (
    DiscriminationResult,
    EstimationReport,
    MLEOptions,
    discriminate_landmarks,
    log_likelihood,
    mle,
    tail_probability,
)
from .jack import JackEvaluator, evaluator, jack_C, jack_C_2d, jack_C_identity, jack_J
from .landmarks import (
    HelmertizedPair,
    LandmarkConfiguration,
    LandmarkFormatError,
    build_correlation_samples,
    eulerian_coordinates,
    helmert_submatrix,
    helmertize,
    parse_landmark_file,
    squared_canonical_correlations,
    write_landmark_file,
)
from .orthogonal import QuadratureSpec, euler_2f1, integrate_O2, integrate_OK
from .partitions import (
    Partition,
    conjugate,
    dominance_leq,
    gen_pochhammer,
    hook_norm,
    partitions_of,
)
from .simulate import SimSpec, sample_canonical_pairs

__version__ = "0.1.0"

__all__ = [
    "CanonicalCorrModel",
    "CorrelationSample",
    "DiscriminationResult",
    "EstimationReport",
    "HelmertizedPair",
    "JackEvaluator",
    "LandmarkConfiguration",
    "LandmarkFormatError",
    "MLEOptions",
    "Partition",
    "QuadratureSpec",
    "SampleDomainError",
    "SeriesReport",
    "SeriesSpec",
    "SimSpec",
    "build_correlation_samples",
    "conjugate",
    "density_cell_means",
    "discriminate_landmarks",
    "dominance_leq",
    "euler_2f1",
    "eulerian_coordinates",
    "evaluator",
    "gauss_2f1_terminating",
    "gen_pochhammer",
    "helmert_submatrix",
    "helmertize",
    "hook_norm",
    "hyper_two_matrix",
    "integrate_O2",
    "integrate_OK",
    "integrate_density",
    "jack_C",
    "jack_C_2d",
    "jack_C_identity",
    "jack_J",
    "log_density_polynomial",
    "log_density_series",
    "log_likelihood",
    "log_norm_constant",
    "mle",
    "mv_gamma",
    "mv_log_gamma",
    "parse_landmark_file",
    "partitions_of",
    "sample_canonical_pairs",
    "squared_canonical_correlations",
    "tail_probability",
    "write_landmark_file",
]
