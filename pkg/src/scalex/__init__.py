"""Matrix scaling to prescribed row and column sums, with concentration bounds
and convergence experiments for randomly perturbed matrices."""

from scalex.bounds import (
    ConcentrationReport,
    EnsembleBounds,
    MarginalProfile,
    concentration_constants,
    error_measure,
    lemma1_bounds,
    lemma2_tail,
    lemma3_bound,
    rho_profile,
    theorem2_report,
)
from scalex.core import (
    InvalidInputError,
    Marginals,
    ScalingSolution,
    as_positive_matrix,
    margin_residual,
    normalize_gauge,
    operator_norm,
    scaled_matrix,
    sinkhorn_knopp,
)

__version__ = "0.1.0"
