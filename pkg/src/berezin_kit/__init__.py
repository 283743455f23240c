"""Berezin quantization toolkit: model Kaehler spaces, their Hilbert spaces of
analytic functions, coherent states, semiclassical diagnostics and vacuum duality."""

from .coherent import (
    CoherentState,
    LadderOperators,
    coherent_state,
    eigen_residual,
    ladder_operators,
    overlap,
    resolution_of_identity_residual,
)
from .duality import MoebiusMap, SampledFunction, classify, coherence_residual, pullback
from .errors import (
    BerezinError,
    ConstraintError,
    DegenerateGramError,
    DomainError,
    FiniteNormError,
    MetricError,
    PoleProximityError,
    QuadratureError,
    SpecMismatchError,
    ToleranceUnreachable,
)
from .hilbert import (
    AnalyticFunction,
    GramMatrix,
    InnerProductSpec,
    gram_matrix,
    inner_product,
    make_spec,
    orthonormal_basis,
    reproducing_kernel,
    space_dimension,
)
from .phase_space import PhaseSpace, SpaceKind, custom, disc, measure_density, metric_eval, plane, potential_eval, sphere
from .quadrature import QuadratureRule, build_rule, detect_divergence, integrate
from .semiclassical import SemiclassicalSweep, run_sweep, scaled_log_overlap

__version__ = "0.1.0"

__all__ = [
    "CoherentState",
    "LadderOperators",
    "coherent_state",
    "eigen_residual",
    "ladder_operators",
    "overlap",
    "resolution_of_identity_residual",
    "MoebiusMap",
    "SampledFunction",
    "classify",
    "coherence_residual",
    "pullback",
    "BerezinError",
    "ConstraintError",
    "DegenerateGramError",
    "DomainError",
    "FiniteNormError",
    "MetricError",
    "PoleProximityError",
    "QuadratureError",
    "SpecMismatchError",
    "ToleranceUnreachable",
    "AnalyticFunction",
    "GramMatrix",
    "InnerProductSpec",
    "gram_matrix",
    "inner_product",
    "make_spec",
    "orthonormal_basis",
    "reproducing_kernel",
    "space_dimension",
    "PhaseSpace",
    "SpaceKind",
    "custom",
    "disc",
    "measure_density",
    "metric_eval",
    "plane",
    "potential_eval",
    "sphere",
    "QuadratureRule",
    "build_rule",
    "detect_divergence",
    "integrate",
    "SemiclassicalSweep",
    "run_sweep",
    "scaled_log_overlap",
]
