"""Urysohn fractals package."""

__version__ = "0.1.0"

from .exceptions import (
    FractalConvergenceException,
    FractalException,
    FractalMissingFieldException,
    FractalParseException,
    FractalValidationException,
)
from .hutchinson import (
    IFSystem,
    chaos_game,
    code_diameter,
    code_point,
    hutchinson_image,
    hyperspace_contraction_report,
    iterate_to_attractor,
)
from .katetov import (
    ExtensionState,
    KatetovFunction,
    build_urysohn_approx,
    extend_map,
    extend_system,
    extension_coverage,
    katetov_from_map,
    realize_point,
)
from .measures import (
    DiscreteMeasure,
    TransportPlan,
    coupling_pushforward,
    dirac,
    lift_system,
    lifted_hutchinson_image,
    pushforward,
    verify_measure_contraction,
    wasserstein1,
)
from .metric import (
    CompactSet,
    EuclideanSpace,
    FiniteMetricSpace,
    LabelSet,
    PointCloud,
    directed_distance,
    hausdorff_distance,
    set_image,
    validate_metric,
)
from .moduli import (
    AffineMap,
    ContinuityModulus,
    TableMap,
    check_edelstein,
    check_phi_contracting,
    classify_modulus,
    empirical_oscillation,
    eval_modulus,
    lipschitz_constant,
    oscillation_modulus,
    rakotch_constant,
)
from .types import (
    ClassificationReport,
    HyperspaceReport,
    LiftReport,
    LiftTrial,
    RunConfig,
)

__all__ = [
    "AffineMap",
    "ClassificationReport",
    "CompactSet",
    "ContinuityModulus",
    "DiscreteMeasure",
    "EuclideanSpace",
    "ExtensionState",
    "FiniteMetricSpace",
    "FractalConvergenceException",
    "FractalException",
    "FractalMissingFieldException",
    "FractalParseException",
    "FractalValidationException",
    "HyperspaceReport",
    "IFSystem",
    "KatetovFunction",
    "LabelSet",
    "LiftReport",
    "LiftTrial",
    "PointCloud",
    "RunConfig",
    "TableMap",
    "TransportPlan",
    "build_urysohn_approx",
    "chaos_game",
    "check_edelstein",
    "check_phi_contracting",
    "classify_modulus",
    "code_diameter",
    "code_point",
    "coupling_pushforward",
    "dirac",
    "directed_distance",
    "empirical_oscillation",
    "eval_modulus",
    "extend_map",
    "extend_system",
    "extension_coverage",
    "hausdorff_distance",
    "hutchinson_image",
    "hyperspace_contraction_report",
    "iterate_to_attractor",
    "katetov_from_map",
    "lift_system",
    "lifted_hutchinson_image",
    "lipschitz_constant",
    "oscillation_modulus",
    "pushforward",
    "rakotch_constant",
    "realize_point",
    "set_image",
    "validate_metric",
    "verify_measure_contraction",
    "wasserstein1",
]
