"""Constants for urysohn-fractals."""

from typing import Final

# Float-mode tolerances (Euclidean backend)
FLOAT_TOLERANCE: Final = 1e-12
METRIC_FLOAT_RTOL: Final = 1e-9

# Modulus classification caps
MATKOWSKI_MAX_ITER: Final = 10_000
MATKOWSKI_EPSILON: Final = 1e-9

# Random generators
HYPERSPACE_CLOUD_SIZE: Final = 64
HYPERSPACE_MAX_SUBSET: Final = 8
MEASURE_SUPPORT_RANGE: Final = (2, 6)
MEASURE_WEIGHT_DENOMINATOR: Final = 1000
URYSOHN_MAX_ATTEMPTS: Final = 1000
URYSOHN_SUBSET_SIZE: Final = 4

# Katetov extension
EXTENSION_MAX_POINTS: Final = 512
EXTENSION_LABEL_PREFIX: Final = "e"
URYSOHN_LABEL_PREFIX: Final = "u"

# Euclidean affine backend
EUCLIDEAN_MAX_DIM: Final = 3
# cdist is used below this many pairs, a KD-tree above it
DENSE_DISTANCE_LIMIT: Final = 4_000_000

# CLI exit codes
EXIT_OK: Final = 0
EXIT_VALIDATION: Final = 1
EXIT_NON_CONVERGENCE: Final = 2
EXIT_MALFORMED: Final = 3

BUILTIN_CONFIG_PREFIX: Final = "builtin:"
BUILTIN_CONFIGS: Final = [
    "half_line",
    "rakotch_fractal",
    "sierpinski",
    "triangle_violation",
]

COMMANDS: Final = [
    "validate",
    "classify",
    "attractor",
    "chaos",
    "wasserstein",
    "lift-check",
    "extend",
    "realize",
    "urysohn",
]
