"""Numerical star products and Toeplitz quantization on the torus R^2n / Z^2n.

The package has three layers: exact symbol algebra on trigonometric
polynomials (``trigpoly``, ``funcexpr``, ``starprod``), finite-dimensional
quantization at level k (``quantize``), and convergence experiments with
reporting (``analysis``, ``config``, ``reporting``, ``checks``, ``cli``).
"""

from .analysis import (
    ConvergenceReport,
    NormKind,
    PowerIterationWarning,
    SlopeFit,
    SweepPoint,
    TooFewPointsError,
    certified_l2_norm,
    error_intertwine,
    error_product,
    fit_slope,
    operator_norm,
    riemann_sum_error,
    run_experiment,
    spectral_norm,
    superpoly_decay_ok,
    torus_relation_defects,
    trace_error,
)
from .config import ConfigError, ExperimentConfig, FunctionSpec, config_hash, parse_config
from .funcexpr import ExpressionError, ProjectionSpec, parse, project
from .quantize import (
    HilbertSpec,
    Polarization,
    PolarizationError,
    QuantumOperator,
    QuantumState,
    apply_toeplitz,
    assemble_toeplitz,
    intertwine,
    operator_trace,
    quantum_torus_generators,
)
from .starprod import (
    HbarSeries,
    HbarValue,
    Orientation,
    berezin_exact,
    berezin_truncated,
    bidifferential,
    equivalence_map,
    mixed_laplacian,
    star_exact,
    star_formal,
    star_trace,
    star_truncated,
)
from .trigpoly import (
    DimensionMismatchError,
    FibrewiseCoefficient,
    TrigPoly,
    poisson_bracket,
    random_trig_poly,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceReport",
    "DimensionMismatchError",
    "ExperimentConfig",
    "ExpressionError",
    "FibrewiseCoefficient",
    "FunctionSpec",
    "HbarSeries",
    "HbarValue",
    "HilbertSpec",
    "NormKind",
    "Orientation",
    "Polarization",
    "PolarizationError",
    "PowerIterationWarning",
    "ProjectionSpec",
    "QuantumOperator",
    "QuantumState",
    "SlopeFit",
    "SweepPoint",
    "TooFewPointsError",
    "TrigPoly",
    "apply_toeplitz",
    "assemble_toeplitz",
    "berezin_exact",
    "berezin_truncated",
    "bidifferential",
    "certified_l2_norm",
    "config_hash",
    "equivalence_map",
    "error_intertwine",
    "error_product",
    "fit_slope",
    "intertwine",
    "mixed_laplacian",
    "operator_norm",
    "operator_trace",
    "parse",
    "parse_config",
    "poisson_bracket",
    "project",
    "quantum_torus_generators",
    "random_trig_poly",
    "riemann_sum_error",
    "run_experiment",
    "spectral_norm",
    "star_exact",
    "star_formal",
    "star_trace",
    "star_truncated",
    "superpoly_decay_ok",
    "torus_relation_defects",
    "trace_error",
]
