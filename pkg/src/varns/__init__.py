"""Variable-exponent Lebesgue machinery and a mild-solution flow solver.

The layers, bottom up: grids and field containers (:mod:`varns.fields`),
spatially varying exponents (:mod:`varns.exponents`), modulars and
Luxemburg norms (:mod:`varns.varlp`), spectral and averaging operators
(:mod:`varns.operators`), the fixed-point solver (:mod:`varns.mild_solver`),
and the verification harness (:mod:`varns.harness`).
"""
from .exponents import (
    ExponentField,
    ExponentRangeError,
    LogHolderReport,
    conjugate_exponent,
    exponent_from_samples,
    log_holder_constants,
    make_exponent,
    resample_exponent,
    scale_exponent,
)
from .fields import (
    PERIODIC,
    TRUNCATED,
    FieldNotFiniteError,
    GridMismatchError,
    GridSpec,
    ScalarField,
    SpaceTimeField,
    TensorField,
    TimeGrid,
    VectorField,
    radial_distance,
)
from .mild_solver import (
    ForceDivergenceError,
    PicardBlowupError,
    SmallnessError,
    SmallnessVerdict,
    SolverConfig,
    SolverResult,
    bilinear_term,
    estimate_bilinear_constant,
    initial_term,
    norm_E_thm1,
    norm_E_thm2,
    picard_solve,
    smallness_check,
)
from .operators import (
    RadialOrderError,
    SpectralWorkspace,
    default_radius_ladder,
    divergence,
    duhamel_accumulate,
    duhamel_force,
    grad_heat_kernel_defect,
    heat_convolve,
    leray_project,
    make_workspace,
    maximal_function,
    radial_majorant_defect,
    relative_divergence,
    riesz_potential_1d,
    riesz_potential_direct,
    riesz_transform,
    tensor_divergence,
)
from .varlp import (
    BisectionError,
    ExponentRelationError,
    NormValue,
    UndefinedRatioError,
    classical_norm,
    conjugate_pairing_lower_bound,
    embedding_defect,
    holder_defect,
    holder_split,
    luxemburg_norm,
    mixed_norm,
    modular,
    unit_function_norm,
)

from . import harness

__version__ = "0.1.0"

__all__ = [
    "PERIODIC",
    "TRUNCATED",
    "BisectionError",
    "ExponentField",
    "ExponentRangeError",
    "ExponentRelationError",
    "FieldNotFiniteError",
    "ForceDivergenceError",
    "GridMismatchError",
    "GridSpec",
    "LogHolderReport",
    "NormValue",
    "PicardBlowupError",
    "RadialOrderError",
    "ScalarField",
    "SmallnessError",
    "SmallnessVerdict",
    "SolverConfig",
    "SolverResult",
    "SpaceTimeField",
    "SpectralWorkspace",
    "TensorField",
    "TimeGrid",
    "UndefinedRatioError",
    "VectorField",
    "bilinear_term",
    "classical_norm",
    "conjugate_exponent",
    "conjugate_pairing_lower_bound",
    "default_radius_ladder",
    "divergence",
    "duhamel_accumulate",
    "duhamel_force",
    "embedding_defect",
    "estimate_bilinear_constant",
    "exponent_from_samples",
    "grad_heat_kernel_defect",
    "heat_convolve",
    "holder_defect",
    "holder_split",
    "initial_term",
    "leray_project",
    "log_holder_constants",
    "luxemburg_norm",
    "make_exponent",
    "make_workspace",
    "maximal_function",
    "mixed_norm",
    "modular",
    "norm_E_thm1",
    "norm_E_thm2",
    "picard_solve",
    "radial_distance",
    "radial_majorant_defect",
    "relative_divergence",
    "resample_exponent",
    "riesz_potential_1d",
    "riesz_potential_direct",
    "riesz_transform",
    "scale_exponent",
    "smallness_check",
    "tensor_divergence",
    "unit_function_norm",
    "__version__",
]
