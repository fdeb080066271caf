"""Structured binary embeddings for angular-distance hashing.

Pool-backed structured gaussian projections (Toeplitz, circulant, or general
subset structures), two sign-hashing pipelines with an optional randomized
Hadamard front end, a Hamming-fraction angle estimator, row-dependency graph
coloring diagnostics, and a Monte-Carlo harness for bias/concentration
verification.
"""

from .errors import (
    DimensionMismatch,
    GraphTooLargeForExact,
    InvalidBoundInputs,
    InvalidStructure,
    NonPowerOfTwoLength,
    PsiHashError,
    RowCountExceedsDimension,
    RowIndexOutOfRange,
    RowsNotDistinct,
    ThetaOutOfRange,
)
from .experiments import (
    BoundEvaluation,
    BoundInputs,
    CheckOutcome,
    ConcentrationReport,
    ExperimentConfig,
    chebyshev_epsilon,
    emit_report,
    evaluate_checks,
    evaluate_theorem1_bound,
    hyperplane_basis_after_front_end,
    make_pair_at_angle,
    max_row_pair_overlap,
    pool_coefficient_rows,
    run_bias_experiment,
    run_concentration_experiment,
)
from .graphs import (
    ChromaticResult,
    DependencyGraph,
    PChromaticResult,
    build_graph,
    chromatic_number,
    p_chromatic_number,
)
from .pipeline import (
    AngleEstimate,
    BinaryHash,
    HashPipeline,
    PipelineConfig,
    Quantizer,
    RealHash,
    build_pipeline,
    estimate_angle,
    estimate_angle_radians,
    next_pow_two,
    normalize,
)
from .structured import (
    GaussianPool,
    PsiRegularMatrix,
    SubsetStructure,
    ValidationReport,
    family_structure,
    make_circulant,
    make_general,
    make_toeplitz,
    matrix_from_dict,
    matrix_to_dict,
    structure_from_dict,
    structure_to_dict,
    validate,
)
from .transforms import (
    CirculantSpec,
    ToeplitzSpec,
    apply_diagonal,
    circulant_matvec,
    dense_matvec,
    fwht_normalized,
    sylvester_hadamard,
    toeplitz_matvec,
)

__version__ = "0.1.0"
