"""Batch and recursive least squares for matrix-valued parameters."""

from .errors import (
    CheckpointError,
    DatasetFormatError,
    DimensionError,
    NotPositiveDefiniteError,
    VariantError,
)
from .estimators import (
    ColumnwiseState,
    MatrixUpdateState,
    UpdateForm,
    VecPermState,
    batch_estimate,
    columnwise_batch,
    columnwise_init,
    columnwise_step,
    matrix_batch,
    matrix_init,
    matrix_step,
    run_recursive,
    state_param_count,
    vec_perm_batch,
    vec_perm_init,
    vec_perm_step,
    vector_rls_step,
)
from .problem import (
    ColumnReg,
    ColumnWeight,
    FullReg,
    FullWeight,
    Measurement,
    ProblemDims,
    SharedReg,
    SharedWeight,
)

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "ColumnReg",
    "ColumnWeight",
    "ColumnwiseState",
    "DatasetFormatError",
    "DimensionError",
    "FullReg",
    "FullWeight",
    "MatrixUpdateState",
    "Measurement",
    "NotPositiveDefiniteError",
    "ProblemDims",
    "SharedReg",
    "SharedWeight",
    "UpdateForm",
    "VariantError",
    "VecPermState",
    "batch_estimate",
    "columnwise_batch",
    "columnwise_init",
    "columnwise_step",
    "matrix_batch",
    "matrix_init",
    "matrix_step",
    "run_recursive",
    "state_param_count",
    "vec_perm_batch",
    "vec_perm_init",
    "vec_perm_step",
    "vector_rls_step",
]
