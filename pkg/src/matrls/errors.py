"""Exception types raised across the package."""

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A matrix expected to be symmetric positive definite is not.

    ``pivot`` is the zero-based index of the first offending Cholesky pivot
    (``None`` when the failure was a symmetry check). ``column`` is set by the
    column-by-column estimators to name the parameter column being updated.
    """

    def __init__(self, message, pivot=None, column=None):
        super().__init__(message)
        self.pivot = pivot
        self.column = column


class DimensionError(ValueError):
    """Array shapes are inconsistent with the problem dimensions."""


class VariantError(TypeError):
    """A weight or regularization variant was passed to a family that cannot use it."""


class CheckpointError(ValueError):
    """A checkpoint file has the wrong method tag, dimensions or layout."""


class DatasetFormatError(ValueError):
    """A dataset CSV row could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
