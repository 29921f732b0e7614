"""Problem data: measurements and the three nesting levels of weights.

The cost weights the residual ``vec(y - phi @ theta)`` with an ``mp x mp``
matrix and the prior deviation ``vec(theta - theta0)`` with an ``mn x mn``
matrix. Either may be given in full, as ``m`` independent diagonal blocks (one
per parameter column), or as one block shared by every column.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import block_diag

from .errors import DimensionError, VariantError
from .linalg import as_matrix, check_spd, spd_inverse

__all__ = [
    "ColumnReg",
    "ColumnWeight",
    "FullReg",
    "FullWeight",
    "Measurement",
    "ProblemDims",
    "SharedReg",
    "SharedWeight",
    "infer_dims",
    "weight_at",
]


@dataclass(frozen=True)
class ProblemDims:
    """``p`` measurement rows, ``n`` parameter rows, ``m`` parameter columns."""

    p: int
    n: int
    m: int

    def __post_init__(self):
        for name in ("p", "n", "m"):
            if int(getattr(self, name)) < 1:
                raise DimensionError(f"{name} must be >= 1")


@dataclass(frozen=True, eq=False)
class Measurement:
    """One sample of ``y = phi @ theta``: `phi` is ``p x n``, `y` is ``p x m``."""

    phi: NDArray[np.float64]
    y: NDArray[np.float64]

    def __post_init__(self):
        phi = as_matrix(self.phi, "phi")
        y = as_matrix(self.y, "y")
        if phi.shape[0] != y.shape[0]:
            raise DimensionError(
                f"phi has {phi.shape[0]} rows but y has {y.shape[0]}")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "y", y)

    @property
    def dims(self) -> ProblemDims:
        return ProblemDims(self.phi.shape[0], self.phi.shape[1], self.y.shape[1])


def infer_dims(data: Sequence[Measurement], dims: ProblemDims = None) -> ProblemDims:
    """Dimensions shared by every measurement in `data` (checked against `dims`)."""
    if not data:
        if dims is None:
            raise DimensionError("no measurements and no dims given")
        return dims
    found = data[0].dims
    if dims is not None and dims != found:
        raise DimensionError(f"data has dims {found}, expected {dims}")
    for i, meas in enumerate(data):
        if meas.dims != found:
            raise DimensionError(
                f"measurement {i} has dims {meas.dims}, expected {found}")
    return found


def _check_blocks(blocks, name):
    if len(blocks) == 0:
        raise DimensionError(f"{name} needs at least one block")
    checked = tuple(check_spd(b, f"{name}[{j}]") for j, b in enumerate(blocks))
    size = checked[0].shape[0]
    if any(b.shape[0] != size for b in checked):
        raise DimensionError(f"{name} blocks must all have the same size")
    return checked


def _blocks_of(matrix, m, name):
    """Split a block-diagonal matrix into `m` blocks; VariantError otherwise."""
    total = matrix.shape[0]
    if total % m:
        raise DimensionError(f"{name} of size {total} is not divisible into {m} blocks")
    s = total // m
    blocks = tuple(matrix[j * s:(j + 1) * s, j * s:(j + 1) * s] for j in range(m))
    if not np.array_equal(block_diag(*blocks), matrix):
        raise VariantError(
            f"{name} is not block diagonal; only the vec-permutation family accepts it")
    return blocks


def _memo(spec, key, build):
    """Cache a derived spec on the (immutable) instance."""
    cache = spec.__dict__.setdefault("_derived", {})
    if key not in cache:
        cache[key] = build()
    return cache[key]


# -- residual weights ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FullWeight:
    """Arbitrary SPD weight on ``vec`` of the residual, size ``mp x mp``."""

    matrix: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_spd(self.matrix, "weight"))

    @cached_property
    def inverse(self):
        return spd_inverse(self.matrix, "weight")

    def to_full(self, m: int) -> "FullWeight":
        return self

    def to_columns(self, m: int) -> "ColumnWeight":
        return _memo(self, ("columns", m),
                     lambda: ColumnWeight(_blocks_of(self.matrix, m, "weight")))

    def check(self, dims: ProblemDims):
        if self.matrix.shape[0] != dims.m * dims.p:
            raise DimensionError(
                f"full weight has size {self.matrix.shape[0]}, expected {dims.m * dims.p}")


@dataclass(frozen=True, eq=False)
class ColumnWeight:
    """One ``p x p`` SPD weight per residual column."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", _check_blocks(tuple(self.blocks), "weight"))

    @cached_property
    def inverses(self):
        return tuple(spd_inverse(b, "weight") for b in self.blocks)

    def to_full(self, m: int) -> FullWeight:
        if len(self.blocks) != m:
            raise DimensionError(f"{len(self.blocks)} weight blocks for m={m}")
        return _memo(self, ("full", m), lambda: FullWeight(block_diag(*self.blocks)))

    def to_columns(self, m: int) -> "ColumnWeight":
        return self

    def check(self, dims: ProblemDims):
        if len(self.blocks) != dims.m or self.blocks[0].shape[0] != dims.p:
            raise DimensionError(
                f"per-column weight has {len(self.blocks)} blocks of size "
                f"{self.blocks[0].shape[0]}, expected {dims.m} of size {dims.p}")


@dataclass(frozen=True, eq=False)
class SharedWeight:
    """A single ``p x p`` SPD weight applied to every residual column."""

    matrix: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_spd(self.matrix, "weight"))

    @cached_property
    def inverse(self):
        return spd_inverse(self.matrix, "weight")

    def to_full(self, m: int) -> FullWeight:
        return _memo(self, ("full", m), lambda: FullWeight(np.kron(np.eye(m), self.matrix)))

    def to_columns(self, m: int) -> ColumnWeight:
        return _memo(self, ("columns", m), lambda: ColumnWeight((self.matrix,) * m))

    def check(self, dims: ProblemDims):
        if self.matrix.shape[0] != dims.p:
            raise DimensionError(
                f"shared weight has size {self.matrix.shape[0]}, expected {dims.p}")


Weight = Union[FullWeight, ColumnWeight, SharedWeight]


def weight_at(weights, i: int):
    """The weight for step `i`; a single spec is reused for every step."""
    if isinstance(weights, (FullWeight, ColumnWeight, SharedWeight)):
        return weights
    return weights[i]


# -- regularization -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _RegBase:
    theta0: NDArray[np.float64] = field(default=None, kw_only=True)

    def prior(self, n: int, m: int) -> NDArray[np.float64]:
        """Initial estimate ``theta0`` (zeros when none was given)."""
        if self.theta0 is None:
            return np.zeros((n, m))
        theta0 = as_matrix(self.theta0, "theta0")
        if theta0.shape != (n, m):
            raise DimensionError(f"theta0 has shape {theta0.shape}, expected {(n, m)}")
        return theta0


@dataclass(frozen=True, eq=False)
class FullReg(_RegBase):
    """Arbitrary SPD regularization on ``vec(theta - theta0)``, size ``mn x mn``."""

    matrix: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_spd(self.matrix, "regularization"))

    def to_full(self, m: int) -> "FullReg":
        return self

    def to_columns(self, m: int) -> "ColumnReg":
        return ColumnReg(_blocks_of(self.matrix, m, "regularization"), theta0=self.theta0)

    def check(self, dims: ProblemDims):
        if self.matrix.shape[0] != dims.m * dims.n:
            raise DimensionError(
                f"full regularization has size {self.matrix.shape[0]}, "
                f"expected {dims.m * dims.n}")


@dataclass(frozen=True, eq=False)
class ColumnReg(_RegBase):
    """One ``n x n`` SPD regularization block per parameter column."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks",
                           _check_blocks(tuple(self.blocks), "regularization"))

    def to_full(self, m: int) -> FullReg:
        if len(self.blocks) != m:
            raise DimensionError(f"{len(self.blocks)} regularization blocks for m={m}")
        return FullReg(block_diag(*self.blocks), theta0=self.theta0)

    def to_columns(self, m: int) -> "ColumnReg":
        return self

    def check(self, dims: ProblemDims):
        if len(self.blocks) != dims.m or self.blocks[0].shape[0] != dims.n:
            raise DimensionError(
                f"per-column regularization has {len(self.blocks)} blocks of size "
                f"{self.blocks[0].shape[0]}, expected {dims.m} of size {dims.n}")


@dataclass(frozen=True, eq=False)
class SharedReg(_RegBase):
    """A single ``n x n`` SPD regularization shared by every parameter column."""

    matrix: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_spd(self.matrix, "regularization"))

    def to_full(self, m: int) -> FullReg:
        return FullReg(np.kron(np.eye(m), self.matrix), theta0=self.theta0)

    def to_columns(self, m: int) -> ColumnReg:
        return ColumnReg((self.matrix,) * m, theta0=self.theta0)

    def check(self, dims: ProblemDims):
        if self.matrix.shape[0] != dims.n:
            raise DimensionError(
                f"shared regularization has size {self.matrix.shape[0]}, expected {dims.n}")


Reg = Union[FullReg, ColumnReg, SharedReg]
