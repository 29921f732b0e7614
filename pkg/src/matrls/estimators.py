"""Batch and recursive least squares for a matrix of parameters.

Three families minimize the same regularized cost for ``y_k = phi_k @ theta``
under progressively stronger assumptions on the weights:

* vec-permutation: any SPD weight on ``vec`` of the residual. The problem is
  rewritten with the regressor ``kron(I_m, phi_k)`` and solved as one vector
  problem of size ``mn``.
* column-by-column: block-diagonal weights, one block per column. Each of the
  ``m`` columns is an independent vector problem of size ``n``.
* matrix update: the same block for every column. All columns share a single
  ``n x n`` covariance and the update acts on the whole ``n x m`` estimate.

Recursive steps are pure functions returning a new state. Each step can
propagate the covariance ``P`` directly through the matrix inversion lemma
(``UpdateForm.COVARIANCE``, cheaper when ``n > p``) or propagate ``P^-1``
(``UpdateForm.INFORMATION``, cheaper when ``p >= n``).
"""

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import cho_solve

from .errors import DimensionError, NotPositiveDefiniteError, VariantError
from .linalg import (
    cholesky,
    downdate_with_inverse_weight,
    spd_inverse,
    spd_solve,
    symmetrize,
    unvec,
    vec,
)
from .problem import (
    ColumnReg,
    FullReg,
    Measurement,
    ProblemDims,
    SharedReg,
    SharedWeight,
    infer_dims,
    weight_at,
)

__all__ = [
    "FAMILIES",
    "ColumnwiseState",
    "MatrixUpdateState",
    "UpdateForm",
    "VecPermState",
    "batch_estimate",
    "columnwise_batch",
    "columnwise_init",
    "columnwise_step",
    "estimate_of",
    "matrix_batch",
    "matrix_init",
    "matrix_step",
    "resolve_form",
    "run_recursive",
    "state_param_count",
    "vec_perm_batch",
    "vec_perm_init",
    "vec_perm_step",
    "vector_rls_step",
]


class UpdateForm(enum.Enum):
    INFORMATION = "information"
    COVARIANCE = "covariance"


def resolve_form(form, n: int, p: int) -> UpdateForm:
    """Pick the update form; ``None`` or ``"auto"`` chooses by dimensions."""
    if form is None or form == "auto":
        return UpdateForm.COVARIANCE if n > p else UpdateForm.INFORMATION
    return UpdateForm(form)


def _rls_update(p, theta, phi, y, gamma, gamma_inv, form, info=None):
    """One weighted RLS step on an ``n x c`` estimate with shared covariance.

    `gamma_inv` is a zero-argument callable so the weight is only inverted
    when the covariance form needs it. Returns ``(P, theta, information)``;
    the information matrix is ``None`` in covariance form.
    """
    if form is UpdateForm.COVARIANCE:
        p_new, gain = downdate_with_inverse_weight(p, phi, gamma_inv())
        return p_new, theta + gain @ (y - phi @ theta), None
    if info is None:
        info = spd_inverse(p, "covariance")
    info_new = symmetrize(info + phi.T @ gamma @ phi)
    factor = cholesky(info_new, "information matrix")
    p_new = symmetrize(cho_solve((factor, True), np.eye(info_new.shape[0])))
    gain_input = phi.T @ (gamma @ (y - phi @ theta))
    return p_new, theta + cho_solve((factor, True), gain_input), info_new


def vector_rls_step(p, theta, phi, y, gamma, form=None):
    """Standard vector RLS step for ``y = phi @ theta`` with weight `gamma`.

    Returns the new ``(P, theta)``; `theta` is an ``n x 1`` column.
    """
    p = np.asarray(p, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64).reshape(-1, 1)
    phi = np.atleast_2d(np.asarray(phi, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    gamma = np.atleast_2d(np.asarray(gamma, dtype=np.float64))
    if phi.shape != (y.shape[0], p.shape[0]) or theta.shape[0] != p.shape[0]:
        raise DimensionError(
            f"incompatible shapes p{p.shape}, theta{theta.shape}, "
            f"phi{phi.shape}, y{y.shape}")
    form = resolve_form(form, p.shape[0], phi.shape[0])
    p_new, theta_new, _ = _rls_update(
        p, theta, phi, y, gamma, lambda: spd_inverse(gamma, "weight"), form)
    return p_new, theta_new


# -- states -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VecPermState:
    """Vec-permutation state: ``mn x mn`` covariance and stacked estimate."""

    pbar: NDArray[np.float64]
    thetabar: NDArray[np.float64]
    dims: ProblemDims
    step: int = 0
    info: Optional[NDArray[np.float64]] = None

    @property
    def theta(self) -> NDArray[np.float64]:
        return unvec(self.thetabar, self.dims.n, self.dims.m)

    def param_count(self) -> int:
        return self.pbar.size + self.thetabar.size


@dataclass(frozen=True, eq=False)
class ColumnwiseState:
    """Column-by-column state: one ``n x n`` covariance per parameter column."""

    p: tuple
    theta: NDArray[np.float64]
    dims: ProblemDims
    step: int = 0
    info: Optional[tuple] = None

    @property
    def columns(self):
        return tuple(self.theta[:, j:j + 1] for j in range(self.dims.m))

    def param_count(self) -> int:
        return sum(pj.size for pj in self.p) + self.theta.size


@dataclass(frozen=True, eq=False)
class MatrixUpdateState:
    """Matrix-update state: a single ``n x n`` covariance and ``n x m`` estimate."""

    p: NDArray[np.float64]
    theta: NDArray[np.float64]
    dims: ProblemDims
    step: int = 0
    info: Optional[NDArray[np.float64]] = None

    def param_count(self) -> int:
        return self.p.size + self.theta.size


def state_param_count(state) -> int:
    """Number of reals a state keeps in memory (covariances plus estimate).

    ``n^2 m^2 + nm`` for vec-permutation, ``n^2 m + nm`` for column-by-column
    and ``n^2 + nm`` for matrix update. Cached information matrices are not
    counted.
    """
    return state.param_count()


def _check_meas(meas, dims):
    if not isinstance(meas, Measurement):
        meas = Measurement(*meas)
    if meas.dims != dims:
        raise DimensionError(f"measurement has dims {meas.dims}, state has {dims}")
    return meas


def _column_reg(reg, m):
    if isinstance(reg, (FullReg, ColumnReg, SharedReg)):
        return reg.to_columns(m)
    raise VariantError(f"unsupported regularization {type(reg).__name__}")


def _shared_reg(reg):
    if not isinstance(reg, SharedReg):
        raise VariantError(
            f"matrix update needs SharedReg, got {type(reg).__name__}")
    return reg


def _shared_weight(weight):
    if not isinstance(weight, SharedWeight):
        raise VariantError(
            f"matrix update needs SharedWeight, got {type(weight).__name__}")
    return weight


# -- vec-permutation ------------------------------------------------------------

def vec_perm_init(reg, dims: ProblemDims) -> VecPermState:
    """Initial state ``P0 = Rbar^-1``, ``thetabar0 = vec(theta0)``."""
    full = reg.to_full(dims.m)
    full.check(dims)
    return VecPermState(
        pbar=spd_inverse(full.matrix, "regularization"),
        thetabar=vec(reg.prior(dims.n, dims.m)),
        dims=dims,
        info=full.matrix.copy(),
    )


def vec_perm_step(state: VecPermState, meas, weight, form=None) -> VecPermState:
    dims = state.dims
    meas = _check_meas(meas, dims)
    w = weight.to_full(dims.m)
    w.check(dims)
    form = resolve_form(form, dims.n, dims.p)
    phibar = np.kron(np.eye(dims.m), meas.phi)
    pbar, thetabar, info = _rls_update(
        state.pbar, state.thetabar, phibar, vec(meas.y), w.matrix,
        lambda: w.inverse, form, state.info)
    return VecPermState(pbar, thetabar, dims, state.step + 1, info)


def vec_perm_batch(data: Sequence[Measurement], reg, weights, dims=None):
    """Stacked minimizer ``vec(theta_{k+1}) = Abar_k^-1 bbar_k`` (``mn x 1``)."""
    dims = infer_dims(data, dims)
    m = dims.m
    full_reg = reg.to_full(m)
    full_reg.check(dims)
    theta0 = vec(reg.prior(dims.n, m))
    if not data:
        return theta0
    a = full_reg.matrix.copy()
    b = full_reg.matrix @ theta0
    eye_m = np.eye(m)
    for i, meas in enumerate(data):
        w = weight_at(weights, i).to_full(m)
        w.check(dims)
        phibar = np.kron(eye_m, meas.phi)
        wphi = w.matrix @ phibar
        a += phibar.T @ wphi
        b += wphi.T @ vec(meas.y)
    return spd_solve(symmetrize(a), b, "information matrix")


# -- column-by-column -----------------------------------------------------------

def columnwise_init(reg, dims: ProblemDims) -> ColumnwiseState:
    """Initial state ``P_j0 = R_j^-1`` and ``theta0`` for every column."""
    cols = _column_reg(reg, dims.m)
    cols.check(dims)
    return ColumnwiseState(
        p=tuple(spd_inverse(r, "regularization") for r in cols.blocks),
        theta=reg.prior(dims.n, dims.m),
        dims=dims,
        info=tuple(r.copy() for r in cols.blocks),
    )


def columnwise_step(state: ColumnwiseState, meas, weight, form=None) -> ColumnwiseState:
    dims = state.dims
    meas = _check_meas(meas, dims)
    w = weight.to_columns(dims.m)
    w.check(dims)
    form = resolve_form(form, dims.n, dims.p)
    infos = state.info if state.info is not None else (None,) * dims.m
    ps, cols, new_infos = [], [], []
    for j in range(dims.m):
        try:
            pj, tj, ij = _rls_update(
                state.p[j], state.theta[:, j:j + 1], meas.phi, meas.y[:, j:j + 1],
                w.blocks[j], lambda j=j: w.inverses[j], form, infos[j])
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(
                f"column {j}: {exc}", pivot=exc.pivot, column=j) from exc
        ps.append(pj)
        cols.append(tj)
        new_infos.append(ij)
    info = None if form is UpdateForm.COVARIANCE else tuple(new_infos)
    return ColumnwiseState(tuple(ps), np.hstack(cols), dims, state.step + 1, info)


def columnwise_batch(data: Sequence[Measurement], reg, weights, dims=None):
    """Minimizer assembled column by column, ``theta_j = A_j^-1 b_j`` (``n x m``)."""
    dims = infer_dims(data, dims)
    cols_reg = _column_reg(reg, dims.m)
    cols_reg.check(dims)
    theta0 = reg.prior(dims.n, dims.m)
    if not data:
        return theta0
    a = [r.copy() for r in cols_reg.blocks]
    b = [r @ theta0[:, j:j + 1] for j, r in enumerate(cols_reg.blocks)]
    for i, meas in enumerate(data):
        w = weight_at(weights, i).to_columns(dims.m)
        w.check(dims)
        for j, gj in enumerate(w.blocks):
            gphi = gj @ meas.phi
            a[j] += meas.phi.T @ gphi
            b[j] += gphi.T @ meas.y[:, j:j + 1]
    out = []
    for j in range(dims.m):
        try:
            out.append(spd_solve(symmetrize(a[j]), b[j], "information matrix"))
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(
                f"column {j}: {exc}", pivot=exc.pivot, column=j) from exc
    return np.hstack(out)


# -- matrix update --------------------------------------------------------------

def matrix_init(reg, dims: ProblemDims) -> MatrixUpdateState:
    """Initial state ``P0 = R^-1`` and ``theta0``."""
    reg = _shared_reg(reg)
    reg.check(dims)
    return MatrixUpdateState(
        p=spd_inverse(reg.matrix, "regularization"),
        theta=reg.prior(dims.n, dims.m),
        dims=dims,
        info=reg.matrix.copy(),
    )


def matrix_step(state: MatrixUpdateState, meas, weight, form=None) -> MatrixUpdateState:
    dims = state.dims
    meas = _check_meas(meas, dims)
    w = _shared_weight(weight)
    w.check(dims)
    form = resolve_form(form, dims.n, dims.p)
    p, theta, info = _rls_update(
        state.p, state.theta, meas.phi, meas.y, w.matrix, lambda: w.inverse,
        form, state.info)
    return MatrixUpdateState(p, theta, dims, state.step + 1, info)


def matrix_batch(data: Sequence[Measurement], reg, weights, dims=None):
    """Minimizer ``theta_{k+1} = A_k^-1 b_k`` from one ``n x n`` solve."""
    dims = infer_dims(data, dims)
    reg = _shared_reg(reg)
    reg.check(dims)
    theta0 = reg.prior(dims.n, dims.m)
    if not data:
        return theta0
    a = reg.matrix.copy()
    b = reg.matrix @ theta0
    for i, meas in enumerate(data):
        w = _shared_weight(weight_at(weights, i))
        w.check(dims)
        gphi = w.matrix @ meas.phi
        a += meas.phi.T @ gphi
        b += gphi.T @ meas.y
    return spd_solve(symmetrize(a), b, "information matrix")


# -- driver ---------------------------------------------------------------------

FAMILIES = {
    "vecperm": (vec_perm_init, vec_perm_step, vec_perm_batch),
    "columnwise": (columnwise_init, columnwise_step, columnwise_batch),
    "matrix": (matrix_init, matrix_step, matrix_batch),
}


def estimate_of(state) -> NDArray[np.float64]:
    """The ``n x m`` parameter estimate held by any family's state."""
    return state.theta


def batch_estimate(family: str, data, reg, weights, dims=None):
    """Batch minimizer as an ``n x m`` matrix for the named family."""
    dims = infer_dims(data, dims)
    out = FAMILIES[family][2](data, reg, weights, dims)
    if family == "vecperm":
        return unvec(out, dims.n, dims.m)
    return out


def run_recursive(family: str, data, reg, weights, form=None, dims=None, state=None):
    """Run the named family over `data`, returning every state.

    The returned list starts with the initial state, so entry ``k`` holds the
    estimate after ``k`` measurements.
    """
    dims = infer_dims(data, dims)
    init, step, _ = FAMILIES[family]
    if state is None:
        state = init(reg, dims)
    states = [state]
    for i, meas in enumerate(data):
        state = step(state, meas, weight_at(weights, i), form)
        states.append(state)
    return states
