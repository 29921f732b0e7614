"""Dense linear algebra shared by the estimators.

Matrices are plain ``float64`` numpy arrays with two dimensions; column
vectors have shape ``(n, 1)``. Nothing here forms an explicit inverse unless
the inverse is the quantity asked for.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpotrf

from .errors import DimensionError, NotPositiveDefiniteError

__all__ = [
    "as_matrix",
    "check_spd",
    "cholesky",
    "is_spd",
    "kron",
    "spd_inverse",
    "spd_solve",
    "symmetrize",
    "unvec",
    "vec",
    "woodbury_downdate",
]

SYMMETRY_RTOL = 1e-12
PIVOT_RTOL = 1e-13


def as_matrix(x: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Return `x` as a finite 2-D float64 array.

    Scalars become ``1 x 1`` and 1-D input becomes a column vector.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise DimensionError(f"{name} must have positive dimensions, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def vec(x: ArrayLike) -> NDArray[np.float64]:
    """Stack the columns of `x` into a single column vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x.reshape(-1, 1).copy()
    return x.reshape(-1, 1, order="F").copy()


def unvec(v: ArrayLike, rows: int, cols: int) -> NDArray[np.float64]:
    """Inverse of :func:`vec`: reshape a column vector into ``rows x cols``."""
    v = np.asarray(v, dtype=np.float64)
    if v.size != rows * cols or (v.ndim == 2 and v.shape[1] != 1):
        raise DimensionError(
            f"cannot unvec array of shape {v.shape} into {rows}x{cols}"
        )
    return v.reshape(rows, cols, order="F").copy()


def kron(a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """Dense Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(np.atleast_2d(np.asarray(a, dtype=np.float64)),
                   np.atleast_2d(np.asarray(b, dtype=np.float64)))


def symmetrize(a: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (a + a.T)


def cholesky(a: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Lower Cholesky factor of `a`.

    A pivot counts as non-positive when ``L[i, i]**2 <= 1e-13 * trace(a) / dim``.

    Raises
    ------
    NotPositiveDefiniteError
        Naming the zero-based index of the first failing pivot.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    c, info = dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite (pivot {info - 1})", pivot=info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    pivots = np.diag(c) ** 2
    threshold = PIVOT_RTOL * np.trace(a) / a.shape[0]
    bad = np.flatnonzero(pivots <= threshold)
    if bad.size:
        raise NotPositiveDefiniteError(
            f"{name} is not positive definite (pivot {bad[0]})", pivot=int(bad[0]))
    return c


def check_spd(a: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Validate `a` as symmetric positive definite and return it as an array."""
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    tol = SYMMETRY_RTOL * (1.0 + np.max(np.abs(a)))
    if np.max(np.abs(a - a.T)) > tol:
        raise NotPositiveDefiniteError(f"{name} is not symmetric")
    cholesky(a, name)
    return a


def is_spd(a: ArrayLike) -> bool:
    try:
        check_spd(a)
    except (NotPositiveDefiniteError, DimensionError, ValueError):
        return False
    return True


def spd_solve(a: ArrayLike, b: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Solve ``a @ x = b`` for symmetric positive definite `a` via Cholesky."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != a.shape[0]:
        raise DimensionError(
            f"{name} has dimension {a.shape[0]} but right-hand side has {b.shape[0]} rows")
    return cho_solve((cholesky(a, name), True), b)


def spd_inverse(a: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Explicit inverse of an SPD matrix, symmetrized."""
    a = np.asarray(a, dtype=np.float64)
    return symmetrize(spd_solve(a, np.eye(a.shape[0]), name))


def woodbury_downdate(p: ArrayLike, phi: ArrayLike, gamma: ArrayLike) -> NDArray[np.float64]:
    """Covariance after absorbing regressor `phi` with weight `gamma`.

    Computes ``p - p phi^T (gamma^-1 + phi p phi^T)^-1 phi p``, which equals
    ``(p^-1 + phi^T gamma phi)^-1`` by the matrix inversion lemma, and
    re-symmetrizes the result.
    """
    p = np.asarray(p, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    if phi.shape[1] != p.shape[0] or gamma.shape[0] != phi.shape[0]:
        raise DimensionError(
            f"incompatible shapes p{p.shape}, phi{phi.shape}, gamma{gamma.shape}")
    return downdate_with_inverse_weight(p, phi, spd_inverse(gamma, "weight"))[0]


def downdate_with_inverse_weight(p, phi, gamma_inv):
    """Matrix inversion lemma downdate taking ``gamma^-1`` directly.

    Returns ``(p_new, gain)`` with ``gain = p phi^T (gamma^-1 + phi p phi^T)^-1``,
    which equals ``p_new phi^T gamma``. Callers should apply the gain rather
    than ``p_new phi^T gamma``: when `p` is large ``p_new`` carries cancellation
    error that the gain does not.
    """
    pht = p @ phi.T
    inner = gamma_inv + phi @ pht
    x = spd_solve(inner, pht.T, "innovation matrix")
    return symmetrize(p - pht @ x), x.T
