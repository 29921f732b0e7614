"""Persistent excitation diagnostics and the asymptotic error law.

For noiseless data ``y_i = phi_i @ theta`` the matrix-update estimate after
``k`` samples satisfies exactly

    theta_k - theta = (R + sum_i phi_i^T G_i phi_i)^-1 R (theta0 - theta),

so ``k (theta_k - theta) = (R / k + C_k)^-1 R (theta0 - theta)`` with ``C_k``
the running average of the weighted Grammians. When the regressors are
persistently exciting, ``C_k -> C`` positive definite and
``k (theta_k - theta) -> C^-1 R (theta0 - theta)``.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionError
from .linalg import spd_solve, symmetrize

__all__ = [
    "PeEstimate",
    "is_pe",
    "pe_accumulate",
    "pe_empty",
    "pe_merge",
    "theorem1_exact_residual",
    "theorem1_limit_prediction",
]


@dataclass(frozen=True, eq=False)
class PeEstimate:
    """Running average ``c = (1/k) sum phi_i^T gamma_i phi_i`` over ``k`` samples."""

    c: NDArray[np.float64]
    k: int
    min_eig: float

    @classmethod
    def from_average(cls, c, k):
        c = symmetrize(np.asarray(c, dtype=np.float64))
        return cls(c, int(k), float(np.linalg.eigvalsh(c)[0]))


def pe_empty(n: int) -> PeEstimate:
    return PeEstimate(np.zeros((n, n)), 0, 0.0)


def pe_accumulate(est: PeEstimate, phi, gamma=None) -> PeEstimate:
    """Fold one regressor into the running average (``gamma`` defaults to identity)."""
    phi = np.atleast_2d(np.asarray(phi, dtype=np.float64))
    if phi.shape[1] != est.c.shape[0]:
        raise DimensionError(f"phi has {phi.shape[1]} columns, expected {est.c.shape[0]}")
    gram = phi.T @ phi if gamma is None else phi.T @ np.asarray(gamma) @ phi
    k = est.k + 1
    return PeEstimate.from_average(est.c + (gram - est.c) / k, k)


def pe_merge(a: PeEstimate, b: PeEstimate) -> PeEstimate:
    """Combine estimates accumulated on disjoint samples (``k``-weighted average)."""
    k = a.k + b.k
    if k == 0:
        return a
    return PeEstimate.from_average((a.k * a.c + b.k * b.c) / k, k)


def is_pe(est: PeEstimate, eps: float) -> bool:
    """Whether the smallest eigenvalue of the running average exceeds `eps`.

    Excitation is a limit property, so any finite-sample threshold is a
    judgement call. For i.i.d. standard normal ``p x n`` regressors with unit
    weight the average tends to ``p * I``, and ``eps = p / 2`` is a reasonable
    rule of thumb.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    return est.min_eig > eps


def theorem1_limit_prediction(reg, theta_true, c) -> NDArray[np.float64]:
    """Limit of ``k (theta_k - theta)``: ``C^-1 R (theta0 - theta)``."""
    theta_true = np.atleast_2d(np.asarray(theta_true, dtype=np.float64))
    theta0 = reg.prior(*theta_true.shape)
    return spd_solve(c, reg.matrix @ (theta0 - theta_true), "excitation matrix")


def theorem1_exact_residual(reg, theta_true, est: PeEstimate, theta_k, k: int) -> float:
    """Normalized mismatch of the finite-``k`` identity for noiseless data.

    Returns ``||k (theta_k - theta) - (R/k + C_k)^-1 R (theta0 - theta)||_F``
    divided by ``1 + ||R (theta0 - theta)||_F``; `est` must hold ``C_k``
    accumulated over exactly the ``k`` samples that produced `theta_k`.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if est.k != k:
        raise ValueError(f"excitation estimate has {est.k} samples, expected {k}")
    theta_true = np.atleast_2d(np.asarray(theta_true, dtype=np.float64))
    theta0 = reg.prior(*theta_true.shape)
    rhs = reg.matrix @ (theta0 - theta_true)
    predicted = spd_solve(symmetrize(reg.matrix / k + est.c), rhs, "excitation matrix")
    observed = k * (np.asarray(theta_k) - theta_true)
    return float(np.linalg.norm(observed - predicted)
                 / (1.0 + np.linalg.norm(rhs)))
