"""Reference evaluation of the regularized least squares cost.

Deliberately naive: every routine here works from the definitions with dense
numpy calls and shares no update code with :mod:`matrls.estimators`, so
agreement between the two is evidence rather than tautology.
"""

import numpy as np
from scipy.linalg import block_diag

from .problem import (
    ColumnReg,
    ColumnWeight,
    FullReg,
    FullWeight,
    SharedReg,
    SharedWeight,
    weight_at,
)

__all__ = [
    "brute_force_minimizer",
    "eval_cost",
    "eval_cost_columnwise",
    "eval_cost_full",
    "eval_cost_trace",
    "grad_norm_fd",
    "probe_local_optimality",
]


def _colvec(x):
    return np.asarray(x, dtype=np.float64).reshape(-1, 1, order="F")


def _full_weight_matrix(w, m):
    if isinstance(w, FullWeight):
        return w.matrix
    if isinstance(w, ColumnWeight):
        return block_diag(*w.blocks)
    return np.kron(np.eye(m), w.matrix)


def _full_reg_matrix(reg, m):
    if isinstance(reg, FullReg):
        return reg.matrix
    if isinstance(reg, ColumnReg):
        return block_diag(*reg.blocks)
    return np.kron(np.eye(m), reg.matrix)


def eval_cost_full(thetahat, data, reg, weights) -> float:
    """Cost with full ``vec`` weights: sum of weighted residual quadratics plus prior."""
    thetahat = np.atleast_2d(np.asarray(thetahat, dtype=np.float64))
    n, m = thetahat.shape
    d = _colvec(thetahat - reg.prior(n, m))
    total = (d.T @ _full_reg_matrix(reg, m) @ d).item()
    for i, meas in enumerate(data):
        r = _colvec(meas.y - meas.phi @ thetahat)
        total += (r.T @ _full_weight_matrix(weight_at(weights, i), m) @ r).item()
    return total


def eval_cost_columnwise(thetahat, data, reg, weights) -> float:
    """Sum over columns of the independent per-column costs."""
    thetahat = np.atleast_2d(np.asarray(thetahat, dtype=np.float64))
    n, m = thetahat.shape
    theta0 = reg.prior(n, m)
    reg_blocks = reg.blocks if isinstance(reg, ColumnReg) else (reg.matrix,) * m
    total = 0.0
    for j in range(m):
        d = thetahat[:, j] - theta0[:, j]
        total += d @ reg_blocks[j] @ d
        for i, meas in enumerate(data):
            w = weight_at(weights, i)
            g = w.blocks[j] if isinstance(w, ColumnWeight) else w.matrix
            r = meas.y[:, j] - meas.phi @ thetahat[:, j]
            total += r @ g @ r
    return float(total)


def eval_cost_trace(thetahat, data, reg, weights) -> float:
    """Trace form for a shared weight ``Gamma_i`` and shared regularization ``R``."""
    thetahat = np.atleast_2d(np.asarray(thetahat, dtype=np.float64))
    n, m = thetahat.shape
    d = thetahat - reg.prior(n, m)
    acc = d.T @ reg.matrix @ d
    for i, meas in enumerate(data):
        r = meas.y - meas.phi @ thetahat
        acc = acc + r.T @ weight_at(weights, i).matrix @ r
    return float(np.trace(acc))


def eval_cost(thetahat, data, reg, weights) -> float:
    """Evaluate the cost in the form matching the weight and regularization variants."""
    first = weight_at(weights, 0) if len(data) else None
    if isinstance(reg, SharedReg) and (first is None or isinstance(first, SharedWeight)):
        return eval_cost_trace(thetahat, data, reg, weights)
    if isinstance(reg, (ColumnReg, SharedReg)) and (
            first is None or isinstance(first, (ColumnWeight, SharedWeight))):
        return eval_cost_columnwise(thetahat, data, reg, weights)
    return eval_cost_full(thetahat, data, reg, weights)


def brute_force_minimizer(data, reg, weights, n=None, m=None):
    """Minimizer from the full ``mn x mn`` Kronecker normal equations.

    Every variant is first embedded into full weights. With no data the
    minimizer is the prior ``theta0``, which then needs `n` and `m` unless the
    regularization carries ``theta0`` explicitly.
    """
    if len(data):
        n = data[0].phi.shape[1]
        m = data[0].y.shape[1]
    elif n is None or m is None:
        n, m = np.asarray(reg.theta0).shape
    if not len(data):
        return reg.prior(n, m)
    rbar = _full_reg_matrix(reg, m)
    theta0 = _colvec(reg.prior(n, m))
    a = rbar.copy()
    b = rbar @ theta0
    for i, meas in enumerate(data):
        phibar = np.kron(np.eye(m), meas.phi)
        gbar = _full_weight_matrix(weight_at(weights, i), m)
        a += phibar.T @ gbar @ phibar
        b += phibar.T @ gbar @ _colvec(meas.y)
    return np.linalg.solve(a, b).reshape(n, m, order="F")


def grad_norm_fd(thetahat, data, reg, weights, h=1e-5) -> float:
    """Central-difference gradient norm of the matching cost form.

    Entry ``(i, j)`` is perturbed by ``h * (1 + |thetahat[i, j]|)``.
    """
    thetahat = np.atleast_2d(np.asarray(thetahat, dtype=np.float64))
    if h <= 0:
        raise ValueError("h must be positive")
    grad = np.empty_like(thetahat)
    for idx in np.ndindex(*thetahat.shape):
        step = h * (1.0 + abs(thetahat[idx]))
        up = thetahat.copy()
        down = thetahat.copy()
        up[idx] += step
        down[idx] -= step
        grad[idx] = (eval_cost(up, data, reg, weights)
                     - eval_cost(down, data, reg, weights)) / (2.0 * step)
    return float(np.linalg.norm(grad))


def probe_local_optimality(thetahat, data, reg, weights, rng, probes=100, scale=1e-3):
    """Smallest cost increase over random perturbations of Frobenius norm `scale`.

    Returns ``min_k J(thetahat + delta_k) - J(thetahat)``; a minimizer gives a
    non-negative value.
    """
    thetahat = np.atleast_2d(np.asarray(thetahat, dtype=np.float64))
    base = eval_cost(thetahat, data, reg, weights)
    worst = np.inf
    for _ in range(probes):
        delta = rng.standard_normal(thetahat.shape)
        delta *= scale / np.linalg.norm(delta)
        worst = min(worst, eval_cost(thetahat + delta, data, reg, weights) - base)
    return worst
