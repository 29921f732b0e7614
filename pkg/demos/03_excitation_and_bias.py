"""
Persistent excitation and the prior's footprint
===============================================

With noiseless data the regularized estimate is still biased towards the
prior, but the bias decays like 1/k. When the regressors are persistently
exciting, ``k (theta_k - theta)`` converges to ``C^-1 R (theta0 - theta)``,
where ``C`` is the limiting average of ``phi_i^T Gamma_i phi_i``.
"""

import numpy as np

from matrls import Measurement, ProblemDims, SharedReg, SharedWeight, matrix_init, matrix_step
from matrls.convergence import (
    is_pe,
    pe_accumulate,
    pe_empty,
    theorem1_exact_residual,
    theorem1_limit_prediction,
)

rng = np.random.default_rng(3)
p, n, m = 3, 4, 2
theta = rng.standard_normal((n, m))
theta0 = np.zeros((n, m))
reg = SharedReg(2.0 * np.eye(n), theta0=theta0)
weight = SharedWeight(np.eye(p))

state = matrix_init(reg, ProblemDims(p, n, m))
est = pe_empty(n)
limit = theorem1_limit_prediction(reg, theta, p * np.eye(n))
for k in range(1, 20_001):
    phi = rng.standard_normal((p, n))
    state = matrix_step(state, Measurement(phi, phi @ theta), weight)
    est = pe_accumulate(est, phi)
    if k in (10, 100, 1000, 10_000, 20_000):
        scaled = k * (state.theta - theta)
        print(f"k={k:6d}  min eig(C_k)={est.min_eig:.3f}  "
              f"finite-k residual={theorem1_exact_residual(reg, theta, est, state.theta, k):.1e}  "
              f"gap to limit={np.linalg.norm(scaled - limit) / np.linalg.norm(limit):.4f}")

print("excited (eps = p/2):", is_pe(est, p / 2))

# a single repeated direction is never exciting
flat = pe_empty(n)
for _ in range(100):
    flat = pe_accumulate(flat, np.ones((1, n)))
print("repeated rank-one regressor excited:", is_pe(flat, 1e-6))
