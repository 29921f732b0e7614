"""
Online identification of a MIMO ARMA plant
==========================================

A stable plant with 4 outputs, 2 inputs and order 2 is driven by white noise.
Both recursive identifiers minimize the same cost; the matrix form keeps a
``d x d`` covariance instead of a ``pd x pd`` one and does a rank-one update,
so it is several times faster per step with identical estimates.
"""

import time

import numpy as np

from matrls.arma import (
    arma_matrix_init,
    arma_vecperm_init,
    ident_step_matrix,
    ident_step_vecperm,
    random_stable_arma,
    regressor_dim,
    simulate,
)
from matrls.rng import Purpose, stream

p, mu, nhat, steps = 4, 2, 2, 500
d = regressor_dim(nhat, p, mu)
model = random_stable_arma(stream(0, 0, Purpose.PLANT), p, mu, nhat)
inputs = stream(0, 0, Purpose.INPUTS).standard_normal((steps, mu))
outputs, regressors = simulate(model, inputs)

# a weak prior (large P0) so the regularization bias is negligible
p0 = 1e8 * np.eye(d)
vp = arma_vecperm_init(p, d, p0=p0)
mx = arma_matrix_init(p, d, p0=p0)
t_vp = t_mx = 0
gap = 0.0
for k, (phi, y) in enumerate(zip(regressors, outputs), start=1):
    t0 = time.perf_counter_ns()
    vp = ident_step_vecperm(vp, phi, y)
    t1 = time.perf_counter_ns()
    mx = ident_step_matrix(mx, phi, y)
    t_vp += t1 - t0
    t_mx += time.perf_counter_ns() - t1
    gap = max(gap, np.linalg.norm(mx.theta - vp.theta) / np.linalg.norm(vp.theta))
    if k in (10, d, d + 1, 50, 500):
        print(f"k={k:3d}  coefficient error {np.linalg.norm(mx.theta - model.theta):.2e}")

print(f"largest relative gap between the identifiers: {gap:.1e}")
print(f"mean step time: vec-permutation {t_vp / steps / 1e3:.1f} us, "
      f"matrix {t_mx / steps / 1e3:.1f} us")
print(f"stored reals: {vp.param_count()} vs {mx.param_count()}")
