"""
Weight structure, update forms and checkpoints
==============================================

The vec-permutation family accepts any SPD weight on ``vec`` of the residual,
including weights that couple columns. Per-column weights are a block-diagonal
special case, and the column-by-column family then gives the same answer.

Every recursive family can propagate the covariance (cheap when n > p) or the
information matrix (cheap when p >= n). Both forms give the same trajectory.
States are plain values, so a run can be checkpointed and resumed.
"""

import os
import tempfile

import numpy as np

from matrls import ColumnReg, ColumnWeight, ProblemDims, VariantError, run_recursive
from matrls.experiments import random_instance
from matrls.io import checkpoint_load, checkpoint_save

dims = ProblemDims(p=2, n=5, m=3)
data, reg, weights, theta = random_instance(seed=1, trial=0, dims=dims, steps=60,
                                            weight_mode="per_column")

cw = run_recursive("columnwise", data, reg, weights)[-1].theta
vp = run_recursive("vecperm", data, reg.to_full(dims.m),
                   [w.to_full(dims.m) for w in weights])[-1].theta
print("columnwise vs vec-permutation:", np.linalg.norm(cw - vp))

# a dense weight couples the columns; only vec-permutation can use it
full_data, full_reg, full_weights, _ = random_instance(1, 0, dims, 60, "full")
try:
    run_recursive("columnwise", full_data, full_reg, full_weights)
except VariantError as exc:
    print("columnwise refuses a dense weight:", exc)

for family in ("vecperm", "columnwise"):
    a = run_recursive(family, data, reg, weights, form="information")
    b = run_recursive(family, data, reg, weights, form="covariance")
    gap = max(np.linalg.norm(x.theta - y.theta) for x, y in zip(a, b))
    print(f"{family}: information vs covariance form, max gap {gap:.1e}")

# stop after 30 steps, save, resume from the file
states = run_recursive("columnwise", data, reg, weights)
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "state.json")
    checkpoint_save(path, states[30])
    resumed = checkpoint_load(path, "columnwise")
rest = run_recursive("columnwise", data[30:], reg, weights[30:], state=resumed)
print("resumed run matches:", np.linalg.norm(rest[-1].theta - states[-1].theta) == 0.0)

# equal blocks collapse to a single shared information matrix
same = ColumnReg([np.eye(5)] * 3), ColumnWeight([np.eye(2)] * 3)
print("shared blocks, final estimate error:",
      np.linalg.norm(run_recursive("columnwise", data, *same)[-1].theta - theta))
