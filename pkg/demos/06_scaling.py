"""
How the cost grows with the number of parameter columns
=======================================================

Vec-permutation works with ``mn x mn`` matrices, so its time per step grows
like m^3 relative to the matrix update, whose ``n x n`` covariance does not
depend on m. Absolute timings depend on the machine; the ratio's growth
does not.
"""

from matrls.experiments import RunConfig, run_scaling, scaling_slope

config = RunConfig(seed=0, p=10, n=50, m=(1, 2, 4, 8, 16), steps=100, trials=3)
rows = run_scaling(config)
for mode in ("batch", "recursive"):
    print(mode)
    med = {(r.method, r.m): r for r in rows if r.mode == mode}
    for m in config.m:
        cells = "  ".join(f"{f} {med[(f, m)].median_ns / 1e3:9.1f}us"
                          for f in ("vecperm", "columnwise", "matrix"))
        print(f"  m={m:2d}  {cells}  memory {med[('vecperm', m)].mem_params}"
              f"/{med[('matrix', m)].mem_params}")
    print(f"  log-log slope of the vec-permutation / matrix time ratio: "
          f"{scaling_slope(rows, mode, (2, 4, 8, 16)):.2f}")
