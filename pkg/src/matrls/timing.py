"""Wall-clock timing with bootstrap confidence intervals."""

import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import bootstrap

__all__ = ["TimingSummary", "loglog_slope", "summarize", "time_call"]


def time_call(fn, repeats: int, warmup: int = 1):
    """Run `fn` ``warmup + repeats`` times; return the last `repeats` durations in ns."""
    for _ in range(warmup):
        fn()
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        out.append(time.perf_counter_ns() - t0)
    return out


@dataclass(frozen=True)
class TimingSummary:
    median_ns: float
    mean_ns: float
    ci_low_ns: float
    ci_high_ns: float
    samples: int


def summarize(samples_ns, seed: int = 0, resamples: int = 1000,
              confidence: float = 0.95) -> TimingSummary:
    """Median and mean with a percentile-bootstrap interval for the median."""
    x = np.asarray(samples_ns, dtype=np.float64)
    median = float(np.median(x))
    if x.size < 2 or np.all(x == x[0]):
        return TimingSummary(median, float(x.mean()), median, median, int(x.size))
    res = bootstrap((x,), np.median, n_resamples=resamples, confidence_level=confidence,
                    method="percentile", vectorized=True,
                    rng=np.random.Generator(np.random.Philox(seed)))
    ci = res.confidence_interval
    return TimingSummary(median, float(x.mean()), float(ci.low), float(ci.high), int(x.size))


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
