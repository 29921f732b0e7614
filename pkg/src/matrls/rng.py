"""Seeded, counter-based random streams for the experiments.

Every stream is a Philox-4x64 generator (counter-based, 10 rounds) keyed by
``(seed, trial << 32 | purpose)``, so draws for one ``(trial, purpose)`` pair
never depend on how many draws another pair made. Uniforms on ``[0, 1)`` are
``(x >> 11) * 2**-53`` for the raw 64-bit outputs ``x``; Gaussians come from
the Box-Muller transform of consecutive uniform pairs ``(u1, u2)``:

    z0 = sqrt(-2 ln(1 - u1)) cos(2 pi u2)
    z1 = sqrt(-2 ln(1 - u1)) sin(2 pi u2)

filled in C order. Both transforms are spelled out here, rather than taken
from numpy's ziggurat sampler, so another implementation can reproduce them.
"""

import enum

import numpy as np

__all__ = ["Purpose", "Stream", "stream"]

_MASK32 = (1 << 32) - 1


class Purpose(enum.IntEnum):
    PARAMETERS = 1
    REGRESSORS = 2
    NOISE = 3
    WEIGHTS = 4
    INPUTS = 5
    PLANT = 6
    DIMENSIONS = 7
    BOOTSTRAP = 8


class Stream:
    """One independent random stream."""

    def __init__(self, seed: int, trial: int = 0, purpose: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        key = np.array([seed, ((int(trial) & _MASK32) << 32) | (int(purpose) & _MASK32)],
                       dtype=np.uint64)
        self._bits = np.random.Philox(key=key)

    def uniform(self, shape=()) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        raw = self._bits.random_raw(count)
        return ((raw >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(shape)

    def standard_normal(self, shape=()) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        pairs = (count + 1) // 2
        u = self.uniform((pairs, 2))
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)]).ravel()
        return z[:count].reshape(shape)

    def integers(self, low: int, high: int, shape=()) -> np.ndarray:
        """Integers in ``[low, high)`` by flooring scaled uniforms."""
        return (low + np.floor(self.uniform(shape) * (high - low))).astype(np.int64)

    def multivariate_normal(self, cov, size: int) -> np.ndarray:
        """``size`` rows drawn from ``N(0, cov)`` via the lower Cholesky factor."""
        chol = np.linalg.cholesky(np.asarray(cov, dtype=np.float64))
        return self.standard_normal((size, chol.shape[0])) @ chol.T


def stream(seed: int, trial: int, purpose: Purpose) -> Stream:
    return Stream(seed, trial, purpose)
