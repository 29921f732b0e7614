"""Online identification of MIMO ARMA models.

The model is

    y_k = -sum_{i=1}^{nhat} F_i y_{k-i} + sum_{i=0}^{nhat} G_i u_{k-i}

with ``p`` outputs and ``mu`` inputs. Stacking the coefficients as
``theta = [F_1 ... F_nhat G_0 ... G_nhat]`` (``p x d`` with
``d = nhat (mu + p) + mu``) gives ``y_k = theta @ phi_k`` where

    phi_k = [-y_{k-1}; ...; -y_{k-nhat}; u_k; ...; u_{k-nhat}].

Two recursive identifiers minimize the same unit-weight regularized cost:
the vec-permutation form works on ``vec(theta)`` with regressor
``kron(phi_k^T, I_p)`` and a ``pd x pd`` covariance, the matrix form keeps a
``d x d`` covariance and does a rank-one update. They coincide when the
initial covariance is ``kron(P0, I_p)``.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionError, NotPositiveDefiniteError
from .linalg import as_matrix, check_spd, downdate_with_inverse_weight, symmetrize, unvec, vec

__all__ = [
    "ArmaMatrixState",
    "ArmaModel",
    "ArmaRegressorBuffer",
    "ArmaVecPermState",
    "arma_matrix_init",
    "arma_simulate_step",
    "arma_vecperm_init",
    "build_regressor",
    "companion_radius",
    "ident_step_matrix",
    "ident_step_vecperm",
    "random_stable_arma",
    "regressor_dim",
    "simulate",
]


def regressor_dim(nhat: int, p: int, mu: int) -> int:
    return nhat * (mu + p) + mu


@dataclass(frozen=True, eq=False)
class ArmaModel:
    """Coefficients ``F_1..F_nhat`` (``p x p``) and ``G_0..G_nhat`` (``p x mu``)."""

    F: tuple
    G: tuple

    def __post_init__(self):
        F = tuple(as_matrix(f, "F") for f in self.F)
        G = tuple(as_matrix(g, "G") for g in self.G)
        if len(F) < 1 or len(G) != len(F) + 1:
            raise DimensionError(f"need nhat >= 1 F blocks and nhat + 1 G blocks, "
                                 f"got {len(F)} and {len(G)}")
        p = G[0].shape[0]
        if any(f.shape != (p, p) for f in F) or any(g.shape != G[0].shape for g in G):
            raise DimensionError("inconsistent coefficient shapes")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)

    @property
    def nhat(self) -> int:
        return len(self.F)

    @property
    def p(self) -> int:
        return self.G[0].shape[0]

    @property
    def mu(self) -> int:
        return self.G[0].shape[1]

    @property
    def theta(self) -> NDArray[np.float64]:
        """Stacked coefficients ``[F_1 ... F_nhat G_0 ... G_nhat]``."""
        return np.hstack(self.F + self.G)

    @classmethod
    def from_theta(cls, theta, nhat: int, mu: int) -> "ArmaModel":
        theta = as_matrix(theta, "theta")
        p = theta.shape[0]
        if theta.shape[1] != regressor_dim(nhat, p, mu):
            raise DimensionError(f"theta has {theta.shape[1]} columns, expected "
                                 f"{regressor_dim(nhat, p, mu)}")
        F = tuple(theta[:, i * p:(i + 1) * p] for i in range(nhat))
        off = nhat * p
        G = tuple(theta[:, off + i * mu:off + (i + 1) * mu] for i in range(nhat + 1))
        return cls(F, G)


def companion_radius(model: ArmaModel) -> float:
    """Spectral radius of the block companion matrix of the output recursion."""
    p, nhat = model.p, model.nhat
    comp = np.zeros((p * nhat, p * nhat))
    comp[:p, :] = -np.hstack(model.F)
    comp[p:, :-p] = np.eye(p * (nhat - 1))
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def random_stable_arma(rng, p: int, mu: int, nhat: int, radius: float = 0.95,
                       max_tries: int = 10_000) -> ArmaModel:
    """Sample Gaussian coefficients, rejecting models with companion radius >= `radius`."""
    scale = 1.0 / np.sqrt(p * nhat)
    for _ in range(max_tries):
        F = tuple(scale * rng.standard_normal((p, p)) for _ in range(nhat))
        G = tuple(rng.standard_normal((p, mu)) for _ in range(nhat + 1))
        model = ArmaModel(F, G)
        if companion_radius(model) < radius:
            return model
    raise RuntimeError("no stable model found; lower the coefficient scale")


@dataclass(frozen=True, eq=False)
class ArmaRegressorBuffer:
    """Sliding window of past outputs and inputs, newest first.

    `ys` holds ``y_{k-1} .. y_{k-nhat}`` and `us` holds ``u_{k-1} .. u_{k-nhat}``;
    slots before the first sample are zero.
    """

    ys: tuple
    us: tuple
    fill: int = 0

    @classmethod
    def empty(cls, p: int, mu: int, nhat: int) -> "ArmaRegressorBuffer":
        return cls(tuple(np.zeros((p, 1)) for _ in range(nhat)),
                   tuple(np.zeros((mu, 1)) for _ in range(nhat)))

    @property
    def nhat(self) -> int:
        return len(self.ys)

    @property
    def p(self) -> int:
        return self.ys[0].shape[0]

    @property
    def mu(self) -> int:
        return self.us[0].shape[0]

    @property
    def warm(self) -> bool:
        return self.fill >= self.nhat

    def push(self, y_k, u_k) -> "ArmaRegressorBuffer":
        y_k = np.asarray(y_k, dtype=np.float64).reshape(-1, 1)
        u_k = np.asarray(u_k, dtype=np.float64).reshape(-1, 1)
        return ArmaRegressorBuffer((y_k,) + self.ys[:-1], (u_k,) + self.us[:-1],
                                   self.fill + 1)


def build_regressor(buffer: ArmaRegressorBuffer, u_k) -> NDArray[np.float64]:
    """``phi_k`` as a ``d x 1`` column: negated past outputs then inputs, newest first."""
    u_k = np.asarray(u_k, dtype=np.float64).reshape(-1, 1)
    if u_k.shape[0] != buffer.mu:
        raise DimensionError(f"u_k has {u_k.shape[0]} entries, expected {buffer.mu}")
    return np.vstack([-y for y in buffer.ys] + [u_k] + list(buffer.us))


def arma_simulate_step(model: ArmaModel, buffer: ArmaRegressorBuffer, u_k):
    """Advance the plant one step; returns ``(y_k, new_buffer)``."""
    phi = build_regressor(buffer, u_k)
    y_k = model.theta @ phi
    return y_k, buffer.push(y_k, u_k)


def simulate(model: ArmaModel, inputs):
    """Run the plant from rest over `inputs` (``N x mu``).

    Returns ``(outputs, regressors)`` as lists of ``p x 1`` and ``d x 1`` columns.
    """
    buffer = ArmaRegressorBuffer.empty(model.p, model.mu, model.nhat)
    outputs, regressors = [], []
    for u_k in inputs:
        regressors.append(build_regressor(buffer, u_k))
        y_k, buffer = arma_simulate_step(model, buffer, u_k)
        outputs.append(y_k)
    return outputs, regressors


# -- identifiers --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ArmaVecPermState:
    """Covariance ``Pbar`` (``pd x pd``) and ``vec(theta)`` for the vec-permutation identifier."""

    pbar: NDArray[np.float64]
    thetabar: NDArray[np.float64]
    p: int
    step: int = 0

    @property
    def d(self) -> int:
        return self.thetabar.shape[0] // self.p

    @property
    def theta(self) -> NDArray[np.float64]:
        return unvec(self.thetabar, self.p, self.d)

    def param_count(self) -> int:
        return self.pbar.size + self.thetabar.size


@dataclass(frozen=True, eq=False)
class ArmaMatrixState:
    """Covariance ``P`` (``d x d``) and ``theta`` (``p x d``) for the matrix identifier."""

    P: NDArray[np.float64]
    theta: NDArray[np.float64]
    step: int = 0

    @property
    def p(self) -> int:
        return self.theta.shape[0]

    @property
    def d(self) -> int:
        return self.theta.shape[1]

    def param_count(self) -> int:
        return self.P.size + self.theta.size


def _theta0(theta0, p, d):
    if theta0 is None:
        return np.zeros((p, d))
    theta0 = as_matrix(theta0, "theta0")
    if theta0.shape != (p, d):
        raise DimensionError(f"theta0 has shape {theta0.shape}, expected {(p, d)}")
    return theta0


def arma_vecperm_init(p: int, d: int, p0=None, theta0=None, pbar0=None) -> ArmaVecPermState:
    """Vec-permutation identifier state.

    Give either `p0` (``d x d``, expanded to ``kron(p0, I_p)``) or a general
    `pbar0` (``pd x pd``). The default is the identity.
    """
    if pbar0 is None:
        p0 = np.eye(d) if p0 is None else check_spd(p0, "P0")
        pbar0 = np.kron(p0, np.eye(p))
    pbar0 = check_spd(pbar0, "Pbar0")
    if pbar0.shape[0] != p * d:
        raise DimensionError(f"Pbar0 has size {pbar0.shape[0]}, expected {p * d}")
    return ArmaVecPermState(pbar0.copy(), vec(_theta0(theta0, p, d)), p)


def arma_matrix_init(p: int, d: int, p0=None, theta0=None) -> ArmaMatrixState:
    """Matrix identifier state with ``P0`` (default identity)."""
    p0 = np.eye(d) if p0 is None else check_spd(p0, "P0")
    if p0.shape[0] != d:
        raise DimensionError(f"P0 has size {p0.shape[0]}, expected {d}")
    return ArmaMatrixState(p0.copy(), _theta0(theta0, p, d))


def _ident_inputs(phi, y, p, d):
    phi = np.asarray(phi, dtype=np.float64).reshape(-1, 1)
    y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    if phi.shape[0] != d or y.shape[0] != p:
        raise DimensionError(f"phi has {phi.shape[0]} entries and y has {y.shape[0]}, "
                             f"expected {d} and {p}")
    return phi, y


def ident_step_vecperm(state: ArmaVecPermState, phi, y) -> ArmaVecPermState:
    p = state.p
    phi, y = _ident_inputs(phi, y, p, state.d)
    phibar = np.kron(phi.T, np.eye(p))
    pbar, gain = downdate_with_inverse_weight(state.pbar, phibar, np.eye(p))
    thetabar = state.thetabar + gain @ (y - phibar @ state.thetabar)
    return ArmaVecPermState(pbar, thetabar, p, state.step + 1)


def ident_step_matrix(state: ArmaMatrixState, phi, y) -> ArmaMatrixState:
    phi, y = _ident_inputs(phi, y, state.p, state.d)
    pphi = state.P @ phi
    denom = 1.0 + (phi.T @ pphi).item()
    if not denom > 0.0:
        raise NotPositiveDefiniteError(
            f"rank-one update denominator {denom} is not positive")
    P = symmetrize(state.P - (pphi @ pphi.T) / denom)
    # phi^T P_{k+1} == phi^T P_k / denom, without the cancellation in P_{k+1}
    theta = state.theta + (y - state.theta @ phi) @ (pphi.T / denom)
    return ArmaMatrixState(P, theta, state.step + 1)
