import numpy as np
import pytest

from matrls.convergence import (
    PeEstimate,
    is_pe,
    pe_accumulate,
    pe_empty,
    pe_merge,
    theorem1_exact_residual,
    theorem1_limit_prediction,
)
from matrls.errors import DimensionError
from matrls.estimators import matrix_batch, matrix_init, matrix_step
from matrls.problem import Measurement, ProblemDims, SharedReg, SharedWeight
from matrls.rng import Purpose, stream

from conftest import random_spd, rel


def test_single_sample():
    est = pe_accumulate(pe_empty(3), np.eye(3), np.eye(3))
    np.testing.assert_array_equal(est.c, np.eye(3))
    assert est.k == 1


def test_two_sample_average():
    est = pe_accumulate(pe_accumulate(pe_empty(2), np.eye(2)), np.zeros((2, 2)))
    np.testing.assert_allclose(est.c, 0.5 * np.eye(2))
    assert est.min_eig == pytest.approx(0.5)


def test_weighted_sample(rng):
    phi = rng.standard_normal((2, 3))
    g = random_spd(rng, 2)
    est = pe_accumulate(pe_empty(3), phi, g)
    np.testing.assert_allclose(est.c, phi.T @ g @ phi, rtol=1e-12)


def test_min_eig_matches_spectrum(rng):
    est = pe_empty(4)
    for _ in range(7):
        est = pe_accumulate(est, rng.standard_normal((1, 4)))
    assert est.min_eig == pytest.approx(np.linalg.eigvalsh(est.c)[0], abs=1e-9)
    assert np.array_equal(est.c, est.c.T)


def test_dimension_check():
    with pytest.raises(DimensionError):
        pe_accumulate(pe_empty(3), np.ones((2, 2)))


def test_gaussian_average_tends_to_p_identity():
    p, n, k = 3, 4, 10_000
    r = stream(7, 0, Purpose.REGRESSORS)
    est = pe_empty(n)
    for _ in range(k):
        est = pe_accumulate(est, r.standard_normal((p, n)))
    # entry (a, b) averages sum_r x_ra x_rb: mean p*delta_ab, variance p*(1+delta_ab)
    std_err = np.sqrt(p * (1 + np.eye(n)) / k)
    assert np.all(np.abs(est.c - p * np.eye(n)) <= 5 * std_err)
    assert is_pe(est, p / 2)


def test_is_pe_identity():
    assert is_pe(PeEstimate.from_average(np.eye(3), 5), 0.5)


def test_rank_one_average_not_pe():
    est = pe_empty(3)
    phi = np.array([[1.0, 2.0, 3.0]])
    for _ in range(50):
        est = pe_accumulate(est, phi)
    assert not is_pe(est, 1e-6)


def test_is_pe_requires_positive_eps():
    with pytest.raises(ValueError):
        is_pe(pe_empty(2), 0.0)


def test_order_independence(rng):
    phis = [rng.standard_normal((2, 5)) for _ in range(200)]
    a = pe_empty(5)
    for phi in phis:
        a = pe_accumulate(a, phi)
    b = pe_empty(5)
    for i in rng.permutation(len(phis)):
        b = pe_accumulate(b, phis[i])
    assert rel(a.c, b.c) <= 1e-12


def test_merge_is_weighted_average(rng):
    phis = [rng.standard_normal((2, 3)) for _ in range(30)]
    whole, left, right = pe_empty(3), pe_empty(3), pe_empty(3)
    for i, phi in enumerate(phis):
        whole = pe_accumulate(whole, phi)
        if i < 12:
            left = pe_accumulate(left, phi)
        else:
            right = pe_accumulate(right, phi)
    merged = pe_merge(left, right)
    assert merged.k == 30
    assert rel(merged.c, whole.c) <= 1e-12
    assert pe_merge(pe_empty(3), pe_empty(3)).k == 0


# -- asymptotic law ---------------------------------------------------------------

def test_limit_prediction_trivial(rng):
    theta = rng.standard_normal((3, 2))
    reg = SharedReg(random_spd(rng, 3), theta0=theta)
    np.testing.assert_array_equal(theorem1_limit_prediction(reg, theta, np.eye(3)),
                                  np.zeros((3, 2)))
    theta0 = rng.standard_normal((3, 2))
    reg = SharedReg(np.eye(3), theta0=theta0)
    np.testing.assert_allclose(theorem1_limit_prediction(reg, theta, np.eye(3)), theta0 - theta)


def test_exact_residual_zero_when_prior_is_truth(rng):
    theta = rng.standard_normal((3, 2))
    reg = SharedReg(np.eye(3), theta0=theta)
    est = pe_accumulate(pe_empty(3), np.eye(3))
    assert theorem1_exact_residual(reg, theta, est, theta, 1) == 0.0


def test_exact_residual_hand_case(rng):
    theta = rng.standard_normal((2, 2))
    theta0 = rng.standard_normal((2, 2))
    reg = SharedReg(np.eye(2), theta0=theta0)
    theta1 = matrix_batch([Measurement(np.eye(2), theta)], reg, SharedWeight(np.eye(2)))
    np.testing.assert_allclose(theta1 - theta, 0.5 * (theta0 - theta), atol=1e-15)
    est = pe_accumulate(pe_empty(2), np.eye(2))
    assert theorem1_exact_residual(reg, theta, est, theta1, 1) <= 1e-15


def test_exact_residual_guards():
    reg = SharedReg(np.eye(2))
    with pytest.raises(ValueError):
        theorem1_exact_residual(reg, np.zeros((2, 1)), pe_empty(2), np.zeros((2, 1)), 0)
    with pytest.raises(ValueError):
        theorem1_exact_residual(reg, np.zeros((2, 1)), pe_empty(2), np.zeros((2, 1)), 3)


def noiseless_run(seed, trial, dims, steps, weighted=True, track_pe=True):
    """Yield ``(k, state, pe_estimate)`` for a noiseless matrix-update run."""
    rp = stream(seed, trial, Purpose.PARAMETERS)
    rr = stream(seed, trial, Purpose.REGRESSORS)
    rw = stream(seed, trial, Purpose.WEIGHTS)
    theta = rp.standard_normal((dims.n, dims.m))
    reg = SharedReg(random_spd(rw, dims.n), theta0=rp.standard_normal((dims.n, dims.m)))
    state = matrix_init(reg, dims)
    est = pe_empty(dims.n)
    unit = SharedWeight(np.eye(dims.p))
    out = []
    for k in range(1, steps + 1):
        phi = rr.standard_normal((dims.p, dims.n))
        w = SharedWeight(random_spd(rw, dims.p)) if weighted else unit
        g = w.matrix
        state = matrix_step(state, Measurement(phi, phi @ theta), w)
        if track_pe:
            est = pe_accumulate(est, phi, g)
        out.append((k, state, est))
    return reg, theta, out


def test_exact_identity_along_run():
    reg, theta, run = noiseless_run(3, 0, ProblemDims(2, 4, 3), 200)
    for k, state, est in run:
        assert theorem1_exact_residual(reg, theta, est, state.theta, k) <= 1e-8


def test_limit_error_shrinks_with_k():
    dims = ProblemDims(3, 4, 2)
    checkpoints = (100, 1000, 10_000)
    gaps = {k: [] for k in checkpoints}
    for seed in range(10):
        reg, theta, run = noiseless_run(100 + seed, 0, dims, checkpoints[-1],
                                      weighted=False, track_pe=False)
        limit = theorem1_limit_prediction(reg, theta, dims.p * np.eye(dims.n))
        for k, state, _ in run:
            if k in gaps:
                gaps[k].append(np.linalg.norm(k * (state.theta - theta) - limit))
    medians = [np.median(gaps[k]) for k in checkpoints]
    assert medians[0] >= medians[1] >= medians[2]
