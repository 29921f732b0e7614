"""Seeded experiments behind the command-line interface.

Each ``run_*`` function takes a :class:`RunConfig` and returns plain result
objects; :mod:`matrls.cli` turns them into CSV and exit codes.
"""

import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import arma
from .cost import brute_force_minimizer
from .estimators import (
    FAMILIES,
    batch_estimate,
    run_recursive,
    state_param_count,
)
from .io import TrialRecord
from .linalg import spd_inverse, unvec
from .problem import (
    ColumnReg,
    ColumnWeight,
    FullReg,
    FullWeight,
    Measurement,
    ProblemDims,
    SharedReg,
    SharedWeight,
)
from .rng import Purpose, stream
from .timing import loglog_slope, summarize, time_call

__all__ = [
    "CORRNOISE_METHODS",
    "RunConfig",
    "corrnoise_sigma",
    "random_instance",
    "random_spd",
    "run_arma_demo",
    "run_corrnoise",
    "run_equivalence",
    "run_scaling",
    "scaling_slope",
]

WEIGHT_MODES = ("full", "per_column", "shared")
FORMS = ("auto", "information", "covariance")
EQUIVALENCE_TOL = 1e-8
ARMA_TRAJECTORY_TOL = 1e-8

# Families able to consume each weight variant without approximation.
COMPATIBLE = {
    "full": ("vecperm",),
    "per_column": ("vecperm", "columnwise"),
    "shared": ("vecperm", "columnwise", "matrix"),
}


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by all commands; ``None`` means the command's default."""

    seed: int = 0
    p: Optional[int] = None
    n: Optional[int] = None
    m: Optional[tuple] = None
    nhat: Optional[int] = None
    mu: Optional[int] = None
    trials: Optional[int] = None
    steps: Optional[int] = None
    weight_mode: str = "shared"
    form: str = "auto"
    methods: Optional[tuple] = None
    noiseless: bool = False
    noise_std: Optional[float] = None
    p0_scale: Optional[float] = None
    output_path: Optional[str] = None

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name in ("p", "n", "nhat", "mu", "trials", "steps"):
            value = getattr(self, name)
            if value is not None and int(value) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.m is not None and (not self.m or min(self.m) < 1):
            raise ValueError("m must be >= 1")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {', '.join(WEIGHT_MODES)}")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {', '.join(FORMS)}")
        if self.methods is not None:
            unknown = set(self.methods) - set(FAMILIES)
            if unknown:
                raise ValueError(f"unknown methods: {', '.join(sorted(unknown))}")

    def get(self, name, default):
        value = getattr(self, name)
        return default if value is None else value

    def single_m(self, default):
        if self.m is None:
            return default
        if len(self.m) != 1:
            raise ValueError("this command takes a single m")
        return self.m[0]


def _form(config):
    return None if config.form == "auto" else config.form


def _rel(a, b):
    scale = np.linalg.norm(b)
    diff = np.linalg.norm(np.asarray(a) - np.asarray(b))
    return diff / scale if scale > 0 else diff


# -- random instances -------------------------------------------------------------

def random_spd(rng, dim: int, floor: float = 0.5):
    """``M M^T / dim + floor * I`` for a standard normal ``M``."""
    a = rng.standard_normal((dim, dim))
    return a @ a.T / dim + floor * np.eye(dim)


def random_dims(seed: int, trial: int, max_p: int = 3, max_n: int = 8,
                max_m: int = 4) -> ProblemDims:
    """Dimensions drawn uniformly from ``1..max`` for each of p, n, m."""
    p, n, m = stream(seed, trial, Purpose.DIMENSIONS).integers(1, 1 + np.array(
        [max_p, max_n, max_m]), (3,))
    return ProblemDims(int(p), int(n), int(m))


def random_instance(seed: int, trial: int, dims: ProblemDims, steps: int,
                    weight_mode: str, noise_std: float = 0.1,
                    vary_weights: bool = True):
    """Random data with weights and regularization of one variant.

    Returns ``(data, reg, weights, theta_true)``; `weights` holds one spec per
    step. The ``full`` variant has dense, non-block-diagonal matrices.
    """
    p, n, m = dims.p, dims.n, dims.m
    rp = stream(seed, trial, Purpose.PARAMETERS)
    rr = stream(seed, trial, Purpose.REGRESSORS)
    rn = stream(seed, trial, Purpose.NOISE)
    rw = stream(seed, trial, Purpose.WEIGHTS)
    theta = rp.standard_normal((n, m))
    theta0 = rp.standard_normal((n, m))
    if weight_mode == "full":
        reg = FullReg(random_spd(rw, n * m), theta0=theta0)
        make = lambda: FullWeight(random_spd(rw, p * m))
    elif weight_mode == "per_column":
        reg = ColumnReg([random_spd(rw, n) for _ in range(m)], theta0=theta0)
        make = lambda: ColumnWeight([random_spd(rw, p) for _ in range(m)])
    elif weight_mode == "shared":
        reg = SharedReg(random_spd(rw, n), theta0=theta0)
        make = lambda: SharedWeight(random_spd(rw, p))
    else:
        raise ValueError(f"unknown weight mode {weight_mode!r}")
    fixed = make()
    weights = [make() if vary_weights else fixed for _ in range(steps)]
    data = []
    for _ in range(steps):
        phi = rr.standard_normal((p, n))
        y = phi @ theta + noise_std * rn.standard_normal((p, m))
        data.append(Measurement(phi, y))
    return data, reg, weights, theta


# -- equivalence ------------------------------------------------------------------

@dataclass
class EquivalenceResult:
    records: list = field(default_factory=list)
    max_deviation: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_deviation <= EQUIVALENCE_TOL


def run_equivalence(config: RunConfig) -> EquivalenceResult:
    """Compare every compatible family, batch and recursive, with the dense oracle.

    Dimensions are fixed when any of p, n, m is configured and drawn per
    trial (p <= 3, n <= 8, m <= 4) otherwise. For each instance and family
    the deviation is the largest relative Frobenius error over all prefixes
    of the data. A ``cross-family`` row holds the largest pairwise gap
    between the families' final estimates.
    """
    fixed = None
    if (config.p, config.n, config.m) != (None, None, None):
        fixed = ProblemDims(config.get("p", 2), config.get("n", 3), config.single_m(2))
    steps = config.get("steps", 20)
    trials = config.get("trials", 50)
    methods = config.methods or COMPATIBLE[config.weight_mode]
    form = _form(config)
    noise = 0.0 if config.noiseless else config.get("noise_std", 0.1)
    result = EquivalenceResult()
    for trial in range(trials):
        dims = fixed or random_dims(config.seed, trial)
        data, reg, weights, _ = random_instance(
            config.seed, trial, dims, steps, config.weight_mode, noise)
        oracle = [brute_force_minimizer(data[:k], reg, weights[:k], dims.n, dims.m)
                  for k in range(steps + 1)]
        finals = {}
        for family in methods:
            t0 = time.perf_counter_ns()
            states = run_recursive(family, data, reg, weights, form, dims)
            elapsed = time.perf_counter_ns() - t0
            rec_dev = max(_rel(s.theta, o) for s, o in zip(states, oracle))
            batch_dev = max(
                _rel(batch_estimate(family, data[:k], reg, weights[:k], dims), oracle[k])
                for k in range(steps + 1))
            finals[family] = states[-1].theta
            mem = state_param_count(states[-1])
            result.records.append(TrialRecord(trial, steps, f"{family}-recursive",
                                              rec_dev, elapsed, mem))
            result.records.append(TrialRecord(trial, steps, f"{family}-batch",
                                              batch_dev, 0, mem))
            result.max_deviation = max(result.max_deviation, rec_dev, batch_dev)
        names = list(finals)
        cross = max((_rel(finals[a], finals[b]) for a in names for b in names if a < b),
                    default=0.0)
        result.records.append(TrialRecord(trial, steps, "cross-family", cross, 0, 0))
        result.max_deviation = max(result.max_deviation, cross)
    return result


# -- scaling ----------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingRow:
    method: str
    mode: str
    m: int
    median_ns: float
    ci_low_ns: float
    ci_high_ns: float
    mean_ns: float
    samples: int
    mem_params: int


SCALING_HEADER = ["method", "mode", "m", "median_ns", "ci_low_ns", "ci_high_ns",
                  "mean_ns", "samples", "mem_params"]


def _scaling_data(seed, trial, p, n, m, count):
    rr = stream(seed, trial, Purpose.REGRESSORS)
    theta = stream(seed, trial, Purpose.PARAMETERS).standard_normal((n, m))
    data = []
    for _ in range(count):
        phi = rr.standard_normal((p, n))
        data.append(Measurement(phi, phi @ theta))
    return data


def run_scaling(config: RunConfig, recursive_steps: int = 5):
    """Time batch and recursive updates of all three families against ``m``.

    Batch timings solve ``N = steps`` measurements from scratch, one sample
    per trial. Recursive timings take one sample per step for
    `recursive_steps` steps of every trial, after one untimed warm-up step.
    All families use identity weights and regularization so each one applies.
    """
    p, n = config.get("p", 10), config.get("n", 50)
    m_values = config.m or (1, 2, 4, 8, 16, 20)
    count = config.get("steps", 100)
    trials = config.get("trials", 10)
    form = _form(config)
    reg = SharedReg(np.eye(n))
    weight = SharedWeight(np.eye(p))
    rows = []
    for m in m_values:
        dims = ProblemDims(p, n, m)
        samples = {(f, mode): [] for f in FAMILIES for mode in ("batch", "recursive")}
        mem = {}
        for trial in range(trials):
            data = _scaling_data(config.seed, trial, p, n, m, max(count, recursive_steps + 1))
            for family, (init, step, batch) in FAMILIES.items():
                samples[(family, "batch")] += time_call(
                    lambda: batch(data[:count], reg, weight, dims), repeats=1,
                    warmup=1 if trial == 0 else 0)
                state = step(init(reg, dims), data[0], weight, form)
                for k in range(1, recursive_steps + 1):
                    t0 = time.perf_counter_ns()
                    state = step(state, data[k], weight, form)
                    samples[(family, "recursive")].append(time.perf_counter_ns() - t0)
                mem[family] = state_param_count(state)
        for (family, mode), xs in samples.items():
            s = summarize(xs, seed=config.seed)
            rows.append(ScalingRow(family, mode, m, s.median_ns, s.ci_low_ns, s.ci_high_ns,
                                   s.mean_ns, s.samples, mem[family]))
    return rows


def scaling_slope(rows, mode: str, m_values=(2, 4, 8, 16), numerator="vecperm",
                  denominator="matrix") -> float:
    """Log-log slope of the median-time ratio `numerator` / `denominator` against ``m``."""
    med = {(r.method, r.m): r.median_ns for r in rows if r.mode == mode}
    ratios = [med[(numerator, m)] / med[(denominator, m)] for m in m_values]
    return loglog_slope(m_values, ratios)


# -- correlated noise ---------------------------------------------------------------

def corrnoise_sigma():
    """Noise covariance of ``vec(v_k)`` with every pair of entries 0.99-correlated."""
    s11 = np.array([[1.0, 0.99], [0.99, 1.0]])
    s22 = 100.0 * s11
    off = 9.9 * np.ones((2, 2))
    return np.block([[s11, off], [off.T, s22]]), s11, s22


CORRNOISE_METHODS = ("vecperm", "columnwise", "matrix-I", "matrix-S11inv", "matrix-S22inv")


def corrnoise_identifiers(n, m=2, reg_scale=1.0):
    """The five recursive identifiers, keyed by method name: ``(family, reg, weight)``.

    Every regularization is ``reg_scale * I`` (the identity by default).
    """
    sigma, s11, s22 = corrnoise_sigma()
    reg_n = reg_scale * np.eye(n)
    p = 2
    return {
        "vecperm": ("vecperm", FullReg(reg_scale * np.eye(n * m)), FullWeight(spd_inverse(sigma))),
        "columnwise": ("columnwise", ColumnReg([reg_n, reg_n]),
                       ColumnWeight([spd_inverse(s11), spd_inverse(s22)])),
        "matrix-I": ("matrix", SharedReg(reg_n), SharedWeight(np.eye(p))),
        "matrix-S11inv": ("matrix", SharedReg(reg_n), SharedWeight(spd_inverse(s11))),
        "matrix-S22inv": ("matrix", SharedReg(reg_n), SharedWeight(spd_inverse(s22))),
    }


def corrnoise_data(seed, trial, n, steps, noiseless=False):
    p, m = 2, 2
    sigma = corrnoise_sigma()[0]
    theta = stream(seed, trial, Purpose.PARAMETERS).standard_normal((n, m))
    rr = stream(seed, trial, Purpose.REGRESSORS)
    noise = stream(seed, trial, Purpose.NOISE).multivariate_normal(sigma, steps)
    data = []
    for k in range(steps):
        phi = rr.standard_normal((p, n))
        v = np.zeros((p, m)) if noiseless else unvec(noise[k], p, m)
        data.append(Measurement(phi, phi @ theta + v))
    return data, theta


def run_corrnoise(config: RunConfig):
    """Error curves of the correlated-noise comparison.

    Fixed dimensions ``p = m = 2``; ``n`` (default 100), trials (10) and steps
    (200) are configurable, and ``p0_scale`` sets the regularization to
    ``I / p0_scale`` (default ``I``). Returns TrialRecords with ``k = 0..steps``.
    """
    if config.p not in (None, 2) or config.single_m(2) != 2:
        raise ValueError("corrnoise uses p = 2 and m = 2")
    n = config.get("n", 100)
    trials = config.get("trials", 10)
    steps = config.get("steps", 200)
    form = _form(config)
    idents = corrnoise_identifiers(n, reg_scale=1.0 / config.get("p0_scale", 1.0))
    records = []
    for trial in range(trials):
        data, theta = corrnoise_data(config.seed, trial, n, steps, config.noiseless)
        for name, (family, reg, weight) in idents.items():
            init, step, _ = FAMILIES[family]
            state = init(reg, ProblemDims(2, n, 2))
            mem = state_param_count(state)
            records.append(TrialRecord(trial, 0, name,
                                       float(np.linalg.norm(state.theta - theta)), 0, mem))
            for k, meas in enumerate(data, start=1):
                t0 = time.perf_counter_ns()
                state = step(state, meas, weight, form)
                elapsed = time.perf_counter_ns() - t0
                records.append(TrialRecord(trial, k, name,
                                           float(np.linalg.norm(state.theta - theta)),
                                           elapsed, mem))
    return records


def median_error(records, method, k):
    return float(np.median([r.error for r in records if r.method == method and r.k == k]))


def median_curve(records, method):
    ks = sorted({r.k for r in records if r.method == method})
    return np.array(ks), np.array([median_error(records, method, k) for k in ks])


# -- ARMA identification ------------------------------------------------------------

@dataclass
class ArmaDemoResult:
    records: list = field(default_factory=list)
    max_deviation: float = 0.0
    final_errors: dict = field(default_factory=dict)
    median_step_ns: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= ARMA_TRAJECTORY_TOL


def run_arma_demo(config: RunConfig) -> ArmaDemoResult:
    """Identify random stable ARMA plants with both recursive identifiers.

    Both identifiers start from ``P0 = p0_scale * I``; the vec-permutation
    identifier uses ``kron(P0, I_p)``. The default scale is ``1e8`` for
    noiseless runs, a weak prior whose bias stays below ``1e-6``, and ``1e4``
    with noise: there the bias is far below the noise floor, and a weaker prior
    only amplifies rounding near ``k = d`` where the two identifiers must agree. The
    deviation is the largest relative gap between the two estimates over all
    steps and trials.
    """
    p, mu, nhat = config.get("p", 4), config.get("mu", 2), config.get("nhat", 2)
    steps = config.get("steps", 500)
    trials = config.get("trials", 5)
    noise = 0.0 if config.noiseless else config.get("noise_std", 0.01)
    scale = config.get("p0_scale", 1e4 if noise else 1e8)
    d = arma.regressor_dim(nhat, p, mu)
    result = ArmaDemoResult()
    times = {"arma-vecperm": [], "arma-matrix": []}
    for trial in range(trials):
        model = arma.random_stable_arma(stream(config.seed, trial, Purpose.PLANT), p, mu, nhat)
        inputs = stream(config.seed, trial, Purpose.INPUTS).standard_normal((steps, mu))
        outputs, regressors = arma.simulate(model, inputs)
        if noise:
            rn = stream(config.seed, trial, Purpose.NOISE)
            outputs = [y + noise * rn.standard_normal((p, 1)) for y in outputs]
        truth = model.theta
        vp = arma.arma_vecperm_init(p, d, p0=scale * np.eye(d))
        mx = arma.arma_matrix_init(p, d, p0=scale * np.eye(d))
        mem_vp, mem_mx = vp.param_count(), mx.param_count()
        for k, (phi, y) in enumerate(zip(regressors, outputs), start=1):
            t0 = time.perf_counter_ns()
            vp = arma.ident_step_vecperm(vp, phi, y)
            t1 = time.perf_counter_ns()
            mx = arma.ident_step_matrix(mx, phi, y)
            t2 = time.perf_counter_ns()
            times["arma-vecperm"].append(t1 - t0)
            times["arma-matrix"].append(t2 - t1)
            result.max_deviation = max(result.max_deviation, _rel(mx.theta, vp.theta))
            result.records.append(TrialRecord(
                trial, k, "arma-vecperm", float(np.linalg.norm(vp.theta - truth)),
                t1 - t0, mem_vp))
            result.records.append(TrialRecord(
                trial, k, "arma-matrix", float(np.linalg.norm(mx.theta - truth)),
                t2 - t1, mem_mx))
        result.final_errors[trial] = float(np.linalg.norm(mx.theta - truth))
    result.median_step_ns = {name: float(np.median(xs)) for name, xs in times.items()}
    return result


def with_defaults(config: RunConfig, **kwargs) -> RunConfig:
    return replace(config, **kwargs)
