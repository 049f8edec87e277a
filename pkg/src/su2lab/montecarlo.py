"""Trial ensembles over (N, r): zero-count statistics, hole probabilities,
concentration outlier rates, the exact explicit-event lower bound, and the
quadratic-in-N decay fit.

Trials are data-parallel: trial ``t`` of a plan draws its coefficients from
the counter-based stream keyed by ``(master_seed, t)``, blocks of trials are
processed vectorized, and reductions are integer-exact, so an identical plan
gives bit-identical estimates for any worker count or schedule.  Numerical
rejects (contour singularities, quadrature caps, unconverged roots) are
excluded from estimates but counted and reported; above 1% the estimate is
refused outright, since such failures correlate with near-boundary zeros and
silent dropping would bias hole statistics.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import log_binomial
from .rng import gaussian_matrix
from .zeros import (
    _aberth_batch,
    _batch_boundary_log_max,
    _batch_circle_log_means,
    _batch_winding,
    _normalized_residuals,
)

__all__ = [
    "Tolerances",
    "TrialPlan",
    "Estimate",
    "DecayFit",
    "DeviationSpec",
    "ReliabilityError",
    "default_workers",
    "expected_zero_count",
    "estimate_zero_count_mean",
    "estimate_deviation_probability",
    "estimate_hole_probability",
    "omega_lower_bound",
    "max_modulus_outlier_frequency",
    "log_l1_outlier_frequency",
    "circle_average_lower_tail_frequency",
    "fit_decay_exponent",
    "zero_count_samples",
]

Z95 = 1.959963984540054
BLOCK_TRIALS = 4096
MAX_FAILED_FRACTION = 0.01
CROSS_CHECK_EVERY = 100  # hole trials re-counted through the root oracle


class ReliabilityError(RuntimeError):
    """Too many trials failed numerically for the estimate to stand."""


def default_workers() -> int:
    env = os.environ.get("SU2LAB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Tolerances:
    """Numerical-reject thresholds for trial pipelines.

    The Monte Carlo quadrature target is looser than the 1e-9 default of
    the single-polynomial circle average: estimator events compare circle
    means against thresholds O(N) apart, so 1e-6 cannot flip an indicator
    while it spares the deep node-doubling tail.
    """

    root_residual: float = 1e-8
    boundary_margin: float = 1e-9
    quadrature_target: float = 1e-6


@dataclass(frozen=True)
class TrialPlan:
    degree: int
    radius: float
    trials: int
    master_seed: int
    workers: int = 1
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class Estimate:
    point: float
    stderr: float
    ci95: tuple[float, float]
    trials_used: int
    trials_failed: int

    def __post_init__(self):
        lo, hi = self.ci95
        if not (lo <= self.point <= hi):
            raise ValueError("confidence interval must contain the point estimate")


@dataclass(frozen=True)
class DecayFit:
    c_hat: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class DeviationSpec:
    """Zero-count deviation threshold per unit degree: |Xi - mean| >= delta*N."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")


# ---------------------------------------------------------------------------
# blocked, schedule-invariant trial execution


def _invoke(args):
    fn, plan, start, stop = args
    return fn(plan, start, stop)


def _run_blocked(plan: TrialPlan, fn):
    """Run ``fn(plan, start, stop)`` over fixed-size trial blocks.

    The block partition depends only on the trial count, never on the
    worker count, and results are concatenated in block order, so the
    output is a pure function of the plan.
    """
    blocks = [
        (s, min(s + BLOCK_TRIALS, plan.trials))
        for s in range(0, plan.trials, BLOCK_TRIALS)
    ]
    if plan.workers == 1 or len(blocks) == 1:
        parts = [fn(plan, s, e) for s, e in blocks]
    else:
        with ProcessPoolExecutor(max_workers=min(plan.workers, len(blocks))) as pool:
            parts = list(pool.map(_invoke, [(fn, plan, s, e) for s, e in blocks]))
    return tuple(np.concatenate(col) for col in zip(*parts))


def _sample_block(plan: TrialPlan, start: int, stop: int) -> np.ndarray:
    trials = np.arange(start, stop, dtype=np.uint64)
    return gaussian_matrix(plan.master_seed, trials, plan.degree + 1)


def _block_root_counts(plan: TrialPlan, start: int, stop: int):
    """Per-trial zero counts in B(0, r) through the root oracle."""
    n = plan.degree
    alpha = _sample_block(plan, start, stop)
    logw = np.array([0.5 * log_binomial(n, k) for k in range(n + 1)])
    w = alpha * np.exp(logw)
    roots, conv = _aberth_batch(w)
    res = _normalized_residuals(alpha, n, roots).max(axis=1)
    failed = (~conv) | (res > plan.tolerances.root_residual)
    dist = np.abs(roots)
    counts = (dist < plan.radius).sum(axis=1).astype(np.int64)
    near = (np.abs(dist - plan.radius) <= plan.tolerances.boundary_margin).any(axis=1)
    return counts, near, failed


def _block_hole(plan: TrialPlan, start: int, stop: int):
    """Hole indicators via the winding counter, root-checked every 100th trial."""
    n = plan.degree
    alpha = _sample_block(plan, start, stop)
    counts, ok = _batch_winding(alpha, n, plan.radius,
                                plan.tolerances.boundary_margin)
    mism = np.zeros(len(counts), dtype=bool)
    check = np.nonzero((np.arange(start, stop) % CROSS_CHECK_EVERY == 0) & ok)[0]
    if len(check):
        logw = np.array([0.5 * log_binomial(n, k) for k in range(n + 1)])
        w = alpha[check] * np.exp(logw)
        roots, conv = _aberth_batch(w)
        res = _normalized_residuals(alpha[check], n, roots).max(axis=1)
        rcounts = (np.abs(roots) < plan.radius).sum(axis=1)
        trustworthy = conv & (res <= plan.tolerances.root_residual)
        disagree = trustworthy & (rcounts != counts[check])
        mism[check[disagree]] = True
        ok[check[disagree]] = False
    hole = (counts == 0) & ok
    return hole, ~ok, mism


def _block_log_max(plan: TrialPlan, start: int, stop: int):
    n = plan.degree
    alpha = _sample_block(plan, start, stop)
    log_hat, _ = _batch_boundary_log_max(alpha, n, plan.radius)
    log_max = log_hat + (n / 2.0) * math.log1p(plan.radius**2)
    return log_max, np.zeros(len(log_max), dtype=bool)


def _block_circle_means(plan: TrialPlan, start: int, stop: int):
    alpha = _sample_block(plan, start, stop)
    mean_log, mean_abs, ok, _ = _batch_circle_log_means(
        alpha, plan.degree, plan.radius, target=plan.tolerances.quadrature_target
    )
    return mean_log, mean_abs, ~ok


# ---------------------------------------------------------------------------
# estimate assembly


def _wilson(successes: int, used: int) -> Estimate:
    p = successes / used
    z2 = Z95 * Z95
    denom = 1.0 + z2 / used
    center = (p + z2 / (2.0 * used)) / denom
    half = Z95 * math.sqrt(p * (1.0 - p) / used + z2 / (4.0 * used * used)) / denom
    stderr = math.sqrt(p * (1.0 - p) / used)
    # clamp against 1-ulp excursions at p in {0, 1}
    lo = min(max(0.0, center - half), p)
    hi = max(min(1.0, center + half), p)
    return Estimate(p, stderr, (lo, hi), used, 0)


def _frequency_estimate(event: np.ndarray, failed: np.ndarray,
                        plan: TrialPlan) -> Estimate:
    used = int((~failed).sum())
    n_failed = int(failed.sum())
    if used == 0 or n_failed > MAX_FAILED_FRACTION * plan.trials:
        raise ReliabilityError(
            f"{n_failed}/{plan.trials} trials failed numerically (limit 1%)"
        )
    base = _wilson(int(event[~failed].sum()), used)
    return Estimate(base.point, base.stderr, base.ci95, used, n_failed)


def _mean_estimate(values: np.ndarray, failed: np.ndarray,
                   plan: TrialPlan) -> Estimate:
    used = int((~failed).sum())
    n_failed = int(failed.sum())
    if used == 0 or n_failed > MAX_FAILED_FRACTION * plan.trials:
        raise ReliabilityError(
            f"{n_failed}/{plan.trials} trials failed numerically (limit 1%)"
        )
    kept = values[~failed]
    mean = float(kept.sum()) / used
    if used > 1:
        var = (float((kept.astype(float) ** 2).sum()) - used * mean * mean) / (used - 1)
        stderr = math.sqrt(max(var, 0.0) / used)
    else:
        stderr = 0.0
    return Estimate(mean, stderr, (mean - Z95 * stderr, mean + Z95 * stderr),
                    used, n_failed)


# ---------------------------------------------------------------------------
# estimators


def expected_zero_count(degree: int, radius: float) -> float:
    """Mean number of zeros in B(0, r): N r^2 / (1 + r^2)."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    return degree * radius * radius / (1.0 + radius * radius)


def zero_count_samples(plan: TrialPlan):
    """Per-trial zero counts in B(0, r) via the root oracle.

    Returns ``(counts, near_boundary, failed)`` aligned with trial index;
    building block for the mean/deviation estimators and for consistency
    checks that need a common trial set.
    """
    if plan.degree == 0:
        z = np.zeros(plan.trials, dtype=np.int64)
        f = np.zeros(plan.trials, dtype=bool)
        return z, f.copy(), f
    return _run_blocked(plan, _block_root_counts)


def estimate_zero_count_mean(plan: TrialPlan) -> Estimate:
    counts, _, failed = zero_count_samples(plan)
    return _mean_estimate(counts, failed, plan)


def estimate_deviation_probability(plan: TrialPlan, spec: DeviationSpec) -> Estimate:
    """Frequency of |Xi - N r^2/(1+r^2)| >= delta * N."""
    counts, _, failed = zero_count_samples(plan)
    mu = expected_zero_count(plan.degree, plan.radius)
    event = np.abs(counts - mu) >= spec.delta * plan.degree
    return _frequency_estimate(event, failed, plan)


def estimate_hole_probability(plan: TrialPlan) -> Estimate:
    """Frequency of zero-free B(0, r), argument-principle counted."""
    if plan.degree == 0:
        base = _wilson(plan.trials, plan.trials)
        return base
    hole, failed, _ = _run_blocked(plan, _block_hole)
    return _frequency_estimate(hole, failed, plan)


def max_modulus_outlier_frequency(plan: TrialPlan, delta: float) -> Estimate:
    """Frequency of the boundary maximum leaving the two-sided band

        [(1+r^2)^(N/2) (1-delta)^(N/2), (1+r^2)^(N/2) (1+delta)^(N/2)],

    compared in log space (delta = 1 disables the lower side)."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    n, r = plan.degree, plan.radius
    log_max, failed = _run_blocked(plan, _block_log_max)
    band = (n / 2.0) * math.log1p(r * r)
    lo = -math.inf if delta == 1 else band + (n / 2.0) * math.log1p(-delta)
    hi = band + (n / 2.0) * math.log1p(delta)
    outlier = (log_max < lo) | (log_max > hi)
    return _frequency_estimate(outlier, failed, plan)


def log_l1_outlier_frequency(plan: TrialPlan) -> Estimate:
    """Frequency of circle-mean |log|psi|| exceeding 5 N log(2(1+r^2))."""
    n, r = plan.degree, plan.radius
    _, mean_abs, failed = _run_blocked(plan, _block_circle_means)
    threshold = 5.0 * n * (math.log(2.0) + math.log1p(r * r))
    return _frequency_estimate(mean_abs > threshold, failed, plan)


def circle_average_lower_tail_frequency(plan: TrialPlan, delta: float) -> Estimate:
    """Frequency of circle-mean log|psi| below (N/2) log((1+r^2)(1-delta))."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    n, r = plan.degree, plan.radius
    mean_log, _, failed = _run_blocked(plan, _block_circle_means)
    threshold = (n / 2.0) * (math.log1p(r * r) + math.log1p(-delta))
    return _frequency_estimate(mean_log < threshold, failed, plan)


def _log1mexp(t: float) -> float:
    """log(1 - exp(-t)) for t > 0, stable across the whole range."""
    if t > math.log(2.0):
        return math.log1p(-math.exp(-t))
    return math.log(-math.expm1(-t))


def omega_lower_bound(degree: int, radius: float) -> float:
    """Exact log-probability of the explicit hole-forcing coefficient event

        |alpha_0| >= N   and   |alpha_j| < C(N,j)^(-1/2) r^(-j)  (j >= 1),

    which by the triangle inequality leaves psi zero-free on B(0, r).
    Uses the exact tails P(|alpha| >= lam) = exp(-lam^2)."""
    n = degree
    if n < 1:
        raise ValueError("degree must be at least 1")
    if not radius > 0:
        raise ValueError("radius must be positive")
    log_r = math.log(radius)
    terms = [-float(n * n)]
    for j in range(1, n + 1):
        log_t = -(log_binomial(n, j) + 2.0 * j * log_r)  # log lambda_j^2
        if log_t < -36.8:
            # 1 - exp(-t) = t (1 - t/2 + ...) with t below 1e-16
            terms.append(log_t)
        elif log_t > 36.8:
            # exp(-t) underflows: the factor is exactly 1 in doubles
            terms.append(0.0)
        else:
            terms.append(_log1mexp(math.exp(log_t)))
    return math.fsum(terms)


def fit_decay_exponent(points) -> DecayFit:
    """Least squares of log-probability against N^2; c_hat is -slope."""
    pts = [(float(n), float(lp)) for n, lp in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit")
    ns = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.unique(ns).size < 2:
        raise ValueError("degenerate design: all degrees equal")
    x = ns * ns
    slope, intercept = np.polyfit(x, ys, 1)
    resid = ys - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return DecayFit(float(-slope), float(intercept), float(r2), tuple(pts))
