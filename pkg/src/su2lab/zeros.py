"""Zero sets of SU(2) polynomials and the circle-average machinery.

Root finding is simultaneous Aberth-Ehrlich iteration over all roots at
once; zero counts come either from the computed roots or from phase
tracking of the polynomial around the disk boundary (the two are
independent oracles and are cross-checked in the test suite).  All
boundary evaluations use the spherically normalized values
``psi(z)/(1+|z|^2)^(N/2)``, whose magnitudes stay in double range at any
degree; the positive normalization never changes a phase or a zero.

Batch variants (leading underscore) operate on ``(trials, N+1)``
coefficient blocks and are the engines behind the Monte Carlo layer; the
public single-polynomial operations run through the same code with a
one-row batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SU2Polynomial, evaluate_normalized, log_binomial

__all__ = [
    "Disk",
    "ZeroSet",
    "ZeroCount",
    "BoundaryMaximum",
    "RootFindingError",
    "ContourError",
    "QuadratureError",
    "find_all_roots",
    "count_zeros_from_roots",
    "count_zeros_argument_principle",
    "circle_log_integral",
    "circle_abs_log_integral",
    "jensen_residual",
    "max_modulus_boundary",
    "poisson_kernel",
    "poisson_partition_deviation",
    "poisson_log_average",
]

TINY_SAMPLE = 1e-290  # boundary samples below this get locally subdivided
DEFAULT_BOUNDARY_MARGIN = 1e-9
DEFAULT_QUADRATURE_TARGET = 1e-9
NODE_CAP = 1 << 20
TRUNCATION_RATIO = 1e-14  # leading coefficients below this ratio are dropped


class RootFindingError(RuntimeError):
    """Aberth iteration failed to converge; carries the offending roots."""

    def __init__(self, unconverged):
        self.unconverged = list(unconverged)
        super().__init__(f"roots {self.unconverged} unconverged after max sweeps")


class ContourError(RuntimeError):
    """A zero sits on or too close to the integration contour."""


class QuadratureError(RuntimeError):
    """Circle average failed to converge; carries the best estimate."""

    def __init__(self, message, best_estimate, gap):
        self.best_estimate = best_estimate
        self.gap = gap
        super().__init__(f"{message} (best estimate {best_estimate}, gap {gap})")


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class ZeroSet:
    """All located roots plus the count lost to leading-coefficient decay."""

    locations: np.ndarray
    residuals: np.ndarray
    degree_deficit: int
    degree: int

    def __post_init__(self):
        if len(self.locations) + self.degree_deficit != self.degree:
            raise ValueError("located roots plus deficit must equal the degree")


@dataclass(frozen=True)
class ZeroCount:
    count: int
    method: str  # "from_roots" | "argument_principle"
    near_boundary: int = 0


@dataclass(frozen=True)
class BoundaryMaximum:
    log_value: float
    value: float  # exp(log_value), inf when not representable
    argmax: complex


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


# ---------------------------------------------------------------------------
# boundary evaluation engines


def _circle_fourier_coeffs(alpha: np.ndarray, degree: int, r: float) -> np.ndarray:
    """Fourier coefficients of theta -> psi_hat(r e^{i theta}).

    ``alpha`` is ``(..., N+1)``; returns the same shape.  Entry j equals
    ``alpha_j sqrt(C(N,j)) r^j / (1+r^2)^(N/2)`` assembled in log space.
    """
    n = degree
    j = np.arange(n + 1)
    logw = np.array([0.5 * log_binomial(n, k) for k in range(n + 1)])
    logr = math.log(r)
    scale = np.exp(logw + j * logr - (n / 2.0) * math.log1p(r * r))
    return alpha * scale


def _eval_circle_grid(b: np.ndarray, n_nodes: int) -> np.ndarray:
    """psi_hat at the uniform angles 2*pi*m/M from Fourier coefficients."""
    b = np.atleast_2d(b)
    padded = np.zeros((b.shape[0], n_nodes), dtype=complex)
    padded[:, : b.shape[1]] = b
    return n_nodes * np.fft.ifft(padded, axis=1)


def _eval_circle_angles(b: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """psi_hat at arbitrary angles by Horner in e^{i theta}.

    ``b`` is ``(B, N+1)``, ``theta`` ``(B, K)`` or ``(1, K)``; returns
    the broadcast ``(B, K)`` values.
    """
    b = np.atleast_2d(b)
    x = np.exp(1j * np.atleast_2d(np.asarray(theta, dtype=float)))
    shape = np.broadcast_shapes((b.shape[0], 1), x.shape)
    acc = np.zeros(shape, dtype=complex)
    for k in range(b.shape[1] - 1, -1, -1):
        acc = acc * x + b[:, k, None]
    return acc


# ---------------------------------------------------------------------------
# Aberth-Ehrlich simultaneous root finding


def _bini_start_points(w: np.ndarray) -> np.ndarray:
    """Initial root guesses from the Newton polygon of each row.

    Radii follow the upper convex hull of (k, log|w_k|); angles are spread
    uniformly with a fixed offset so no symmetry axis of the polynomial is
    an invariant set of the iteration.
    """
    rows, n1 = w.shape
    m = n1 - 1
    out = np.empty((rows, m), dtype=complex)
    angles = 2.0 * np.pi * (np.arange(m) + 0.375) / m + 0.26
    unit = np.exp(1j * angles)
    logw = np.full((rows, n1), -np.inf)
    np.log(np.abs(w), out=logw, where=np.abs(w) > 0)
    for i in range(rows):
        ys = logw[i]
        hull: list[int] = []
        for k in range(n1):
            if ys[k] == -np.inf:
                continue
            while len(hull) >= 2:
                k1, k2 = hull[-2], hull[-1]
                if (ys[k2] - ys[k1]) * (k - k2) <= (ys[k] - ys[k2]) * (k2 - k1):
                    hull.pop()
                else:
                    break
            hull.append(k)
        radii = np.zeros(m)
        for a, bb in zip(hull[:-1], hull[1:]):
            radii[a:bb] = math.exp((ys[a] - ys[bb]) / (bb - a))
        out[i] = radii * unit
    return out


def _horner_p_dp(w: np.ndarray, z: np.ndarray):
    """Plain Horner values and derivatives; overflow-safe only for points
    with |z| bounded (coefficients scaled so max|w| ~ 1)."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for k in range(w.shape[1] - 1, -1, -1):
        dp = dp * z + p
        p = p * z + w[:, k, None]
    return p, dp


def _newton_ratio(w: np.ndarray, z: np.ndarray):
    """Newton step p(z)/p'(z) evaluated without overflow at any |z|.

    For |z| <= 1 this is direct Horner; for |z| > 1 the polynomial is
    folded through its reversal q(u) = z^{-m} p(z) at u = 1/z, where the
    huge z^m factors cancel inside the ratio:

        p/p' = z q(u) / (m q(u) - u q'(u)).

    Returns ``(step, val_zero, deriv_zero)`` masks alongside the step.
    """
    m = w.shape[1] - 1
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        p, dp = _horner_p_dp(w, z)
        direct = np.where((dp == 0) & (p == 0), 0.0,
                          p / np.where(dp == 0, 1.0, dp))
        u = np.where(z == 0, 1.0, 1.0 / z)  # placeholder where unused
        q, qp = _horner_p_dp(w[:, ::-1], u)
        denom = m * q - u * qp
        reverse = np.where((denom == 0) & (q == 0), 0.0,
                           z * q / np.where(denom == 0, 1.0, denom))
        use_rev = np.abs(z) > 1.0
        step = np.where(use_rev, reverse, direct)
        val_zero = np.where(use_rev, q == 0, p == 0)
        deriv_zero = np.where(use_rev, denom == 0, dp == 0)
    return step, val_zero, deriv_zero


def _aberth_batch(w: np.ndarray, tol: float = 1e-13, max_sweeps: int = 500,
                  polish: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """All roots of each row of ``w`` (monomial coefficients, ascending).

    Returns ``(roots (B, m), converged (B,))``.  Rows must have a
    non-negligible leading coefficient.
    """
    w = np.atleast_2d(w).astype(complex)
    rows, n1 = w.shape
    m = n1 - 1
    if m == 0:
        return np.empty((rows, 0), dtype=complex), np.ones(rows, dtype=bool)
    w = w / np.max(np.abs(w), axis=1, keepdims=True)
    if m == 1:
        roots = (-w[:, 0] / w[:, 1])[:, None]
        return roots, np.ones(rows, dtype=bool)
    z = _bini_start_points(w)
    active = np.ones((rows, m), dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        for _ in range(max_sweeps):
            newton, _, deriv_zero = _newton_ratio(w, z)
            s = np.zeros_like(z)
            for jcol in range(m):
                diff = z - z[:, jcol, None]
                s += np.where(diff == 0, 0.0, 1.0 / np.where(diff == 0, 1.0, diff))
            denom = 1.0 - newton * s
            step = np.where(denom == 0, newton, newton / np.where(denom == 0, 1.0, denom))
            step = np.where(deriv_zero & (newton == 0), 0.0, step)
            collided = deriv_zero & (newton != 0)
            step = np.where(collided, -0.1 * (1.0 + np.abs(z)), step)
            done = np.abs(step) <= tol * (1.0 + np.abs(z))
            z = np.where(active & ~done, z - step, z)
            active = active & ~done
            if not active.any():
                break
        converged = ~active.any(axis=1)
        for _ in range(polish):
            newton, _, deriv_zero = _newton_ratio(w, z)
            z = np.where(deriv_zero, z, z - newton)
    return z, converged


def _normalized_residuals(alpha: np.ndarray, degree: int, roots: np.ndarray) -> np.ndarray:
    """|psi_hat| at candidate roots, batched and overflow-safe."""
    n = degree
    logw = np.array([0.5 * log_binomial(n, k) for k in range(n + 1)])
    w = np.atleast_2d(alpha) * np.exp(logw)
    roots = np.atleast_2d(roots)
    az = np.abs(roots)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        p, _ = _horner_p_dp(w, roots)
        u = np.where(roots == 0, 1.0, 1.0 / roots)
        q, _ = _horner_p_dp(w[:, ::-1], u)
        log_direct = np.log(np.maximum(np.abs(p), 1e-300))
        log_rev = n * np.log(np.maximum(az, 1e-300)) + np.log(np.maximum(np.abs(q), 1e-300))
        logmag = np.where(az > 1.0, log_rev, log_direct)
        return np.exp(logmag - (n / 2.0) * np.log1p(az * az))


def find_all_roots(poly: SU2Polynomial, residual_tol: float | None = None) -> ZeroSet:
    """Locate every root by Aberth-Ehrlich iteration.

    Leading (high-order) coefficients smaller than 1e-14 of the largest
    are treated as zero; the lost roots are reported as ``degree_deficit``
    rather than as meaningless huge locations.  Exact zeros at the low end
    are split off as exact origin roots before iterating.
    """
    n = poly.degree
    if n < 1:
        raise ValueError("degree must be at least 1")
    amags = np.abs(poly.coefficients)
    top = amags.max()
    if top == 0:
        raise ValueError("polynomial is identically zero")
    # effective degree from the orthonormal-basis coefficients: the weighted
    # monomial coefficients span e^{+-N ln2/2} by construction, so a ratio
    # test there would discard genuine high-degree samples
    sig = np.nonzero(amags >= TRUNCATION_RATIO * top)[0]
    d = int(sig[-1])
    deficit = n - d
    w = poly.weighted_coefficients()
    k0 = int(np.nonzero(amags > 0)[0][0])
    k0 = min(k0, d)
    locations = [0.0 + 0.0j] * k0
    if d - k0 >= 1:
        roots, conv = _aberth_batch(w[None, k0 : d + 1])
        if not conv[0]:
            raise RootFindingError(np.arange(d - k0))
        locations.extend(roots[0].tolist())
    locs = np.array(locations, dtype=complex)
    residuals = np.abs(evaluate_normalized(poly, locs)) if len(locs) else np.empty(0)
    zs = ZeroSet(locs, residuals, deficit, n)
    if residual_tol is not None and len(residuals) and residuals.max() > residual_tol:
        raise RootFindingError(np.nonzero(residuals > residual_tol)[0])
    return zs


def count_zeros_from_roots(zeros: ZeroSet, disk: Disk,
                           boundary_margin: float = DEFAULT_BOUNDARY_MARGIN) -> ZeroCount:
    """Strict-interior count; roots within the margin of the boundary are
    flagged but still counted by the strict inequality."""
    dist = np.abs(zeros.locations - disk.center)
    near = int(np.sum(np.abs(dist - disk.radius) <= boundary_margin))
    return ZeroCount(int(np.sum(dist < disk.radius)), "from_roots", near)


# ---------------------------------------------------------------------------
# argument-principle counting


def _phase_increments(vals: np.ndarray) -> np.ndarray:
    """Unwrapped phase steps around a closed loop of nonzero samples."""
    ratio = np.roll(vals, -1, axis=-1) * np.conj(vals)
    return np.angle(ratio)


def _winding_phase_track(eval_fn, n_start: int, max_refinements: int = 20) -> float:
    """Winding number by adaptive phase tracking.

    ``eval_fn`` maps an array of contour parameters in [0, 1) to contour
    values.  Intervals whose phase step exceeds pi/2 (or that touch a
    vanishing sample) are bisected, up to ``max_refinements`` rounds; the
    accumulated phase must land within 0.01 of an integer multiple of
    2*pi to certify.
    """
    t = np.arange(n_start) / n_start
    vals = eval_fn(t)
    for round_no in range(max_refinements + 1):
        inc = _phase_increments(vals)
        tiny = np.abs(vals) < TINY_SAMPLE
        bad = (np.abs(inc) > 0.5 * np.pi) | tiny | np.roll(tiny, -1)
        if not bad.any():
            total = inc.sum() / (2.0 * np.pi)
            if abs(total - round(total)) <= 0.01:
                return float(total)
            bad = np.abs(inc) > 0.25 * np.pi  # sharpen until certification
            if not bad.any():
                raise ContourError("winding did not certify to an integer")
        if round_no == max_refinements:
            break
        idx = np.nonzero(bad)[0]
        t_next = np.concatenate((t[1:], t[:1] + 1.0))
        mids = (0.5 * (t[idx] + t_next[idx])) % 1.0
        t = np.unique(np.concatenate((t, mids)))
        vals = eval_fn(t)
    raise ContourError("phase step irreducible below pi/2: zero on or near contour")


def _grid_distance_estimate(vals: np.ndarray, dvals_dtheta: np.ndarray,
                            radius: float) -> np.ndarray:
    """Per-row lower-ball estimate of the distance from the contour to the
    nearest zero, via the Newton step |psi|/|psi'| at the sampled angles."""
    mag = np.abs(vals)
    dmag = np.abs(dvals_dtheta)
    with np.errstate(divide="ignore", invalid="ignore"):
        est = radius * mag / np.where(dmag == 0, np.inf, dmag)
    est = np.where(dmag == 0, np.inf, est)
    return est.min(axis=-1)


def count_zeros_argument_principle(poly: SU2Polynomial, disk: Disk,
                                   boundary_margin: float = DEFAULT_BOUNDARY_MARGIN,
                                   max_refinements: int = 20) -> ZeroCount:
    """Winding number of psi around the disk boundary.

    Samples start at 16*(N+1) points; any phase step above pi/2 triggers
    local bisection.  A zero estimated within ``boundary_margin`` of the
    contour raises :class:`ContourError` (the corresponding event has
    probability zero for Gaussian samples).
    """
    n = poly.degree
    if n == 0:
        if np.abs(poly.coefficients[0]) == 0:
            raise ValueError("polynomial is identically zero")
        return ZeroCount(0, "argument_principle")
    center, r = disk.center, disk.radius
    m0 = 16 * (n + 1)

    if center == 0:
        b = _circle_fourier_coeffs(poly.coefficients, n, r)

        def eval_fn(t):
            return _eval_circle_angles(b[None], 2.0 * np.pi * np.asarray(t)[None])[0]

        grid = _eval_circle_grid(b, _next_pow2(m0))[0]
        dgrid = _eval_circle_grid(b * 1j * np.arange(n + 1), _next_pow2(m0))[0]
        dist = _grid_distance_estimate(grid[None], dgrid[None], r)[0]
    else:

        def eval_fn(t):
            z = center + r * np.exp(2j * np.pi * np.asarray(t))
            return evaluate_normalized(poly, z)

        theta = 2.0 * np.pi * np.arange(m0) / m0
        grid = eval_fn(theta / (2.0 * np.pi))
        dgrid = np.gradient(grid, theta)
        dist = _grid_distance_estimate(grid[None], dgrid[None], r)[0]
    if dist < boundary_margin:
        raise ContourError(
            f"zero estimated within {dist:.2e} of the contour (margin {boundary_margin})"
        )
    winding = _winding_phase_track(eval_fn, m0, max_refinements)
    return ZeroCount(int(round(winding)), "argument_principle")


def _batch_winding(alpha: np.ndarray, degree: int, r: float,
                   boundary_margin: float = DEFAULT_BOUNDARY_MARGIN,
                   grid_factor: int = 16):
    """Winding numbers of a coefficient batch around |z| = r.

    Returns ``(counts, ok)``.  Rows whose nearest zero is estimated inside
    ``boundary_margin`` of the contour fail (an event of probability zero
    for Gaussian samples); rows that cannot certify an integer winding
    after grid doubling fall back to per-row local bisection.
    """
    alpha = np.atleast_2d(alpha)
    n = degree
    rows = alpha.shape[0]
    b = _circle_fourier_coeffs(alpha, n, r)
    counts = np.zeros(rows, dtype=np.int64)
    ok = np.ones(rows, dtype=bool)
    m0 = _next_pow2(grid_factor * (n + 1))

    def _grid_rows(sel: np.ndarray, m: int, deriv: bool = False) -> np.ndarray:
        out = np.empty((len(sel), m), dtype=complex)
        coeff = b[sel] * (1j * np.arange(n + 1)) if deriv else b[sel]
        step = max(1, (1 << 22) // m)
        for s in range(0, len(sel), step):
            out[s : s + step] = _eval_circle_grid(coeff[s : s + step], m)
        return out

    vals = _grid_rows(np.arange(rows), m0)
    dvals = _grid_rows(np.arange(rows), m0, deriv=True)
    dist = _grid_distance_estimate(vals, dvals, r)
    ok[dist < boundary_margin] = False
    pending = np.nonzero(ok)[0]
    vals = vals[ok]
    m = m0
    for _ in range(6):
        if len(pending) == 0:
            break
        inc = _phase_increments(vals)
        tiny = (np.abs(vals) < TINY_SAMPLE).any(axis=1)
        rough = (np.abs(inc) > 0.5 * np.pi).any(axis=1) | tiny
        total = inc.sum(axis=1) / (2.0 * np.pi)
        certified = ~rough & (np.abs(total - np.round(total)) <= 0.01)
        counts[pending[certified]] = np.round(total[certified]).astype(np.int64)
        keep = ~certified
        pending = pending[keep]
        if len(pending) == 0:
            break
        m *= 2
        vals = _grid_rows(pending, m)
    for i in pending:

        def eval_fn(t, row=i):
            return _eval_circle_angles(b[row][None], 2.0 * np.pi * np.asarray(t)[None])[0]

        try:
            counts[i] = int(round(_winding_phase_track(eval_fn, m0)))
        except ContourError:
            ok[i] = False
    return counts, ok


# ---------------------------------------------------------------------------
# circle averages of log |psi|


def _patched_logs(b_row: np.ndarray, vals: np.ndarray,
                  thetas: np.ndarray) -> np.ndarray:
    """log|vals| with samples below TINY_SAMPLE replaced by the average of
    two quarter-step-offset evaluations (the log singularity is
    integrable; the offsets step around an on-node zero)."""
    mag = np.abs(vals)
    out = np.log(np.maximum(mag, 1e-300))
    idx = np.nonzero(mag < TINY_SAMPLE)[0]
    if len(idx):
        h = thetas[1] - thetas[0] if len(thetas) > 1 else 2.0 * np.pi
        offs = np.concatenate((thetas[idx] - 0.25 * h, thetas[idx] + 0.25 * h))
        v = np.maximum(np.abs(_eval_circle_angles(b_row[None], offs[None])[0]), 1e-300)
        k = len(idx)
        out[idx] = 0.5 * (np.log(v[:k]) + np.log(v[k:]))
    return out


def _offset_grid_values(b: np.ndarray, n_nodes: int, half_shift: bool) -> np.ndarray:
    """psi_hat at M uniform angles, optionally shifted by half a step."""
    if not half_shift:
        return _eval_circle_grid(b, n_nodes)
    phase = np.exp(1j * np.pi * np.arange(b.shape[1]) / n_nodes)
    return _eval_circle_grid(b * phase, n_nodes)


def _batch_circle_log_means(alpha: np.ndarray, degree: int, r: float,
                            target: float = DEFAULT_QUADRATURE_TARGET,
                            node_cap: int = NODE_CAP,
                            start_nodes: int | None = None):
    """Means over the circle of log|psi| and of |log|psi||, per row.

    Returns ``(mean_log, mean_abs_log, ok, gap)`` arrays.  Node counts
    double until two successive estimates agree within ``target`` (for
    both quantities) or the cap is reached; rows at the cap report
    ``ok=False`` with their best estimate.  Each doubling reuses earlier
    samples: only the half-step midpoints are evaluated afresh.
    """
    alpha = np.atleast_2d(alpha)
    rows = alpha.shape[0]
    n = degree
    corr = (n / 2.0) * math.log1p(r * r)
    b = _circle_fourier_coeffs(alpha, n, r)
    m0 = start_nodes or max(128, _next_pow2(8 * (n + 1)))
    mean_log = np.full(rows, np.nan)
    mean_abs = np.full(rows, np.nan)
    gap = np.full(rows, np.nan)
    ok = np.ones(rows, dtype=bool)

    def _accumulate(sel_b: np.ndarray, m: int, half: bool):
        """Sums of (log + corr) and |log + corr| over one offset grid."""
        cnt = len(sel_b)
        s1 = np.empty(cnt)
        s2 = np.empty(cnt)
        start = (np.pi / m) if half else 0.0
        thetas = start + 2.0 * np.pi * np.arange(m) / m
        row_step = max(1, (1 << 22) // m)
        for s in range(0, cnt, row_step):
            vals = _offset_grid_values(sel_b[s : s + row_step], m, half)
            mags = np.abs(vals)
            logs = np.log(np.maximum(mags, 1e-300))
            for i in np.nonzero((mags < TINY_SAMPLE).any(axis=1))[0]:
                logs[i] = _patched_logs(sel_b[s + i], vals[i], thetas)
            logs += corr
            s1[s : s + row_step] = logs.sum(axis=1)
            s2[s : s + row_step] = np.abs(logs).sum(axis=1)
        return s1, s2

    active = np.arange(rows)
    sum1, sum2 = _accumulate(b, m0, half=False)
    m = m0
    prev1, prev2 = sum1 / m, sum2 / m
    while len(active):
        if 2 * m > node_cap:
            mean_log[active] = prev1
            mean_abs[active] = prev2
            ok[active] = False
            break
        a1, a2 = _accumulate(b[active], m, half=True)
        sum1 += a1
        sum2 += a2
        m *= 2
        cur1, cur2 = sum1 / m, sum2 / m
        delta = np.maximum(np.abs(cur1 - prev1), np.abs(cur2 - prev2))
        settled = delta < target
        done = active[settled]
        mean_log[done] = cur1[settled]
        mean_abs[done] = cur2[settled]
        gap[done] = delta[settled]
        keep = ~settled
        active = active[keep]
        sum1, sum2 = sum1[keep], sum2[keep]
        prev1, prev2 = cur1[keep], cur2[keep]
    return mean_log, mean_abs, ok, gap


def circle_log_integral(poly: SU2Polynomial, r: float,
                        target: float = DEFAULT_QUADRATURE_TARGET,
                        node_cap: int = NODE_CAP) -> float:
    """Mean of log|psi(r e^{i theta})| over the circle.

    Trapezoid on the normalized samples plus the analytic correction
    (N/2) log(1+r^2); node counts double until two successive values agree
    within ``target`` or the cap is hit.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if np.abs(poly.coefficients).max() == 0:
        raise ValueError("polynomial is identically zero")
    mean_log, _, ok, gap = _batch_circle_log_means(
        poly.coefficients[None], poly.degree, r, target, node_cap
    )
    if not ok[0]:
        raise QuadratureError("circle average did not converge at the node cap",
                              float(mean_log[0]), float(gap[0]))
    return float(mean_log[0])


def circle_abs_log_integral(poly: SU2Polynomial, r: float,
                            target: float = DEFAULT_QUADRATURE_TARGET,
                            node_cap: int = NODE_CAP) -> float:
    """Mean of |log|psi|| over the circle (the L1 deviation quantity)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if np.abs(poly.coefficients).max() == 0:
        raise ValueError("polynomial is identically zero")
    _, mean_abs, ok, gap = _batch_circle_log_means(
        poly.coefficients[None], poly.degree, r, target, node_cap
    )
    if not ok[0]:
        raise QuadratureError("circle average did not converge at the node cap",
                              float(mean_abs[0]), float(gap[0]))
    return float(mean_abs[0])


def jensen_residual(poly: SU2Polynomial, r: float) -> float:
    """|log|psi(0)| + sum_{|a|<r} log(r/|a|) - circle average of log|psi||.

    Requires psi(0) away from zero relative to the coefficient scale.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    a0 = abs(poly.coefficients[0])
    if a0 <= 1e-12 * np.abs(poly.coefficients).max():
        raise ValueError("psi(0) is numerically zero; Jensen's identity needs psi(0) != 0")
    zeros = find_all_roots(poly)
    mods = np.abs(zeros.locations)
    inside = mods < r
    total = math.log(a0) + float(np.sum(np.log(r / mods[inside])))
    return abs(total - circle_log_integral(poly, r))


# ---------------------------------------------------------------------------
# boundary maximum


def _golden_max_batch(obj_fn, lo: np.ndarray, hi: np.ndarray,
                      tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section maximization on bracketed unimodal data."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = invphi * invphi
    span = hi - lo
    x1 = lo + invphi2 * span
    x2 = lo + invphi * span
    f1 = obj_fn(x1)
    f2 = obj_fn(x2)
    width = float(np.max(span))
    if width <= tol:
        n_iter = 1
    else:
        n_iter = int(math.ceil(math.log(tol / width) / math.log(invphi)))
    for _ in range(n_iter):
        take_left = f1 >= f2
        hi = np.where(take_left, x2, hi)
        lo = np.where(take_left, lo, x1)
        x1_new = np.where(take_left, lo + invphi2 * (hi - lo), x2)
        x2_new = np.where(take_left, x1, lo + invphi * (hi - lo))
        carried_f1 = np.where(take_left, np.nan, f2)
        carried_f2 = np.where(take_left, f1, np.nan)
        need = np.where(take_left, x1_new, x2_new)
        fresh = obj_fn(need)
        f1 = np.where(take_left, fresh, carried_f1)
        f2 = np.where(take_left, carried_f2, fresh)
        x1, x2 = x1_new, x2_new
    mid = 0.5 * (lo + hi)
    return mid, obj_fn(mid)


def _batch_boundary_log_max(alpha: np.ndarray, degree: int, r: float,
                            scan_per_degree: int = 8,
                            angle_tol: float = 1e-10):
    """log of max_{|z|=r} psi_hat plus the maximizing angles, batched.

    Scans ``scan_per_degree*(N+1)`` uniform angles, then golden-section
    refines around the best three local maxima of each row.
    """
    alpha = np.atleast_2d(alpha)
    n = degree
    b = _circle_fourier_coeffs(alpha, n, r)
    m = scan_per_degree * (n + 1)
    vals = np.abs(_eval_circle_grid(b, m))
    np.maximum(vals, 1e-300, out=vals)
    logs = np.log(vals)
    is_peak = (logs >= np.roll(logs, 1, axis=1)) & (logs >= np.roll(logs, -1, axis=1))
    masked = np.where(is_peak, logs, -np.inf)
    top3 = np.argpartition(masked, -3, axis=1)[:, -3:]
    theta0 = 2.0 * np.pi * top3 / m
    h = 2.0 * np.pi / m

    def objective(theta):
        v = _eval_circle_angles(b, theta)
        return np.log(np.maximum(np.abs(v), 1e-300))

    best_theta, best_val = _golden_max_batch(objective, theta0 - h, theta0 + h, angle_tol)
    scan_best = logs.max(axis=1)
    scan_arg = 2.0 * np.pi * logs.argmax(axis=1) / m
    refined_best = best_val.max(axis=1)
    refined_arg = np.take_along_axis(
        best_theta, best_val.argmax(axis=1)[:, None], axis=1
    )[:, 0]
    use_refined = refined_best >= scan_best
    out_log = np.where(use_refined, refined_best, scan_best)
    out_theta = np.where(use_refined, refined_arg, scan_arg)
    return out_log, out_theta


def max_modulus_boundary(poly: SU2Polynomial, r: float) -> BoundaryMaximum:
    """max over the closed disk of |psi|, attained on |z| = r.

    Returned in log-safe form: ``log_value`` always, ``value`` only when
    within double range (inf otherwise).
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    n = poly.degree
    log_hat, theta = _batch_boundary_log_max(poly.coefficients[None], n, r)
    log_value = float(log_hat[0]) + (n / 2.0) * math.log1p(r * r)
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    return BoundaryMaximum(log_value, value, r * complex(math.cos(theta[0]), math.sin(theta[0])))


# ---------------------------------------------------------------------------
# Poisson kernel machinery


def poisson_kernel(zeta: complex, z: complex, r: float) -> float:
    """(r^2 - |zeta|^2) / |z - zeta|^2 for |zeta| < r, |z| = r."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if abs(zeta) >= r:
        raise ValueError("zeta must lie strictly inside the circle")
    if abs(abs(z) - r) > 1e-12 * r:
        raise ValueError("z must lie on the circle")
    return (r * r - abs(zeta) ** 2) / abs(z - zeta) ** 2


def poisson_partition_deviation(m: int, kappa: float, r: float,
                                perturbation: float = 0.0,
                                n_theta: int = 1 << 14) -> float:
    """Worst-case deviation of the averaged kernel from 1.

    Places the m sources at the midpoints of equal arcs of the circle of
    radius kappa*r, each pushed radially outward by ``perturbation``, and
    returns max over the angle grid of |mean_j P(zeta_j, r e^{i theta}) - 1|.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if not 0 <= kappa < 1:
        raise ValueError("kappa must lie in [0, 1)")
    if not r > 0:
        raise ValueError("radius must be positive")
    if perturbation < 0:
        raise ValueError("perturbation must be nonnegative")
    rho = kappa * r + perturbation
    if rho >= r:
        raise ValueError("perturbed sources must stay strictly inside the circle")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    z = r * np.exp(1j * theta)
    acc = np.zeros(n_theta)
    chunk = max(1, (1 << 22) // n_theta)
    for start in range(0, m, chunk):
        angles = 2.0 * np.pi * (np.arange(start, min(start + chunk, m)) + 0.5) / m
        zeta = rho * np.exp(1j * angles)
        acc += ((r * r - rho * rho) / np.abs(z[None, :] - zeta[:, None]) ** 2).sum(axis=0)
    return float(np.max(np.abs(acc / m - 1.0)))


def poisson_log_average(poly: SU2Polynomial, zeta: complex, r: float,
                        target: float = DEFAULT_QUADRATURE_TARGET,
                        node_cap: int = NODE_CAP) -> float:
    """Mean of P_r(zeta, .) log|psi| over the circle, by node doubling."""
    if abs(zeta) >= r:
        raise ValueError("zeta must lie strictly inside the circle")
    n = poly.degree
    corr = (n / 2.0) * math.log1p(r * r)
    b = _circle_fourier_coeffs(poly.coefficients, n, r)
    m = max(128, _next_pow2(8 * (n + 1)))
    prev = None
    while m <= node_cap:
        theta = 2.0 * np.pi * np.arange(m) / m
        vals = _eval_circle_grid(b, m)[0]
        logs = _patched_logs(b, vals, theta) + corr
        z = r * np.exp(1j * theta)
        kern = (r * r - abs(zeta) ** 2) / np.abs(z - zeta) ** 2
        cur = float(np.mean(kern * logs))
        if prev is not None and abs(cur - prev) < target:
            return cur
        prev = cur
        m *= 2
    raise QuadratureError("Poisson-weighted average did not converge", prev, np.nan)
