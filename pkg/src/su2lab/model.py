"""Random SU(2) polynomials: sampling, stable evaluation, structural transforms.

The central object is the degree-``N`` polynomial

    psi(z) = sum_j alpha_j * sqrt(C(N, j)) * z^j

with i.i.d. standard complex Gaussian coefficients ``alpha_j``
(``E|alpha_j|^2 = 1``).  Binomial weights are kept in log form throughout:
``C(N, N/2)`` overflows doubles near ``N ~ 1030``, so linear-domain weights
are only materialized under an explicit overflow guard.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rng import RngSeed, gaussian_matrix

__all__ = [
    "SU2Polynomial",
    "BasisChangeMatrix",
    "log_binomial",
    "sample_polynomial",
    "evaluate",
    "evaluate_normalized",
    "reverse_coefficients",
    "basis_change_matrix",
    "eq2_identity_residual",
    "fs_inner_product",
]

EVALUATE_MAX_DEGREE = 1000
EVALUATE_MAX_TERM_LOG = 700.0


def log_binomial(n: int, j: int) -> float:
    """Natural log of C(n, j), via log-gamma (never raw factorials)."""
    if not 0 <= j <= n:
        raise ValueError(f"j={j} outside [0, {n}]")
    return math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)


def _log_weights(degree: int) -> np.ndarray:
    """log sqrt(C(N, j)) for j = 0..N."""
    return np.array([0.5 * log_binomial(degree, j) for j in range(degree + 1)])


@dataclass(frozen=True)
class SU2Polynomial:
    """Degree ``N`` plus coefficient vector against the weighted monomials.

    ``coefficients[j]`` multiplies ``sqrt(C(N, j)) z^j``; the vector has
    length exactly ``degree + 1`` and must be finite.
    """

    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        coeffs = np.array(self.coefficients, dtype=complex, copy=True)
        if coeffs.shape != (self.degree + 1,):
            raise ValueError(
                f"need {self.degree + 1} coefficients, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs.real) & np.isfinite(coeffs.imag)):
            raise ValueError("coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    def log_weights(self) -> np.ndarray:
        return _log_weights(self.degree)

    def weighted_coefficients(self) -> np.ndarray:
        """Monomial coefficients alpha_j * sqrt(C(N, j)).

        Overflows for degree beyond ~1030; callers holding large degrees
        must stay in log space.
        """
        return self.coefficients * np.exp(self.log_weights())


def sample_polynomial(degree: int, seed: RngSeed) -> SU2Polynomial:
    """Draw alpha_j i.i.d. standard complex Gaussian for the given trial.

    Pure function of ``(degree, seed.master_seed, seed.trial_index)``.
    """
    trials = np.array([seed.trial_index], dtype=np.uint64)
    alpha = gaussian_matrix(seed.master_seed, trials, degree + 1)[0]
    return SU2Polynomial(degree, alpha)


def evaluate(poly: SU2Polynomial, z: complex) -> complex:
    """psi(z) by Horner on the weighted coefficients.

    Guarded: refuses inputs whose individual terms would leave double
    range; use :func:`evaluate_normalized` for those.
    """
    n = poly.degree
    if n > EVALUATE_MAX_DEGREE:
        raise OverflowError(
            f"degree {n} > {EVALUATE_MAX_DEGREE}: use evaluate_normalized"
        )
    az = abs(z)
    logz = math.log(az) if az > 0 else -math.inf
    logw = poly.log_weights()
    with np.errstate(divide="ignore", invalid="ignore"):
        amag = np.abs(poly.coefficients)
        term_logs = np.where(amag > 0, np.log(np.where(amag > 0, amag, 1.0)), -math.inf)
        term_logs = term_logs + logw + np.arange(n + 1) * logz
    if np.max(term_logs) >= EVALUATE_MAX_TERM_LOG:
        raise OverflowError(
            "term magnitude exceeds double range: use evaluate_normalized"
        )
    w = poly.weighted_coefficients()
    acc = 0.0 + 0.0j
    for k in range(n, -1, -1):
        acc = acc * z + w[k]
    return acc


def evaluate_normalized(poly: SU2Polynomial, z):
    """psi(z) / (1 + |z|^2)^(N/2), finite for any degree.

    Each term is assembled in log space, so its magnitude never exceeds
    |alpha_j| (the normalized weights C(N,j)|z|^(2j)/(1+|z|^2)^N are <= 1).
    Accepts a complex scalar or an ndarray of points.
    """
    scalar = np.isscalar(z) or np.asarray(z).shape == ()
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    n = poly.degree
    j = np.arange(n + 1)
    logw = poly.log_weights()
    az = np.abs(zs)
    out = np.empty(zs.shape, dtype=complex)
    pos = az > 0
    if np.any(pos):
        zp = zs[pos]
        azp = az[pos]
        logmag = logw[None, :] + np.outer(np.log(azp), j) \
            - (n / 2.0) * np.log1p(azp * azp)[:, None]
        phase = np.outer(np.angle(zp), j)
        terms = poly.coefficients[None, :] * np.exp(logmag + 1j * phase)
        out[pos] = terms.sum(axis=1)
    out[~pos] = poly.coefficients[0]
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def reverse_coefficients(poly: SU2Polynomial) -> SU2Polynomial:
    """alpha_j -> alpha_{N-j}; sends every nonzero root z0 to 1/z0.

    The weight symmetry C(N, j) = C(N, N-j) makes the reversed vector a
    valid coefficient vector for the same weighted basis.
    """
    return SU2Polynomial(poly.degree, poly.coefficients[::-1])


@dataclass(frozen=True)
class BasisChangeMatrix:
    """Unitary coefficient transform attached to a recentering point."""

    center: complex
    matrix: np.ndarray


def _dyadic(x: float) -> tuple[int, int]:
    """Exact (numerator, shift) with x = numerator / 2**shift."""
    f = Fraction(x)
    shift = f.denominator.bit_length() - 1
    return f.numerator, shift


def _gaussian_int_powers(re: int, im: int, n: int) -> list[tuple[int, int]]:
    out = [(1, 0)]
    for _ in range(n):
        a, b = out[-1]
        out.append((a * re - b * im, a * im + b * re))
    return out


def _float_from_gaussian_int(re: int, im: int, log_scale: float) -> complex:
    """(re + i*im) * exp(log_scale) without leaving double range."""
    if re == 0 and im == 0:
        return 0.0 + 0.0j
    sh = max(re.bit_length(), im.bit_length()) - 52
    if sh > 0:
        ref, imf = float(re >> sh), float(im >> sh)
    else:
        sh = 0
        ref, imf = float(re), float(im)
    mag = math.hypot(ref, imf)
    phase = math.atan2(imf, ref)
    return cmath.exp(complex(math.log(mag) + sh * math.log(2.0) + log_scale, phase))


def _expansion_matrix(degree: int, center: complex) -> np.ndarray:
    """Matrix whose column j expands the recentered basis element

        sqrt(C(N,j)) (z - c)^j (1 + conj(c) z)^(N-j) / (1 + |c|^2)^(N/2)

    against the weighted monomials sqrt(C(N,k)) z^k.

    Floats are exact dyadic rationals, so the two binomial expansions and
    their convolution run over scaled Gaussian integers; floats reappear
    only in the final per-entry normalization.  A plain float convolution
    loses ~C(N, N/2) worth of cancellation (1e-3 absolute error at N=100)
    and cannot meet the unitarity budget.
    """
    n = degree
    c = complex(center)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError("center must be finite")
    ar, sr = _dyadic(c.real)
    ai, si = _dyadic(c.imag)
    s = max(sr, si)
    a = ar << (s - sr)
    b = ai << (s - si)
    # center = (a + i b) / 2^s
    neg_pows = _gaussian_int_powers(-a, -b, n)  # (-(a+ib))^m
    conj_pows = _gaussian_int_powers(a, -b, n)  # (a-ib)^m
    two_pows = [1 << (s * i) for i in range(n + 1)]
    log_one_plus = math.log((1 << (2 * s)) + a * a + b * b) - 2 * s * math.log(2.0)
    logw = _log_weights(n)
    mat = np.empty((n + 1, n + 1), dtype=complex)
    for j in range(n + 1):
        # coefficients of (2^s z - (a+ib))^j and (2^s + (a-ib) z)^(N-j)
        f = [
            (math.comb(j, i) * two_pows[i] * neg_pows[j - i][0],
             math.comb(j, i) * two_pows[i] * neg_pows[j - i][1])
            for i in range(j + 1)
        ]
        g = [
            (math.comb(n - j, m) * two_pows[n - j - m] * conj_pows[m][0],
             math.comb(n - j, m) * two_pows[n - j - m] * conj_pows[m][1])
            for m in range(n - j + 1)
        ]
        conv = [[0, 0] for _ in range(n + 1)]
        for i in range(j + 1):
            fr, fi = f[i]
            row = conv
            for m in range(n - j + 1):
                gr, gi = g[m]
                cell = row[i + m]
                cell[0] += fr * gr - fi * gi
                cell[1] += fr * gi + fi * gr
        base = logw[j] - (n / 2.0) * log_one_plus - n * s * math.log(2.0)
        for k in range(n + 1):
            mat[k, j] = _float_from_gaussian_int(
                conv[k][0], conv[k][1], base - logw[k]
            )
    return mat


def basis_change_matrix(degree: int, center: complex) -> BasisChangeMatrix:
    """Unitary U with ``alpha' = U alpha`` re-expressing psi in the
    recentered orthonormal family:

        sum_j alpha_j sqrt(C(N,j)) z^j
          = sum_j alpha'_j sqrt(C(N,j)) (z-c)^j (1+conj(c) z)^(N-j)
            / (1+|c|^2)^(N/2)

    Columns of ``U.conj().T`` hold the monomial-basis expansions of the
    recentered basis elements.
    """
    mat = _expansion_matrix(degree, center)
    return BasisChangeMatrix(center=complex(center), matrix=mat.conj().T)


def _recentered_basis_values(degree: int, center: complex, z: complex) -> np.ndarray:
    """Values of the recentered basis elements at one point, in log space."""
    n = degree
    u = z - center
    v = 1 + np.conj(center) * z
    logw = _log_weights(n)
    j = np.arange(n + 1)

    def _logmag_phase(w: complex) -> tuple[float, float]:
        m = abs(w)
        return (math.log(m) if m > 0 else -math.inf), cmath.phase(w)

    lu, pu = _logmag_phase(u)
    lv, pv = _logmag_phase(v)
    with np.errstate(invalid="ignore"):
        logmag = logw + np.where(j > 0, j * lu, 0.0) \
            + np.where(n - j > 0, (n - j) * lv, 0.0) \
            - (n / 2.0) * math.log1p(abs(center) ** 2)
    phase = j * pu + (n - j) * pv
    vals = np.exp(logmag + 1j * phase)
    vals[np.isneginf(logmag)] = 0.0
    return vals


def eq2_identity_residual(poly: SU2Polynomial, center: complex, sample_points) -> float:
    """Max relative gap between psi in monomial form and in recentered form.

    Evaluates the left side with the original coefficients and the right
    side with ``alpha' = U alpha`` at each sample point.
    """
    u = basis_change_matrix(poly.degree, center).matrix
    alpha_prime = u @ poly.coefficients
    worst = 0.0
    for z in sample_points:
        left = evaluate(poly, z)
        right = complex(np.sum(alpha_prime * _recentered_basis_values(poly.degree, center, z)))
        scale = max(abs(left), abs(right))
        if scale > 0:
            worst = max(worst, abs(left - right) / scale)
    return worst


def _normalized_values_on_grid(poly: SU2Polynomial, ambient_degree: int,
                               z: np.ndarray) -> np.ndarray:
    """psi(z) / (1+|z|^2)^(ambient/2) on an array of points."""
    vals = evaluate_normalized(poly, z)
    gap = poly.degree - ambient_degree
    if gap:
        vals = vals * np.power(1.0 + np.abs(z) ** 2, gap / 2.0)
    return vals


def fs_inner_product(f: SU2Polynomial, g: SU2Polynomial, degree: int) -> complex:
    """Invariant inner product on polynomials of degree <= N:

        ((N+1)/pi) * Int f(z) conj(g(z)) (1+|z|^2)^(-(N+2)) dm(z)

    The substitution t = rho^2/(1+rho^2) makes the radial integrand a
    polynomial of degree <= N in t, handled exactly by Gauss-Legendre with
    N/2 + 2 nodes; the angular average is an exact uniform rule with
    2N + 2 points.
    """
    n = degree
    if f.degree > n or g.degree > n:
        raise ValueError("polynomial degree exceeds the ambient degree")
    n_rad = n // 2 + 2
    n_ang = 2 * n + 2
    nodes, weights = np.polynomial.legendre.leggauss(n_rad)
    t = 0.5 * (nodes + 1.0)  # map to (0, 1)
    w = 0.5 * weights
    rho = np.sqrt(t / (1.0 - t))
    theta = 2.0 * np.pi * np.arange(n_ang) / n_ang
    z = rho[:, None] * np.exp(1j * theta)[None, :]
    fv = _normalized_values_on_grid(f, n, z)
    gv = _normalized_values_on_grid(g, n, z)
    ang = (fv * np.conj(gv)).sum(axis=1)
    return complex((n + 1) / n_ang * np.sum(w * ang))
