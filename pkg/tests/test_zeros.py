import math

import numpy as np
import pytest

from conftest import match_max_distance
from su2lab import model, zeros
from su2lab.model import SU2Polynomial


def random_poly(rng, degree):
    a = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    return SU2Polynomial(degree, a / math.sqrt(2.0))


class TestFindAllRoots:
    def test_roots_of_unity(self):
        n = 16
        p = SU2Polynomial(n, [-1] + [0] * (n - 1) + [1])  # C(n,n)=1 so psi=z^n-1
        zs = zeros.find_all_roots(p)
        want = np.exp(2j * np.pi * np.arange(n) / n)
        assert match_max_distance(zs.locations, want) <= 1e-10
        assert zs.degree_deficit == 0

    def test_linear(self):
        zs = zeros.find_all_roots(SU2Polynomial(1, [3, 2]))
        assert zs.locations[0] == pytest.approx(-1.5)

    def test_double_root_at_origin(self):
        zs = zeros.find_all_roots(SU2Polynomial(2, [0, 0, 1]))
        assert len(zs.locations) == 2
        assert np.max(np.abs(zs.locations)) == 0.0

    def test_random_full_degree(self):
        rng = np.random.default_rng(42)
        p = random_poly(rng, 100)
        zs = zeros.find_all_roots(p)
        assert len(zs.locations) == 100
        assert zs.residuals.max() <= 1e-8

    def test_truncation_deficit(self):
        p = SU2Polynomial(3, [1.0, 1.0, 1.0, 1e-16])
        zs = zeros.find_all_roots(p)
        assert zs.degree_deficit == 1
        assert len(zs.locations) == 2

    def test_conservation_invariant(self):
        rng = np.random.default_rng(3)
        for n in (1, 2, 9, 33, 64):
            zs = zeros.find_all_roots(random_poly(rng, n))
            assert len(zs.locations) + zs.degree_deficit == n

    def test_rejects_degree_zero_and_null(self):
        with pytest.raises(ValueError):
            zeros.find_all_roots(SU2Polynomial(0, [1.0]))
        with pytest.raises(ValueError):
            zeros.find_all_roots(SU2Polynomial(2, [0, 0, 0]))


class TestCountFromRoots:
    def test_linear_cases(self):
        zs = zeros.find_all_roots(SU2Polynomial(1, [1, 1]))  # root -1
        assert zeros.count_zeros_from_roots(zs, zeros.Disk(0, 0.5)).count == 0
        assert zeros.count_zeros_from_roots(zs, zeros.Disk(0, 2.0)).count == 1

    def test_multiplicity(self):
        zs = zeros.find_all_roots(SU2Polynomial(2, [0, 0, 1]))
        assert zeros.count_zeros_from_roots(zs, zeros.Disk(0, 0.1)).count == 2

    def test_boundary_flagging(self):
        zs = zeros.find_all_roots(SU2Polynomial(1, [1, 1]))  # root exactly at -1
        zc = zeros.count_zeros_from_roots(zs, zeros.Disk(0, 1.0))
        assert zc.near_boundary == 1
        assert zc.count == 0  # strict inequality

    def test_off_center_disk(self):
        zs = zeros.find_all_roots(SU2Polynomial(1, [1, 1]))
        assert zeros.count_zeros_from_roots(zs, zeros.Disk(-1 + 0j, 0.3)).count == 1


class TestArgumentPrinciple:
    def test_monomial_multiplicity(self):
        p = SU2Polynomial(2, [0, 0, 1])
        zc = zeros.count_zeros_argument_principle(p, zeros.Disk(0, 1.0))
        assert zc.count == 2
        assert zc.method == "argument_principle"

    def test_linear_cases(self):
        p = SU2Polynomial(1, [1, 1])
        assert zeros.count_zeros_argument_principle(p, zeros.Disk(0, 0.5)).count == 0
        assert zeros.count_zeros_argument_principle(p, zeros.Disk(0, 2.0)).count == 1

    def test_near_boundary_zero_rejected(self):
        p = SU2Polynomial(1, [1, 1])  # root at -1
        with pytest.raises(zeros.ContourError):
            zeros.count_zeros_argument_principle(p, zeros.Disk(0, 1.0 + 1e-12))

    def test_off_center_contour(self):
        p = SU2Polynomial(2, [1, 0, 1])  # zeros at +-i
        assert zeros.count_zeros_argument_principle(
            p, zeros.Disk(1j, 0.5)
        ).count == 1

    def test_cross_oracle_agreement(self):
        rng = np.random.default_rng(17)
        checked = 0
        while checked < 60:
            n = int(rng.integers(1, 51))
            p = random_poly(rng, n)
            r = (0.5, 1.0, 2.0)[checked % 3]
            zs = zeros.find_all_roots(p)
            by_roots = zeros.count_zeros_from_roots(zs, zeros.Disk(0, r))
            if by_roots.near_boundary:
                continue
            by_phase = zeros.count_zeros_argument_principle(p, zeros.Disk(0, r))
            assert by_phase.count == by_roots.count
            checked += 1


class TestCircleLogIntegral:
    def test_constant(self):
        assert zeros.circle_log_integral(SU2Polynomial(0, [3.0]), 1.0) == \
            pytest.approx(math.log(3.0), abs=1e-12)

    def test_no_zeros_mean_value(self):
        assert zeros.circle_log_integral(SU2Polynomial(1, [1, 1]), 0.5) == \
            pytest.approx(0.0, abs=1e-9)

    def test_single_zero_inside(self):
        assert zeros.circle_log_integral(SU2Polynomial(1, [1, 1]), 2.0) == \
            pytest.approx(math.log(2.0), abs=1e-9)

    def test_zero_on_circle_fails_at_cap(self):
        # root at distance ~1e-12 from the circle cannot converge
        p = SU2Polynomial(1, [1 + 1e-12, 1])
        with pytest.raises(zeros.QuadratureError) as err:
            zeros.circle_log_integral(p, 1.0)
        assert math.isfinite(err.value.best_estimate)

    def test_abs_log_integral_constant(self):
        # |log| of a unit constant is 0, below any outlier threshold
        assert zeros.circle_abs_log_integral(SU2Polynomial(0, [1.0]), 1.0) == \
            pytest.approx(0.0, abs=1e-12)

    def test_abs_log_integral_nonnegative_integrand(self):
        # psi = 1 + z on r = 2: |1 + 2e^{it}| >= 1, so |log| and log agree
        p = SU2Polynomial(1, [1, 1])
        assert zeros.circle_abs_log_integral(p, 2.0) == pytest.approx(
            zeros.circle_log_integral(p, 2.0), abs=1e-9
        )

    def test_abs_log_integral_splits_signs(self):
        # psi = 1 + z on r = 1.2: |psi| crosses 1, so mean |log| > mean log;
        # oracle: dense fixed-grid trapezoid, independent of the adaptive path
        r = 1.2
        theta = 2 * np.pi * np.arange(1 << 22) / (1 << 22)
        logs = 0.5 * np.log(1 + r * r + 2 * r * np.cos(theta))
        p = SU2Polynomial(1, [1, 1])
        mean_abs = zeros.circle_abs_log_integral(p, r)
        assert mean_abs == pytest.approx(float(np.mean(np.abs(logs))), abs=1e-6)
        assert mean_abs > zeros.circle_log_integral(p, r) + 0.05


class TestJensen:
    def test_linear_exact(self):
        assert zeros.jensen_residual(SU2Polynomial(1, [1, 1]), 2.0) <= 1e-10

    def test_random_instances(self):
        rng = np.random.default_rng(8)
        done = 0
        while done < 12:
            n = int(rng.integers(1, 51))
            p = random_poly(rng, n)
            zs = zeros.find_all_roots(p)
            if np.min(np.abs(np.abs(zs.locations) - 1.0)) < 1e-3:
                continue
            if abs(p.coefficients[0]) <= 1e-12 * np.abs(p.coefficients).max():
                continue
            assert zeros.jensen_residual(p, 1.0) <= 1e-6
            done += 1

    def test_zero_at_origin_rejected(self):
        with pytest.raises(ValueError):
            zeros.jensen_residual(SU2Polynomial(1, [0, 1]), 1.0)

    def test_two_radius_difference(self):
        # annulus Jensen: circle-average difference balances root terms
        rng = np.random.default_rng(12)
        r, kappa = 1.0, 1.2
        done = 0
        while done < 8:
            n = int(rng.integers(1, 31))
            p = random_poly(rng, n)
            mods = np.abs(zeros.find_all_roots(p).locations)
            if np.min(np.abs(mods - r)) < 1e-3 or np.min(np.abs(mods - kappa * r)) < 1e-3:
                continue
            inside = mods < r
            annulus = (mods > r) & (mods < kappa * r)
            lhs = float(np.sum(np.log(kappa * r / mods[annulus]))) \
                + int(inside.sum()) * math.log(kappa)
            rhs = zeros.circle_log_integral(p, kappa * r) \
                - zeros.circle_log_integral(p, r)
            assert abs(lhs - rhs) <= 1e-6
            done += 1


class TestReversalDuality:
    def test_roots_invert(self):
        rng = np.random.default_rng(31)
        done = 0
        while done < 15:
            n = int(rng.integers(1, 31))
            p = random_poly(rng, n)
            fwd = zeros.find_all_roots(p).locations
            if np.min(np.abs(fwd)) < 1e-6:
                continue
            rev = zeros.find_all_roots(model.reverse_coefficients(p)).locations
            assert match_max_distance(rev, 1.0 / fwd) <= 1e-8
            done += 1

    def test_count_complement(self):
        # zeros of psi in B(0,r) <-> N minus zeros of reversal in closed B(0,1/r)
        rng = np.random.default_rng(32)
        r = 1.3
        done = 0
        while done < 10:
            n = int(rng.integers(1, 31))
            p = random_poly(rng, n)
            zs = zeros.find_all_roots(p)
            if zeros.count_zeros_from_roots(zs, zeros.Disk(0, r)).near_boundary:
                continue
            inside = zeros.count_zeros_from_roots(zs, zeros.Disk(0, r)).count
            rev = zeros.find_all_roots(model.reverse_coefficients(p))
            rev_inside_closed = int(np.sum(np.abs(rev.locations) <= 1.0 / r))
            assert inside == n - rev_inside_closed
            done += 1


class TestMaxModulus:
    def test_constant(self):
        mm = zeros.max_modulus_boundary(SU2Polynomial(0, [2.5]), 1.0)
        assert mm.value == pytest.approx(2.5, rel=1e-12)

    def test_positive_coefficients_peak_on_axis(self):
        rng = np.random.default_rng(2)
        n = 20
        p = SU2Polynomial(n, np.abs(rng.standard_normal(n + 1)))
        r = 1.3
        mm = zeros.max_modulus_boundary(p, r)
        # triangle equality: the maximum sits at z = r
        at_r = abs(model.evaluate(p, r)) if n <= 30 else None
        assert abs(mm.argmax - r) <= 1e-6
        assert mm.value == pytest.approx(at_r, rel=1e-10)

    def test_against_dense_scan(self):
        # oracle: brute-force Horner max on a grid fine enough that the
        # grid-max error (~(pi N h)^2) sits below the comparison tolerance
        rng = np.random.default_rng(44)
        n = 50
        a = (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)) / math.sqrt(2)
        p = SU2Polynomial(n, a)
        mm = zeros.max_modulus_boundary(p, 1.0)
        w = p.weighted_coefficients()
        x = np.exp(2j * np.pi * np.arange(1 << 21) / (1 << 21))
        acc = np.zeros_like(x)
        for k in range(n, -1, -1):
            acc = acc * x + w[k]
        dense = float(np.max(np.abs(acc)))
        assert mm.value == pytest.approx(dense, rel=1e-8)

    def test_log_safe_form(self):
        n = 600  # value ~ e^210: still representable
        p = SU2Polynomial(n, np.ones(n + 1))
        mm = zeros.max_modulus_boundary(p, 1.0)
        assert math.isfinite(mm.value)
        assert mm.log_value == pytest.approx(math.log(mm.value), rel=1e-12)
        n = 2400  # value ~ e^834: past double range, log form survives
        p = SU2Polynomial(n, np.ones(n + 1))
        mm = zeros.max_modulus_boundary(p, 1.0)
        assert mm.value == math.inf
        assert math.isfinite(mm.log_value)
        assert mm.log_value > 0.5 * n * math.log(2)


class TestPoissonKernel:
    def test_center_is_one(self):
        for z in (1.0, 1j, np.exp(0.3j)):
            assert zeros.poisson_kernel(0.0, complex(z), 1.0) == pytest.approx(1.0)

    def test_mean_one(self):
        theta = 2 * np.pi * np.arange(4096) / 4096
        for zeta, r in ((0.3 + 0.2j, 1.0), (0.9, 1.0), (1.5j, 2.0)):
            vals = [zeros.poisson_kernel(zeta, r * np.exp(1j * t), r) for t in theta]
            assert abs(np.mean(vals) - 1.0) <= 1e-10

    def test_half_radius_bounds(self):
        # sources at |zeta| = r/2 keep the kernel within [1/3, 3]
        theta = 2 * np.pi * np.arange(512) / 512
        for r in (1.0, 2.5):
            zeta = 0.5 * r * np.exp(0.7j)
            vals = [zeros.poisson_kernel(zeta, r * np.exp(1j * t), r) for t in theta]
            assert min(vals) >= 1.0 / 3.0 - 1e-12
            assert max(vals) <= 3.0 + 1e-12

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            zeros.poisson_kernel(1.5, 1.0, 1.0)
        with pytest.raises(ValueError):
            zeros.poisson_kernel(0.0, 0.5, 1.0)  # z off the circle


class TestPoissonPartition:
    def test_sources_at_center(self):
        assert zeros.poisson_partition_deviation(7, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_sqrt_scaling_stays_bounded(self):
        for delta in (1e-2, 1e-3, 1e-4):
            kappa = 1.0 - delta**0.25
            m = int(math.ceil(1.0 / delta))
            val = zeros.poisson_partition_deviation(m, kappa, 1.0, delta)
            assert val / math.sqrt(delta) <= 3.0

    def test_refinement_stability(self):
        for m in (8, 32):
            v1 = zeros.poisson_partition_deviation(m, 0.6, 1.0, 0.0)
            v2 = zeros.poisson_partition_deviation(2 * m, 0.6, 1.0, 0.0)
            assert v2 <= 2.0 * v1 + 1e-15

    def test_geometry_violation(self):
        with pytest.raises(ValueError):
            zeros.poisson_partition_deviation(4, 0.9, 1.0, 0.2)


class TestSubharmonic:
    def test_log_value_below_poisson_average(self):
        rng = np.random.default_rng(55)
        r = 1.0
        for _ in range(8):
            n = int(rng.integers(1, 31))
            p = random_poly(rng, n)
            zeta = rng.uniform(0, r / 2) * np.exp(2j * np.pi * rng.uniform())
            val = abs(model.evaluate(p, zeta))
            if val == 0:
                continue
            avg = zeros.poisson_log_average(p, complex(zeta), r)
            assert math.log(val) <= avg + 1e-8
