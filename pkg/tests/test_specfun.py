import cmath
import math
import unittest

import mpmath
import numpy as np

from xiflow.errors import DomainError, PoleError, SingularityError
from xiflow.specfun import (
    TruncationConfig,
    cauchy_derivative,
    digamma,
    gamma,
    xi,
    xi_array,
    xi_derivative,
    xi_hadamard_truncated,
    xi_jet,
    xi_log_derivative_via_zeros,
    xi_unreflected,
    zeta,
    zeta_log_derivative,
)
from xiflow.zeros import locate_zeros

mpmath.mp.dps = 30


def mp_xi(s):
    s = mpmath.mpc(s.real, s.imag)
    return complex(0.5 * s * (s - 1) * mpmath.gamma(s / 2) * mpmath.pi ** (-s / 2) * mpmath.zeta(s))


def relative(a, b):
    return abs(a - b) / abs(b)


class TestGamma(unittest.TestCase):
    def test_classical_values(self):
        """
        Test Gamma at 1, 1/2 and 5.
        """
        self.assertAlmostEqual(gamma(1), 1.0, places=14)
        self.assertAlmostEqual(gamma(0.5).real, math.sqrt(math.pi), places=14)
        self.assertLess(relative(gamma(5), 24.0), 1e-14)

    def test_against_mpmath(self):
        """
        Test the Lanczos value, with reflection, against mpmath.
        """
        for z in (3 + 4j, 0.5 + 10j, -2.5 + 1j, 7 - 3j, 1 + 60j, -9.5 + 20j, 10 - 60j):
            self.assertLess(relative(gamma(z), complex(mpmath.gamma(z))), 1e-12, z)

    def test_poles(self):
        """
        Test that nonpositive integers raise PoleError.
        """
        for z in (0, -1, -3):
            with self.assertRaises(PoleError):
                gamma(z)


class TestDigamma(unittest.TestCase):
    def test_telescoping_values(self):
        """
        Test psi(1) = -gamma and psi(2) = 1 - gamma.
        """
        self.assertAlmostEqual(digamma(1).real, -0.5772156649015329, places=12)
        self.assertAlmostEqual(digamma(2).real, 1.0 - 0.5772156649015329, places=12)

    def test_against_mpmath(self):
        """
        Test complex arguments against mpmath's digamma.
        """
        for z in (0.5 + 10j, -2.5 + 3j, 40 - 70j, 3.25):
            self.assertLess(abs(digamma(z) - complex(mpmath.digamma(z))), 1e-10, z)

    def test_poles(self):
        with self.assertRaises(PoleError):
            digamma(-2)


class TestZeta(unittest.TestCase):
    def test_special_values(self):
        """
        Test zeta(2), zeta(0), zeta(-1) and a trivial zero.
        """
        self.assertLess(relative(zeta(2), math.pi ** 2 / 6), 1e-13)
        self.assertAlmostEqual(zeta(0).real, -0.5, places=13)
        self.assertAlmostEqual(zeta(-1).real, -1.0 / 12.0, places=13)
        self.assertEqual(zeta(-2), 0j)

    def test_against_direct_sum(self):
        """
        Test zeta(3) against a brute-force Dirichlet sum plus its integral tail.
        """
        n = np.arange(1, 10 ** 6 + 1, dtype=float)
        direct = np.sum(n[::-1] ** -3.0) + 0.5 * (10.0 ** 6) ** -2
        self.assertLess(relative(zeta(3), direct), 1e-10)

    def test_against_mpmath(self):
        """
        Test both half-planes up to height 60.
        """
        for s in (0.7 + 45j, 2 - 30j, 0.5 + 60j, -1.5 + 20j, 0.25 + 5j):
            self.assertLess(relative(zeta(s), complex(mpmath.zeta(s))), 1e-10, s)

    def test_pole(self):
        with self.assertRaisesRegex(PoleError, "pole at s=1"):
            zeta(1)


class TestXi(unittest.TestCase):
    def test_limit_points(self):
        """
        Test xi(0) = xi(1) = 1/2 and xi(1/2).
        """
        self.assertAlmostEqual(xi(0).real, 0.5, places=14)
        self.assertAlmostEqual(xi(1).real, 0.5, places=14)
        self.assertAlmostEqual(xi(0.5).real, 0.4971207781883141, places=12)

    def test_against_mpmath(self):
        """
        Test xi against the defining product evaluated by mpmath.
        """
        for s in (2 + 0j, 0.3 + 7j, -1.5 + 25j, 3 - 50j, 0.5 + 17j):
            self.assertLess(relative(xi(s), mp_xi(s)), 1e-10, s)

    def test_functional_equation_grid(self):
        """
        Test xi(s) = xi(1 - s) and xi(conj s) = conj xi(s) on a 40x40 grid.
        """
        re = np.linspace(-2.0, 3.0, 40)
        im = np.linspace(-50.0, 50.0, 40)
        grid = re[None, :] + 1j * im[:, None]
        values = xi_array(grid)
        scale = 1.0 + np.abs(values)
        self.assertLessEqual(np.max(np.abs(values - xi_array(1.0 - grid)) / scale), 1e-10)
        self.assertLessEqual(np.max(np.abs(xi_array(np.conj(grid)) - np.conj(values)) / scale), 1e-12)

    def test_reality_on_critical_line(self):
        """
        Test that xi is real on Re s = 1/2.
        """
        values = xi_array(0.5 + 1j * np.linspace(0.0, 60.0, 241))
        self.assertLessEqual(np.max(np.abs(values.imag) / (1.0 + np.abs(values))), 1e-10)

    def test_array_matches_scalar(self):
        points = np.array([0.2 + 3j, 1.7 - 9j, 0.5 + 30j])
        values = xi_array(points)
        for point, value in zip(points, values):
            self.assertLess(relative(value, xi(point)), 1e-12)

    def test_height_limit(self):
        with self.assertRaises(DomainError):
            xi(0.5 + 250j)

    def test_unreflected_path(self):
        """
        Test xi at s itself, left of the critical line, against mpmath and the reflected value.
        """
        points = np.array([-0.7 + 3j, 0.2 + 14j, -1.0 + 40j, 0.45 - 22j])
        values = xi_unreflected(points)
        for point, value in zip(points, values):
            self.assertLess(relative(value, mp_xi(point)), 1e-10, point)
            self.assertLess(relative(value, xi(point)), 1e-10, point)
        with self.assertRaises(DomainError):
            xi_unreflected(0.7 + 3j)


class TestXiDerivative(unittest.TestCase):
    def test_symmetry_point(self):
        """
        Test xi'(1/2) = 0.
        """
        self.assertLess(abs(xi_derivative(0.5)), 1e-10)

    def test_central_differences(self):
        """
        Test the contour derivative against central differences with h = 1e-5.
        """
        rng = np.random.default_rng(7)
        points = rng.uniform(-1.0, 2.0, 20) + 1j * rng.uniform(5.0, 30.0, 20)
        h = 1e-5
        for s in points:
            difference = (xi(s + h) - xi(s - h)) / (2 * h)
            scale = abs(xi_derivative(s)) + abs(xi(s))
            self.assertLess(abs(xi_derivative(s) - difference), 1e-6 * scale, s)

    def test_second_derivative_against_mpmath(self):
        """
        Test xi'' against mpmath's numerical differentiation.
        """
        s = 0.8 + 4j
        expected = complex(mpmath.diff(lambda z: 0.5 * z * (z - 1) * mpmath.gamma(z / 2) * mpmath.pi ** (-z / 2) * mpmath.zeta(z), mpmath.mpc(0.8, 4), 2))
        self.assertLess(relative(xi_derivative(s, 2), expected), 1e-9)

    def test_jet(self):
        """
        Test that the jet returns the same value and derivatives as the single calls.
        """
        s = 0.3 + 11j
        value, first, second = xi_jet(s)
        self.assertLess(relative(value, xi(s)), 1e-13)
        self.assertLess(relative(first, xi_derivative(s, 1)), 1e-13)
        self.assertLess(relative(second, xi_derivative(s, 2)), 1e-13)

    def test_invalid_order(self):
        with self.assertRaises(DomainError):
            xi_derivative(0.5, 3)


class TestZetaLogDerivative(unittest.TestCase):
    def test_against_contour_derivative(self):
        """
        Test the prime sum at s=2 against zeta'/zeta from a contour derivative;
        the residual is the prime tail, about 1/pmax.
        """
        cfg = TruncationConfig(pmax=100_000, mmax=40)
        expected = cauchy_derivative(zeta, 2.0) / zeta(2.0)
        self.assertLess(abs(zeta_log_derivative(2.0, cfg) - expected), 1.5 / cfg.pmax)

    def test_real_axis(self):
        """
        Test that the sum is real for real s.
        """
        self.assertLessEqual(abs(zeta_log_derivative(3.0).imag), 1e-15)

    def test_single_term(self):
        """
        Test pmax=2, mmax=1, s=2.
        """
        value = zeta_log_derivative(2.0, TruncationConfig(pmax=2, mmax=1))
        self.assertAlmostEqual(value.real, -math.log(2.0) / 4.0, places=15)

    def test_divergent_region(self):
        """
        Test that Re s <= 1 needs the formal flag.
        """
        with self.assertRaises(DomainError):
            zeta_log_derivative(0.5 + 14j)
        value = zeta_log_derivative(0.5 + 14j, TruncationConfig(pmax=1000, mmax=3), formal=True)
        self.assertTrue(cmath.isfinite(value))


class TestZeroSums(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalogue = locate_zeros(180.0)

    def test_critical_point_is_real(self):
        """
        Test that each partial sum is real at q=1/2.
        """
        for m in (8, 16, 32, 64):
            value = xi_log_derivative_via_zeros(0.5, self.catalogue, TruncationConfig(m=m))
            self.assertLessEqual(abs(value.imag), 1e-12)

    def test_log_derivative_convergence(self):
        """
        Test that the error against xi'/xi at q=2 strictly decreases over the m ladder.
        """
        expected = xi_derivative(2.0) / xi(2.0)
        errors = [
            abs(xi_log_derivative_via_zeros(2.0, self.catalogue, TruncationConfig(m=m)) - expected)
            for m in (8, 16, 32, 64)
        ]
        for earlier, later in zip(errors, errors[1:]):
            self.assertGreater(earlier, later)

    def test_log_derivative_singularity(self):
        rho = self.catalogue.record(1).rho
        with self.assertRaises(SingularityError):
            xi_log_derivative_via_zeros(rho, self.catalogue, TruncationConfig(m=8))

    def test_hadamard_fixed_points(self):
        """
        Test q=0 gives xi(0) and q=rho_1 gives exactly zero.
        """
        cfg = TruncationConfig(m=16)
        self.assertAlmostEqual(xi_hadamard_truncated(0, self.catalogue, cfg).real, 0.5, places=13)
        self.assertEqual(xi_hadamard_truncated(self.catalogue.record(1).rho, self.catalogue, cfg), 0j)

    def test_hadamard_at_one(self):
        """
        Test that every conjugate pair is unity at q=1.
        """
        for m in (10, 20, 40):
            value = xi_hadamard_truncated(1.0, self.catalogue, TruncationConfig(m=m))
            self.assertLess(abs(value - xi(1.0)), 1e-12)

    def test_hadamard_convergence(self):
        """
        Test that the product error strictly decreases over the m ladder.
        """
        for q in (2.0, -1.0, 0.5):
            errors = [
                abs(xi_hadamard_truncated(q, self.catalogue, TruncationConfig(m=m)) - xi(q))
                for m in (8, 16, 32, 64)
            ]
            for earlier, later in zip(errors, errors[1:]):
                self.assertGreater(earlier, later, q)

    def test_truncation_beyond_catalogue(self):
        with self.assertRaises(DomainError):
            xi_hadamard_truncated(2.0, self.catalogue, TruncationConfig(m=len(self.catalogue) + 1))


class TestTruncationConfig(unittest.TestCase):
    def test_validation(self):
        """
        Test that every bound must be positive and pmax at least 2.
        """
        for kwargs in ({"m": 0}, {"pmax": 1}, {"mmax": 0}, {"nmax": 0}):
            with self.assertRaises(DomainError):
                TruncationConfig(**kwargs)


if __name__ == "__main__":
    unittest.main()
