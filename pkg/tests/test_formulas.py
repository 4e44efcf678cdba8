import cmath
import dataclasses
import math
import os
import tempfile
import unittest

import numpy as np

from xiflow.dynamics import integrate_hamiltonian
from xiflow.errors import DegenerateZeroError, DomainError, SingularityError
from xiflow.formulas import (
    action,
    delta_p_closed_form,
    flow_map_differential,
    fluctuation_term,
    log_derivative_tail_estimate,
    momentum_closed_form,
    newton_flow_elementary_time,
    newton_time_reparam,
    orbit_period,
    pm_momentum_root,
    pm_polynomial,
    prime_exponential_sum,
    prime_sieve,
    product_identity_residual,
    product_tail_estimate,
    quantized_energies,
)
from xiflow.specfun import TruncationConfig, xi, xi_derivative
from xiflow.zeros import ZeroCatalogue, ZeroRecord, locate_zeros

LADDER = (16, 32, 64)


def relative(a, b):
    return abs(a - b) / abs(b)


class TestMomentum(unittest.TestCase):
    def test_identity_at_start(self):
        self.assertEqual(momentum_closed_form(0.3 + 5j, 2 - 1j, 0.3 + 5j), 2 - 1j)

    def test_functional_equation_image(self):
        """
        Test that q = 1 - q0 has the same xi value, hence the same momentum.
        """
        q0 = 0.2 + 9j
        self.assertLess(relative(momentum_closed_form(q0, 1.5j, 1.0 - q0), 1.5j), 1e-10)

    def test_delta_p_at_start(self):
        self.assertEqual(delta_p_closed_form(0.3 + 5j, 1.0, 0.4, 0.7j, 0.3 + 5j), 0.7j)

    def test_delta_p_decoupled(self):
        """
        Test dq0 = 0: dp = xi(q0)/xi(q) dp0.
        """
        q0, q = 0.3 + 5j, 0.6 + 7j
        value = delta_p_closed_form(q0, 1.0, 0.0, 2.0, q)
        self.assertLess(relative(value, 2.0 * xi(q0) / xi(q)), 1e-13)

    def test_spectral_needs_catalogue(self):
        with self.assertRaises(DomainError):
            delta_p_closed_form(0.3 + 5j, 1.0, 1.0, 0.0, 0.6 + 7j, spectral=True)


class TestFlowMap(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalogue = locate_zeros(180.0)

    def test_structure(self):
        """
        Test m12 = 0, m11 m22 = 1 and det M = 1.
        """
        rng = np.random.default_rng(5)
        for q0, q in zip(rng.uniform(0, 1, 6) + 1j * rng.uniform(2, 25, 6), rng.uniform(-1, 2, 6) + 1j * rng.uniform(2, 25, 6)):
            matrix = flow_map_differential(q0, 1 + 1j, q)
            self.assertEqual(matrix.m12, 0j)
            self.assertLess(abs(matrix.det() - 1.0), 1e-12)

    def test_identity_at_start(self):
        """
        Test that the compact coupling entry vanishes when no time has elapsed.
        """
        q0 = 0.3 + 5j
        matrix = flow_map_differential(q0, 2.0, q0)
        self.assertEqual(matrix.m21, 0j)
        dq, dp = matrix.apply(0.5, 0.25)
        self.assertLess(abs(dq - 0.5), 1e-15)
        self.assertLess(abs(dp - 0.25), 1e-15)

    def test_spectral_coupling_ladder(self):
        """
        Test that the spectral m21 at q = q0 shrinks over the truncation ladder.
        """
        q0 = self.catalogue.record(1).rho + 0.005
        scale = abs(xi_derivative(q0) / xi(q0))
        ladder = [
            abs(flow_map_differential(q0, 1.0, q0, self.catalogue, TruncationConfig(m=m), spectral=True).m21)
            for m in (8,) + LADDER
        ]
        for earlier, later in zip(ladder, ladder[1:]):
            self.assertGreater(earlier, later)
        self.assertLessEqual(ladder[-1], 1e-3 * scale)

    def test_delta_p_forms_converge(self):
        """
        Test that the spectral and compact momentum perturbations approach each
        other, within twice the tail estimate.
        """
        q0, q = 0.3 + 5j, 0.8 + 3j
        compact = delta_p_closed_form(q0, 1.0, 1.0, 0.0, q)
        gaps = []
        for m in LADDER:
            cfg = TruncationConfig(m=m)
            spectral = delta_p_closed_form(q0, 1.0, 1.0, 0.0, q, self.catalogue, cfg, spectral=True)
            gaps.append(abs(spectral - compact))
            self.assertLessEqual(gaps[-1], 2.0 * log_derivative_tail_estimate(q, self.catalogue, cfg))
        for earlier, later in zip(gaps, gaps[1:]):
            self.assertGreater(earlier, later)


class TestProductIdentity(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalogue = locate_zeros(180.0)

    def test_start_point(self):
        self.assertEqual(product_identity_residual(0.3 + 5j, 1j, 0.3 + 5j, 1j, self.catalogue), 0j)

    def test_ladder(self):
        """
        Test the residual with the closed-form momentum over m = 16, 32, 64.
        """
        pairs = [(0.6 + 0.1j, 0.4 - 0.15j), (0.5 + 0.2j, 0.3 + 0.1j), (0.7, 0.45 - 0.2j)]
        for q0, q in pairs:
            p = momentum_closed_form(q0, 1.0, q)
            ladder = [abs(product_identity_residual(q0, 1.0, q, p, self.catalogue, TruncationConfig(m=m))) for m in LADDER]
            for earlier, later in zip(ladder, ladder[1:]):
                self.assertGreater(earlier, later)
            self.assertLessEqual(ladder[-1], 1e-3)
            self.assertLessEqual(ladder[-1], 2.0 * product_tail_estimate(q, q0, self.catalogue, TruncationConfig(m=64)))

    def test_ladder_at_height(self):
        """
        Test points up to height 30: the residual shrinks over the ladder and
        matches the truncation-tail estimate, which is far above 1e-3 there.
        """
        pairs = [(0.3 + 10j, 0.7 + 12j), (0.3 + 20j, 0.7 + 25j), (0.2 + 28j, 0.8 + 29j), (0.9 + 3j, 0.1 + 17j)]
        for q0, q in pairs:
            p = momentum_closed_form(q0, 1.0, q)
            ladder = [abs(product_identity_residual(q0, 1.0, q, p, self.catalogue, TruncationConfig(m=m))) for m in LADDER]
            for earlier, later in zip(ladder, ladder[1:]):
                self.assertGreater(earlier, later)
            estimate = product_tail_estimate(q, q0, self.catalogue, TruncationConfig(m=64))
            self.assertGreater(ladder[-1], 1e-3)
            self.assertLessEqual(ladder[-1], 2.0 * estimate)
            self.assertGreaterEqual(ladder[-1], 0.5 * estimate)

    def test_violation_detected(self):
        """
        Test that doubling the momentum gives a residual close to one.
        """
        q0, q = 0.6 + 0.1j, 0.4 - 0.15j
        p = 2.0 * momentum_closed_form(q0, 1.0, q)
        residual = product_identity_residual(q0, 1.0, q, p, self.catalogue, TruncationConfig(m=64))
        self.assertLess(abs(residual - 1.0), 1e-2)


class TestPolynomial(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalogue = locate_zeros(60.0)

    def test_start_point(self):
        cfg = TruncationConfig(m=10)
        self.assertEqual(pm_polynomial(0.3 + 2j, 1.5, 0.3 + 2j, 1.5, self.catalogue, cfg), 0j)

    def test_momentum_root(self):
        """
        Test that the solved momentum zeroes P_m at sampled q.
        """
        cfg = TruncationConfig(m=10)
        q0, p0 = 0.3 + 2j, 1.5 - 0.5j
        for q in (0.1 + 1j, 0.9 - 3j, 2.0 + 20j):
            p = pm_momentum_root(q, q0, p0, self.catalogue, cfg)
            scale = abs(p0 * pm_polynomial(q0, 1.0, 0.0, 0.0, self.catalogue, cfg))
            self.assertLess(abs(pm_polynomial(q, p, q0, p0, self.catalogue, cfg)), 1e-12 * scale)

    def test_zero_momentum_at_zero(self):
        cfg = TruncationConfig(m=10)
        rho = self.catalogue.record(1).rho
        self.assertNotEqual(pm_polynomial(rho, 0.0, 0.3 + 2j, 1.0, self.catalogue, cfg), 0j)

    def test_normalisation(self):
        """
        Test that the raw polynomial is the normalised one times prod |rho|^2.
        """
        cfg = TruncationConfig(m=5)
        rho = self.catalogue.rhos(5)
        norm = float(np.prod(np.abs(rho) ** 2))
        raw = pm_polynomial(0.1 + 3j, 2.0, 0.4 - 1j, 1j, self.catalogue, cfg, normalized=False)
        scaled = pm_polynomial(0.1 + 3j, 2.0, 0.4 - 1j, 1j, self.catalogue, cfg) * norm
        self.assertLess(relative(raw, scaled), 1e-12)

    def test_truncation_beyond_catalogue(self):
        with self.assertRaises(DomainError):
            pm_polynomial(0.1, 1.0, 0.2, 1.0, self.catalogue, TruncationConfig(m=len(self.catalogue) + 1))

    def test_raw_overflow(self):
        """
        Test that an overflowing raw product is reported as an overflow, not a singularity.
        """
        records = tuple(
            ZeroRecord(index=n, rho=complex(0.5, 1e100 * n), xi_prime=1j, period=2.0 * math.pi) for n in (1, 2)
        )
        catalogue = ZeroCatalogue(records=records)
        with self.assertRaisesRegex(DomainError, "overflows double precision") as context:
            pm_polynomial(0.1, 1.0, 0.2, 1.0, catalogue, TruncationConfig(m=2), normalized=False)
        self.assertNotIsInstance(context.exception, SingularityError)
        normalised = pm_polynomial(0.1, 1.0, 0.2, 1.0, catalogue, TruncationConfig(m=2))
        self.assertTrue(cmath.isfinite(normalised))


class TestNewtonTime(unittest.TestCase):
    def test_start_point(self):
        self.assertEqual(newton_time_reparam(0.3 + 5j, 0.3 + 5j), 0j)
        self.assertEqual(newton_time_reparam(0.3 + 5j, 0.3 + 5j, k=1), 2j * math.pi)

    def test_exponential_form(self):
        """
        Test exp(-T) = xi(q)/xi(q0) on several sheets.
        """
        q0, q = 0.3 + 5j, -0.4 + 11j
        for k in (-1, 0, 2):
            T = newton_time_reparam(q0, q, k)
            self.assertLess(relative(cmath.exp(-T), xi(q) / xi(q0)), 1e-12)


class TestPeriodsAndSpectrum(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalogue = locate_zeros(30.0)
        cls.zero = cls.catalogue.record(1)

    def test_period_is_real(self):
        """
        Test that 2 pi i / xi'(rho) is real with modulus equal to the record period.
        """
        for record in self.catalogue.records:
            period = orbit_period(record)
            self.assertLessEqual(abs(period.imag), 1e-8 * abs(period))
            self.assertLess(relative(abs(period), record.period), 1e-12)

    def test_scaling(self):
        """
        Test that doubling xi' halves the period.
        """
        doubled = dataclasses.replace(self.zero, xi_prime=2.0 * self.zero.xi_prime)
        self.assertLess(relative(orbit_period(doubled), 0.5 * orbit_period(self.zero)), 1e-15)

    def test_degenerate(self):
        degenerate = dataclasses.replace(self.zero, xi_prime=0j, period=math.inf)
        with self.assertRaises(DegenerateZeroError):
            orbit_period(degenerate)
        with self.assertRaises(DegenerateZeroError):
            quantized_energies(degenerate, range(3))

    def test_action(self):
        """
        Test S = H t*, linear in p0 and zero at p0 = 0.
        """
        q0 = self.zero.rho + 0.01
        self.assertEqual(action(q0, 0.0, self.zero), 0j)
        energy = xi(q0) * 1.5
        self.assertLess(relative(action(q0, 1.5, self.zero), energy * self.zero.period), 1e-15)
        self.assertLess(relative(action(q0, 3.0, self.zero), 2.0 * action(q0, 1.5, self.zero)), 1e-15)

    def test_action_against_loop_integral(self):
        """
        Test S against the chord sum of p dq along one integrated orbit.
        """
        q0 = self.zero.rho + 0.01
        trajectory = integrate_hamiltonian(q0, 1.0, self.zero.period, tol=1e-10, max_step=self.zero.period / 200)
        columns = trajectory.arrays()
        q, p = columns["q"], columns["p"]
        loop = np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(q))
        self.assertLess(relative(loop, action(q0, 1.0, self.zero)), 1e-3)

    def test_quantized_energies(self):
        """
        Test E(k) = k h / t* on a record with period 2.
        """
        record = ZeroRecord(index=1, rho=self.zero.rho, xi_prime=1j * math.pi, period=2.0)
        table = quantized_energies(record, range(0, 6), h=1.0)
        energies = dict(table.energies)
        self.assertEqual(energies[0], 0.0)
        self.assertEqual(energies[3], 1.5)
        self.assertEqual(table.frequency, 0.5)

    def test_linear_spectrum(self):
        table = quantized_energies(self.zero, range(1, 11), h=0.25)
        for k, energy in table.energies:
            self.assertEqual(energy, k * (0.25 / self.zero.period))
            self.assertEqual(energy, k * table.energies[0][1])
            self.assertAlmostEqual(energy / table.energies[0][1], k, places=12)

    def test_invalid_planck_parameter(self):
        with self.assertRaises(DomainError):
            quantized_energies(self.zero, range(3), h=0.0)

    def test_spectrum_csv(self):
        table = quantized_energies(self.zero, range(0, 3))
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "spectrum.csv")
            table.to_csv(path)
            with open(path, encoding="utf-8") as handle:
                lines = handle.read().splitlines()
        self.assertEqual(lines[0], "n,rho_im,period,frequency,k,E")
        self.assertEqual(len(lines), 4)


class TestPrimeSums(unittest.TestCase):
    def test_fluctuation_at_zero_height(self):
        self.assertEqual(fluctuation_term(2.0, 0.0), 0.0)

    def test_fluctuation_is_odd(self):
        cfg = TruncationConfig(pmax=1000, mmax=5)
        for tau in (1.3, 14.1, 40.0):
            self.assertEqual(fluctuation_term(2.0, -tau, cfg), -fluctuation_term(2.0, tau, cfg))

    def test_fluctuation_resummation(self):
        """
        Test sigma = 2 against an independent sum of complex prime powers.
        """
        cfg = TruncationConfig(pmax=100_000, mmax=40)
        primes = prime_sieve(cfg.pmax).astype(float)
        for tau in (3.0, 21.0):
            s = complex(2.0, tau)
            resummed = sum(np.sum(primes ** (-m * s)) / m for m in range(1, cfg.mmax + 1))
            self.assertLess(abs(fluctuation_term(2.0, tau, cfg) - resummed.imag), 1e-12)

    def test_fluctuation_divergent_region(self):
        """
        Test that sigma <= 1 needs the formal flag.
        """
        with self.assertRaises(DomainError):
            fluctuation_term(0.5, 20.0)
        value = fluctuation_term(0.5, 20.0, TruncationConfig(pmax=10_000, mmax=3), formal=True)
        self.assertTrue(math.isfinite(value))

    def test_prime_sum_is_log_zeta(self):
        """
        Test exp of the prime sum at s = 3 against zeta(3).
        """
        value = prime_exponential_sum(3.0)
        self.assertEqual(value.imag, 0.0)
        self.assertAlmostEqual(math.exp(value.real), 1.2020569031595942, places=10)

    def test_prime_sign(self):
        with self.assertRaises(DomainError):
            prime_exponential_sum(2.0, prime_sign=0)


class TestElementaryTime(unittest.TestCase):
    def test_coincident_points(self):
        self.assertEqual(newton_flow_elementary_time(2.5 + 1j, 2.5 + 1j), 0j)

    def test_against_xi_ratio(self):
        """
        Test that exp of the elementary terms reproduces xi(s)/xi(s0).
        """
        for s, s0 in ((2.5 + 1j, 3.0 - 0.5j), (4.0 + 2j, 3.5 + 7j)):
            value = newton_flow_elementary_time(s, s0)
            self.assertLess(relative(cmath.exp(value), xi(s) / xi(s0)), 1e-6)

    def test_positive_prime_sign_overflows(self):
        """
        Test that the growing-exponent reading is rejected.
        """
        with self.assertRaises(DomainError):
            newton_flow_elementary_time(2.5 + 1j, 3.0 - 0.5j, prime_sign=1)

    def test_poles(self):
        with self.assertRaises(DomainError):
            newton_flow_elementary_time(1.0, 2.0)
        with self.assertRaises(DomainError):
            newton_flow_elementary_time(2.0, 0.0)


class TestTailEstimates(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalogue = locate_zeros(180.0)

    def test_decreasing(self):
        """
        Test that both estimates shrink as more pairs are kept.
        """
        log_tails = [log_derivative_tail_estimate(2.0, self.catalogue, TruncationConfig(m=m)) for m in LADDER]
        product_tails = [product_tail_estimate(0.4, 0.6 + 0.1j, self.catalogue, TruncationConfig(m=m)) for m in LADDER]
        for tails in (log_tails, product_tails):
            for earlier, later in zip(tails, tails[1:]):
                self.assertGreater(earlier, later)


class TestPrimeSieveExport(unittest.TestCase):
    def test_reexport(self):
        self.assertEqual(prime_sieve(30).tolist(), [2, 3, 5, 7, 11, 13, 17, 19, 23, 29])


if __name__ == "__main__":
    unittest.main()
