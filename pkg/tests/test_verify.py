import unittest

from xiflow.errors import DomainError
from xiflow.verify import SUITES, run_verification
from xiflow.zeros import locate_zeros


class TestRunVerification(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalogue = locate_zeros(180.0)

    def assertSuitePasses(self, name):
        (result,) = run_verification(name, catalogue=self.catalogue)
        self.assertEqual(result.name, name)
        self.assertTrue(result.passed, f"{name}: residual {result.residual} detail {result.detail}")
        self.assertLessEqual(result.residual, result.threshold)

    def test_functional_equation(self):
        """
        Test the reflection, the conjugation and the unreflected left-half evaluation.
        """
        (result,) = run_verification("functional_equation", catalogue=self.catalogue)
        self.assertTrue(result.passed, result.detail)
        self.assertIn("unreflected", result.detail)
        self.assertLessEqual(result.detail["unreflected"], 1e-10)

    def test_zeros(self):
        """
        Test the ten-zero catalogue against the bisection oracle.
        """
        self.assertSuitePasses("zeros")

    def test_hamiltonian(self):
        self.assertSuitePasses("hamiltonian")

    def test_variational(self):
        self.assertSuitePasses("variational")

    def test_flow_map(self):
        self.assertSuitePasses("flow_map")

    def test_product_identity(self):
        """
        Test the near-1/2 threshold and the tail-estimate bound up to height 30.
        """
        (result,) = run_verification("product_identity", catalogue=self.catalogue)
        self.assertTrue(result.passed, result.detail)
        self.assertTrue(result.detail["monotone"])
        self.assertLessEqual(result.detail["max_residual_over_tail_estimate"], 2.0)

    def test_periods(self):
        self.assertSuitePasses("periods")

    def test_newton(self):
        self.assertSuitePasses("newton")

    def test_spectrum(self):
        """
        Test E(1) against the numerically detected period.
        """
        self.assertSuitePasses("spectrum")

    def test_fluctuation(self):
        """
        Test the resummed prime sum and its correlation with the counting fluctuation.
        """
        (result,) = run_verification("fluctuation", catalogue=self.catalogue)
        self.assertTrue(result.passed, result.detail)
        self.assertLessEqual(result.residual, 1e-12)
        self.assertGreaterEqual(result.detail["pearson_r_critical_line"], 0.5)

    def test_prime_sign(self):
        """
        Test that exactly the decaying reading of the prime sum validates.
        """
        (result,) = run_verification("prime_sign", catalogue=self.catalogue)
        self.assertTrue(result.passed)
        self.assertEqual(result.detail["consistent_sign"], [-1])

    def test_unknown_suite(self):
        with self.assertRaises(DomainError):
            run_verification("nonsense")

    def test_failing_suite_is_reported(self):
        """
        Test that a suite raising inside is reported as failed, not propagated.
        """
        (result,) = run_verification("product_identity", catalogue=locate_zeros(50.0))
        self.assertFalse(result.passed)
        self.assertIn("error", result.detail)

    def test_suite_names(self):
        self.assertEqual(len(SUITES), 11)
        self.assertIn("fluctuation", SUITES)


if __name__ == "__main__":
    unittest.main()
