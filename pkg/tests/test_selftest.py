"""Test the bundled self-test."""

import unittest
from unittest.mock import patch

import numpy as np

from toricqfi.errors import PfaffianError
from toricqfi.selftest import check_closed_forms, check_pfaffian, check_thermal_bound, run_selftest


class TestSelftest(unittest.TestCase):
    """Test individual checks and the runner."""

    def test_all_checks_pass(self):
        """Every bundled check passes on a healthy install."""
        results = run_selftest(seed=5)
        self.assertEqual(len(results), 5)
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")

    def test_single_checks(self):
        """Checks return a verdict and a detail string."""
        passed, detail = check_pfaffian(np.random.default_rng(1))
        self.assertTrue(passed)
        self.assertIn("pf^2/det", detail)
        self.assertTrue(check_closed_forms()[0])
        self.assertTrue(check_thermal_bound()[0])

    def test_numerical_error_fails_check(self):
        """A numerical exception marks its check as failed instead of propagating."""
        with patch("toricqfi.selftest.pfaffian", side_effect=PfaffianError("singular")):
            results = {result.name: result for result in run_selftest()}
        self.assertFalse(results["pfaffian identities"].passed)
        self.assertIn("PfaffianError", results["pfaffian identities"].detail)
        self.assertTrue(results["thermal bound"].passed)
