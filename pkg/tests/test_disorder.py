"""Test disordered quench ensembles."""

import unittest
from unittest.mock import patch

import numpy as np
import pytest

from toricqfi.disorder import (
    DisorderSpec,
    average_ensemble,
    mean_and_stderr,
    run_realization,
    sample_couplings,
    start_sites,
)
from toricqfi.errors import ChainSpecError, DiagonalizationError, EnsembleError
from toricqfi.exact import quench_correlator
from toricqfi.uniform import quench_wd_profile


def small_spec(**overrides) -> DisorderSpec:
    """L=4 on N=20, three realizations at two times."""
    values = dict(l_region=4, n_realizations=3, times=(0.5, 2.0), master_seed=17)
    values.update(overrides)
    return DisorderSpec(**values)


class TestDisorderSpec(unittest.TestCase):
    """Test ensemble parameter validation."""

    def test_defaults(self):
        """N defaults to 5 L and D to 1 .. L-1."""
        spec = DisorderSpec(l_region=8)
        self.assertEqual(spec.chain_sites, 40)
        self.assertEqual(spec.d_values, tuple(range(1, 8)))

    def test_disorder_strength(self):
        """delta_j must lie in [0, 1) and below the base coupling."""
        with self.assertRaises(ChainSpecError):
            small_spec(delta_j=1.0)
        with self.assertRaises(ChainSpecError):
            small_spec(delta_j=-0.1)
        with self.assertRaises(ChainSpecError):
            small_spec(j_base=0.4, delta_j=0.5)

    def test_five_l_rule(self):
        """N != 5 L is refused unless the rule is switched off."""
        with self.assertRaises(ChainSpecError):
            small_spec(n_sites=30)
        self.assertEqual(small_spec(n_sites=30, enforce_five_l=False).chain_sites, 30)

    def test_chain_size(self):
        """N must be even."""
        with self.assertRaises(ChainSpecError):
            small_spec(n_sites=21, enforce_five_l=False)

    def test_distances(self):
        """Every D lies in [1, N/2 - 1]."""
        with self.assertRaises(ChainSpecError):
            small_spec(d_values=(1, 10))
        with self.assertRaises(ChainSpecError):
            small_spec(d_values=(0,))

    def test_seed_and_times(self):
        """Seeds are unsigned 64-bit and at least one time is needed."""
        with self.assertRaises(ChainSpecError):
            small_spec(master_seed=-1)
        with self.assertRaises(ChainSpecError):
            small_spec(master_seed=2**64)
        with self.assertRaises(ChainSpecError):
            small_spec(times=())


class TestSampleCouplings(unittest.TestCase):
    """Test per-realization coupling streams."""

    def test_reproducible(self):
        """Same (seed, index) gives the same couplings."""
        spec = small_spec()
        self.assertEqual(sample_couplings(spec, 1), sample_couplings(spec, 1))
        self.assertNotEqual(sample_couplings(spec, 0)[0], sample_couplings(spec, 1)[0])

    def test_seed_changes_couplings(self):
        """Different master seeds give different ensembles."""
        first, _ = sample_couplings(small_spec(master_seed=1), 0)
        second, _ = sample_couplings(small_spec(master_seed=2), 0)
        self.assertNotEqual(first.couplings, second.couplings)

    def test_quench_keeps_couplings(self):
        """Initial chain has lambda=0; the quenched chain only changes the fields."""
        initial, quenched = sample_couplings(small_spec(lambda_quench=0.7), 2)
        self.assertEqual(initial.fields, (0.0,) * 20)
        self.assertEqual(quenched.fields, (0.7,) * 20)
        self.assertEqual(initial.couplings, quenched.couplings)

    def test_clean_limit_is_exact(self):
        """delta_j = 0 yields J exactly."""
        initial, _ = sample_couplings(small_spec(delta_j=0.0, j_base=1.25), 0)
        self.assertEqual(initial.couplings, (1.25,) * 20)

    def test_distribution(self):
        """10^4 draws: bounded, mean J and variance dJ^2 / 3."""
        spec = DisorderSpec(l_region=2000, n_realizations=1)
        couplings = np.array(sample_couplings(spec, 0)[0].couplings)
        self.assertEqual(couplings.shape, (10_000,))
        self.assertGreaterEqual(couplings.min(), 0.5)
        self.assertLessEqual(couplings.max(), 1.5)
        self.assertLess(abs(couplings.mean() - 1.0), 4 * np.sqrt(1 / 12 / 10_000))
        self.assertLess(abs(couplings.var(ddof=1) / (0.25 / 3) - 1.0), 0.05)

    def test_index_range(self):
        """Indices outside the ensemble are refused."""
        with self.assertRaises(ChainSpecError):
            sample_couplings(small_spec(), 3)


class TestRunRealization(unittest.TestCase):
    """Test single-realization correlators."""

    def test_start_sites(self):
        """floor(N/4) evenly spaced sites."""
        self.assertEqual(start_sites(20), [0, 4, 8, 12, 16])
        self.assertEqual(start_sites(8), [0, 4])
        self.assertEqual(start_sites(2), [0])

    def test_matches_exact_evolution(self):
        """N=8 disordered quench at t=2.1 against brute-force state vectors."""
        spec = small_spec(l_region=2, n_sites=8, enforce_five_l=False, d_values=(1, 2, 3))
        initial, quenched = sample_couplings(spec, 0)
        values = run_realization(initial, quenched, [2.1], [1, 2, 3])
        for column, d in enumerate((1, 2, 3)):
            expected = np.mean([quench_correlator(initial, quenched, 2.1, j, d) for j in (0, 4)])
            self.assertAlmostEqual(values[0, column], expected, delta=1e-8)

    def test_initial_state_is_ordered(self):
        """t=0: every correlator of the lambda=0 ground state is 1."""
        initial, quenched = sample_couplings(small_spec(), 0)
        values = run_realization(initial, quenched, [0.0], [1, 2, 3])
        np.testing.assert_allclose(values, 1.0, atol=1e-10)

    def test_threaded_times_agree(self):
        """Splitting times over threads does not change the values."""
        initial, quenched = sample_couplings(small_spec(), 1)
        serial = run_realization(initial, quenched, [0.5, 1.0, 2.0], [1, 3])
        threaded = run_realization(initial, quenched, [0.5, 1.0, 2.0], [1, 3], inner_jobs=2)
        np.testing.assert_allclose(threaded, serial, atol=1e-14)
        self.assertEqual(serial.shape, (3, 2))


class TestAverageEnsemble(unittest.TestCase):
    """Test ensemble averaging."""

    def test_single_realization(self):
        """One realization: the mean is that realization and the error is 0."""
        spec = small_spec(n_realizations=1)
        result = average_ensemble(spec)
        expected = run_realization(*sample_couplings(spec, 0), spec.times, spec.d_values)
        np.testing.assert_allclose(result.mean_wd, expected, atol=1e-12)
        np.testing.assert_array_equal(result.stderr_wd, 0.0)
        self.assertEqual(result.start_sites, 5)

    def test_worker_count_does_not_change_results(self):
        """n_jobs=1 and n_jobs=2 agree bit for bit."""
        spec = small_spec()
        serial = average_ensemble(spec, n_jobs=1)
        parallel = average_ensemble(spec, n_jobs=2)
        np.testing.assert_array_equal(serial.mean_wd, parallel.mean_wd)
        np.testing.assert_array_equal(serial.stderr_wd, parallel.stderr_wd)
        np.testing.assert_array_equal(serial.mean_fq, parallel.mean_fq)

    def test_clean_limit_matches_uniform_quench(self):
        """delta_j = 0 reduces to the momentum-space uniform quench."""
        spec = small_spec(delta_j=0.0, n_realizations=2, times=(1.5,))
        result = average_ensemble(spec)
        expected = quench_wd_profile(0.0, 0.5, 1.5, 20, [1, 2, 3])
        np.testing.assert_allclose(result.mean_wd[0], expected, atol=1e-10)
        np.testing.assert_allclose(result.stderr_wd, 0.0, atol=1e-12)

    def test_qfi_profiles(self):
        """f_Q(L') = 1 + sum_{D<L'} w-bar_D with L' = 1 .. L."""
        result = average_ensemble(small_spec())
        np.testing.assert_array_equal(result.l_values, [1, 2, 3, 4])
        np.testing.assert_allclose(result.mean_fq[:, 0], 1.0)
        np.testing.assert_allclose(
            result.mean_fq[:, -1], 1.0 + result.mean_wd.sum(axis=1), atol=1e-12
        )
        self.assertAlmostEqual(result.wd(1, 2), result.mean_wd[1, 1])
        self.assertIsNotNone(result.fit)

    def test_partial_distances_skip_qfi(self):
        """Non-contiguous D lists produce no f_Q profiles or fit."""
        result = average_ensemble(small_spec(d_values=(1, 3)))
        self.assertEqual(result.mean_fq.shape, (2, 0))
        self.assertIsNone(result.fit)

    def test_progress_callback(self):
        """on_result sees every realization index once."""
        seen = []
        average_ensemble(small_spec(), on_result=seen.append)
        self.assertEqual(sorted(seen), [0, 1, 2])

    def test_failures_abort(self):
        """Too many failed realizations raise EnsembleError."""
        with patch(
            "toricqfi.disorder.run_realization", side_effect=DiagonalizationError("degenerate")
        ):
            with self.assertRaises(EnsembleError):
                average_ensemble(small_spec())


class TestMeanAndStderr(unittest.TestCase):
    """Test the ensemble reduction."""

    def test_known_values(self):
        """Mean and standard error of 1, 2, 3, 4."""
        mean, stderr = mean_and_stderr([np.array([value]) for value in (1.0, 2.0, 3.0, 4.0)])
        self.assertAlmostEqual(mean[0], 2.5)
        self.assertAlmostEqual(stderr[0], np.sqrt((5 / 3) / 4))

    def test_identical_samples(self):
        """Equal samples give zero error."""
        _, stderr = mean_and_stderr([np.full(3, 0.25)] * 5)
        np.testing.assert_array_equal(stderr, 0.0)

    def test_inverse_square_root_scaling(self):
        """Four times the samples halves the standard error."""
        rng = np.random.default_rng(0)
        small = [rng.normal(size=2000) for _ in range(100)]
        large = [rng.normal(size=2000) for _ in range(400)]
        ratio = np.mean(mean_and_stderr(small)[1]) / np.mean(mean_and_stderr(large)[1])
        self.assertAlmostEqual(ratio, 2.0, delta=0.05)


class TestLocalization(unittest.TestCase):
    """Test the N=200, L=40 quench to lambda=0.5 at t=1000."""

    def test_clean_loops_decay(self):
        """Without disorder w_D falls off with D and f_Q - 1 grows slower than L."""
        # delta_j = 0 makes every realization identical, so one is the ensemble.
        result = average_ensemble(DisorderSpec(delta_j=0.0, n_realizations=1))
        self.assertGreater(result.wd(0, 5), result.wd(0, 20))
        self.assertGreater(result.wd(0, 20), result.wd(0, 39))
        self.assertLess(result.wd(0, 20), 0.4)
        self.assertLess(result.fit.beta, 0.8)

    @pytest.mark.slow
    def test_disorder_preserves_loops(self):
        """delta_j = 0.5 over 100 realizations: w-bar plateaus and beta-bar >= 0.8."""
        disordered = average_ensemble(DisorderSpec(delta_j=0.5), n_jobs=-1)
        clean = average_ensemble(DisorderSpec(delta_j=0.0, n_realizations=1))
        self.assertGreaterEqual(disordered.fit.beta, 0.8)
        self.assertGreater(disordered.wd(0, 20), 0.45)
        self.assertLess(abs(disordered.wd(0, 39) - disordered.wd(0, 20)), 0.05)
        self.assertGreater(disordered.wd(0, 20), 1.5 * clean.wd(0, 20))
