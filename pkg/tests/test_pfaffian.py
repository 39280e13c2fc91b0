"""Test Pfaffians of skew-symmetric matrices."""

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from toricqfi.errors import PfaffianError
from toricqfi.pfaffian import SkewMatrix, pfaffian


def random_skew(seed: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return m - m.T


class TestPfaffianClosedForms(unittest.TestCase):
    """Test small matrices whose Pfaffians are known in closed form."""

    def test_two_by_two(self):
        """pf [[0, a], [-a, 0]] = a."""
        self.assertEqual(pfaffian(np.array([[0.0, 2.5], [-2.5, 0.0]])), 2.5)
        self.assertEqual(pfaffian(np.array([[0, 1 - 2j], [-1 + 2j, 0]])), 1 - 2j)

    def test_four_by_four(self):
        """pf = af - be + cd for the upper triangle (a, b, c, d, e, f)."""
        a, b, c, d, e, f = 0.3, -1.2, 2.0, 0.7, 1.5, -0.4
        m = np.array([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]])
        self.assertAlmostEqual(pfaffian(m).real, a * f - b * e + c * d, places=14)

    def test_four_by_four_needs_pivoting(self):
        """A zero leading entry forces a row swap."""
        m = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
        # a = 0, b = 1, c = 0, d = 0, e = 1, f = 0 -> pf = -be = -1
        self.assertAlmostEqual(pfaffian(m).real, -1.0, places=14)

    def test_empty_matrix(self):
        """The empty Pfaffian is 1."""
        self.assertEqual(pfaffian(np.zeros((0, 0))), 1.0)

    def test_zero_matrix(self):
        """A zero matrix has Pfaffian 0."""
        self.assertEqual(pfaffian(np.zeros((6, 6))), 0.0)

    def test_singular_matrix(self):
        """A rank-deficient skew matrix has Pfaffian 0."""
        m = np.zeros((4, 4))
        m[0, 1], m[1, 0] = 1.0, -1.0
        self.assertEqual(pfaffian(m), 0.0)

    def test_block_diagonal(self):
        """pf of a direct sum is the product of the blocks' Pfaffians."""
        m = np.zeros((6, 6))
        for k, value in enumerate([2.0, -3.0, 0.5]):
            m[2 * k, 2 * k + 1] = value
            m[2 * k + 1, 2 * k] = -value
        self.assertAlmostEqual(pfaffian(m).real, -3.0, places=14)


class TestPfaffianIdentities(unittest.TestCase):
    """Test algebraic identities on random complex skew matrices."""

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), half=st.integers(1, 15))
    def test_square_equals_determinant(self, seed, half):
        """pf(M)^2 = det(M)."""
        m = random_skew(seed, 2 * half)
        value = pfaffian(m)
        det = np.linalg.det(m)
        self.assertLessEqual(abs(value**2 - det), 1e-9 * abs(det))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), half=st.integers(2, 8))
    def test_row_column_swap_flips_sign(self, seed, half):
        """Swapping two indices negates the Pfaffian."""
        m = random_skew(seed, 2 * half)
        order = np.arange(2 * half)
        order[[0, 3]] = order[[3, 0]]
        swapped = m[np.ix_(order, order)]
        np.testing.assert_allclose(pfaffian(swapped), -pfaffian(m), rtol=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), half=st.integers(1, 8))
    def test_scaling(self, seed, half):
        """pf(c M) = c^(n/2) pf(M)."""
        m = random_skew(seed, 2 * half)
        scale = 1.7 - 0.3j
        np.testing.assert_allclose(pfaffian(scale * m), scale**half * pfaffian(m), rtol=1e-10)

    def test_congruence(self):
        """pf(B M B^T) = det(B) pf(M)."""
        rng = np.random.default_rng(7)
        m = random_skew(11, 8)
        b = rng.normal(size=(8, 8))
        np.testing.assert_allclose(pfaffian(b @ m @ b.T), np.linalg.det(b) * pfaffian(m), rtol=1e-9)


class TestSkewMatrix(unittest.TestCase):
    """Test validation of skew matrices."""

    def test_antisymmetrizes(self):
        """Stored entries are exactly antisymmetric with a zero diagonal."""
        skew = SkewMatrix(np.array([[1.0, 2.0], [-2.0, 3.0]]))
        np.testing.assert_array_equal(skew.entries, -skew.entries.T)
        self.assertEqual(skew.dim, 2)

    def test_odd_dimension_rejected(self):
        """Odd matrices have no Pfaffian."""
        with self.assertRaises(PfaffianError):
            pfaffian(np.zeros((3, 3)))

    def test_non_square_rejected(self):
        """Non-square input is rejected."""
        with self.assertRaises(PfaffianError):
            SkewMatrix(np.zeros((2, 4)))

    def test_non_finite_rejected(self):
        """NaN entries are rejected."""
        m = np.zeros((2, 2))
        m[0, 1] = np.nan
        with self.assertRaises(PfaffianError):
            pfaffian(m)
