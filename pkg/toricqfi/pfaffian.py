"""Pfaffians of complex skew-symmetric matrices."""

import logging
from typing import Union

import numpy as np

from .errors import PfaffianError

logger = logging.getLogger(__name__)

# Pivot columns below this fraction of the largest entry count as zero.
PIVOT_TOLERANCE = 1e-13


class SkewMatrix:
    """
    Even-dimensional complex skew-symmetric matrix.

    The stored entries are antisymmetrized on construction, so
    ``entries[i, j] == -entries[j, i]`` holds exactly and the diagonal is zero.
    """

    def __init__(self, entries: np.ndarray):
        """Validate shape and finiteness, then store the antisymmetric part."""
        matrix = np.asarray(entries, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise PfaffianError(f"Expected a square matrix, got shape {matrix.shape}")
        if matrix.shape[0] % 2:
            raise PfaffianError(f"Pfaffian needs an even dimension, got {matrix.shape[0]}")
        if not np.all(np.isfinite(matrix)):
            raise PfaffianError("Matrix contains NaN or Inf entries")
        self.entries = 0.5 * (matrix - matrix.T)

    @property
    def dim(self) -> int:
        """Matrix dimension n."""
        return int(self.entries.shape[0])

    def __repr__(self) -> str:
        return f"SkewMatrix(dim={self.dim})"


def pfaffian(m: Union[SkewMatrix, np.ndarray]) -> complex:
    """
    Pfaffian by skew-symmetric Gaussian elimination with partial pivoting.

    Each step pivots the largest-magnitude entry of the current column into the
    sub-diagonal, records the pivot, and applies a rank-2 skew update to the
    trailing block. The cost is O(n^3).

    Args:
        m: Skew matrix, or a raw array that is validated and antisymmetrized

    Returns:
        pf(m); exactly 0 when a pivot column falls below tolerance
    """
    skew = m if isinstance(m, SkewMatrix) else SkewMatrix(m)
    a = skew.entries.copy()
    n = skew.dim
    if n == 0:
        return complex(1.0)

    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return complex(0.0)
    tolerance = PIVOT_TOLERANCE * scale

    result = complex(1.0)
    for k in range(0, n - 1, 2):
        pivot = k + 1 + int(np.argmax(np.abs(a[k + 1 :, k])))
        if pivot != k + 1:
            a[[k + 1, pivot], :] = a[[pivot, k + 1], :]
            a[:, [k + 1, pivot]] = a[:, [pivot, k + 1]]
            result = -result

        if abs(a[k + 1, k]) <= tolerance:
            logger.debug("Singular pivot at step %d of %d", k, n)
            return complex(0.0)

        result *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2 :] / a[k, k + 1]
            column = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, column) - np.outer(column, tau)

    return complex(result)
