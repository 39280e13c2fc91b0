"""
Disordered-coupling quench ensembles.

Each realization draws bond couplings J_j uniform on [J - dJ, J + dJ] from its
own counter-based stream, prepares the lambda=0 ground state (the unperturbed
toric code), quenches the field to ``lambda_quench`` and records the
start-site-averaged x-x string correlators. Realizations run in parallel with
joblib; every worker pins BLAS to one thread.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from .errors import ChainSpecError, EnsembleError, FitError, NumericalError
from .ffcore import ChainSpec, build_bdg, diagonalize, evolve_kernel, xx_correlator
from .qfi import QfiCurve, ScalingFit, fit_or_saturate

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.01
SEED_LIMIT = 2**64


@dataclass(frozen=True)
class DisorderSpec:
    """Parameters of one disorder ensemble; ``n_sites`` defaults to 5 L."""

    j_base: float = 1.0
    delta_j: float = 0.5
    lambda_quench: float = 0.5
    l_region: int = 40
    n_sites: Optional[int] = None
    n_realizations: int = 100
    master_seed: int = 0
    times: Tuple[float, ...] = (1000.0,)
    d_values: Optional[Tuple[int, ...]] = None
    enforce_five_l: bool = True

    def __post_init__(self) -> None:
        if self.n_sites is None:
            object.__setattr__(self, "n_sites", 5 * self.l_region)
        if self.d_values is None:
            object.__setattr__(self, "d_values", tuple(range(1, self.l_region)))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "d_values", tuple(int(d) for d in self.d_values or ()))

        if not 0.0 <= self.delta_j < 1.0 or self.delta_j >= self.j_base:
            raise ChainSpecError(
                f"delta_j must satisfy 0 <= delta_j < min(1, j_base), got {self.delta_j}"
            )
        if self.l_region < 1:
            raise ChainSpecError(f"l_region must be positive, got {self.l_region}")
        if self.enforce_five_l and self.chain_sites != 5 * self.l_region:
            raise ChainSpecError(
                f"n_sites={self.chain_sites} breaks N = 5 L (L={self.l_region}); "
                "set enforce_five_l to false to override"
            )
        if self.chain_sites < 2 or self.chain_sites % 2:
            raise ChainSpecError(f"n_sites must be even and >= 2, got {self.chain_sites}")
        if self.n_realizations < 1:
            raise ChainSpecError(f"n_realizations must be positive, got {self.n_realizations}")
        if not 0 <= self.master_seed < SEED_LIMIT:
            raise ChainSpecError("master_seed must be an unsigned 64-bit integer")
        if not self.times:
            raise ChainSpecError("At least one evaluation time is required")
        limit = self.chain_sites // 2 - 1
        if any(not 1 <= d <= limit for d in self.d_values):
            raise ChainSpecError(f"d_values must lie in [1, {limit}] for N={self.chain_sites}")

    @property
    def chain_sites(self) -> int:
        """Resolved N."""
        assert self.n_sites is not None
        return self.n_sites


@dataclass(frozen=True)
class DisorderResult:
    """
    Ensemble means and standard errors.

    ``mean_wd`` and ``stderr_wd`` have shape (len(times), len(d_values));
    ``mean_fq`` and ``stderr_fq`` have shape (len(times), len(l_values)) and are
    empty unless ``d_values`` runs contiguously from 1.
    """

    times: np.ndarray
    d_values: np.ndarray
    l_values: np.ndarray
    mean_wd: np.ndarray
    stderr_wd: np.ndarray
    mean_fq: np.ndarray
    stderr_fq: np.ndarray
    fit: Optional[ScalingFit]
    master_seed: int
    n_realizations: int
    start_sites: int
    failures: List[Tuple[int, str]] = field(default_factory=list)

    def wd(self, time_index: int, distance: int) -> float:
        """w-bar_D at the given time index."""
        column = int(np.flatnonzero(self.d_values == distance)[0])
        return float(self.mean_wd[time_index, column])


def sample_couplings(spec: DisorderSpec, realization_index: int) -> Tuple[ChainSpec, ChainSpec]:
    """
    Initial (lambda=0) and quenched chains of one realization.

    The coupling stream is keyed by (master_seed, realization_index) alone, so a
    realization's disorder never depends on scheduling.
    """
    if not 0 <= realization_index < spec.n_realizations:
        raise ChainSpecError(
            f"realization_index {realization_index} outside [0, {spec.n_realizations})"
        )
    seed = np.random.SeedSequence(spec.master_seed, spawn_key=(realization_index,))
    rng = np.random.Generator(np.random.Philox(seed))
    n = spec.chain_sites
    couplings = rng.uniform(spec.j_base - spec.delta_j, spec.j_base + spec.delta_j, size=n)
    initial = ChainSpec(n, tuple(couplings), (0.0,) * n)
    return initial, initial.with_fields((spec.lambda_quench,) * n)


def start_sites(n_sites: int) -> List[int]:
    """floor(N/4) evenly spaced string start sites."""
    count = max(n_sites // 4, 1)
    return [k * n_sites // count for k in range(count)]


def run_realization(
    initial: ChainSpec,
    quenched: ChainSpec,
    times: Sequence[float],
    d_values: Sequence[int],
    inner_jobs: int = 1,
) -> np.ndarray:
    """
    Start-site-averaged C^x_D(t) for one realization.

    Returns:
        Array of shape (len(times), len(d_values))
    """
    initial_spectrum = diagonalize(build_bdg(initial))
    quench_spectrum = diagonalize(build_bdg(quenched))
    sites = start_sites(initial.n_sites)

    def correlators_at(t: float) -> np.ndarray:
        kernel = evolve_kernel(initial_spectrum, quench_spectrum, t)
        return np.array(
            [np.mean([xx_correlator(kernel, j, d) for j in sites]) for d in d_values]
        )

    if inner_jobs > 1:
        rows = Parallel(n_jobs=inner_jobs, prefer="threads")(
            delayed(correlators_at)(t) for t in times
        )
    else:
        rows = [correlators_at(t) for t in times]
    return np.array(rows).reshape(len(times), len(d_values))


def _run_indexed(spec: DisorderSpec, index: int) -> Tuple[int, Optional[np.ndarray], str]:
    """Worker body: one realization with single-threaded BLAS."""
    with threadpool_limits(limits=1):
        try:
            initial, quenched = sample_couplings(spec, index)
            values = run_realization(initial, quenched, spec.times, spec.d_values or ())
            return index, values, ""
        except NumericalError as e:
            return index, None, str(e)


def _pairwise_sum(arrays: List[np.ndarray]) -> np.ndarray:
    """Sum in a fixed binary tree over the realization index."""
    if len(arrays) == 1:
        return arrays[0].copy()
    middle = len(arrays) // 2
    return _pairwise_sum(arrays[:middle]) + _pairwise_sum(arrays[middle:])


def mean_and_stderr(arrays: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Elementwise mean and standard error of the mean; the error is 0 for a single sample."""
    count = len(arrays)
    mean = _pairwise_sum(arrays) / count
    if count == 1:
        return mean, np.zeros_like(mean)
    variance = _pairwise_sum([(a - mean) ** 2 for a in arrays]) / (count - 1)
    return mean, np.sqrt(variance / count)


def _qfi_profiles(wd: np.ndarray, d_values: np.ndarray, l_region: int) -> Optional[np.ndarray]:
    """f_Q(L') = 1 + sum_{D<L'} w_D for L' = 1..L, or None without contiguous D from 1."""
    if not np.array_equal(d_values, np.arange(1, l_region)):
        return None
    partial = np.concatenate([np.zeros((wd.shape[0], 1)), np.cumsum(wd, axis=1)], axis=1)
    return 1.0 + partial


def average_ensemble(
    spec: DisorderSpec,
    n_jobs: int = 1,
    on_result: Optional[Callable[[int], None]] = None,
) -> DisorderResult:
    """
    Run every realization of ``spec`` and reduce them in index order.

    Args:
        spec: Ensemble parameters
        n_jobs: joblib worker count; results do not depend on it
        on_result: Called with each realization index as it completes

    Returns:
        DisorderResult with means, standard errors and the final-time fit
    """
    logger.info(
        "Running %d realizations on N=%d with %d jobs",
        spec.n_realizations,
        spec.chain_sites,
        n_jobs,
    )
    outcomes = Parallel(n_jobs=n_jobs, backend="loky", return_as="generator")(
        delayed(_run_indexed)(spec, index) for index in range(spec.n_realizations)
    )

    values: List[Tuple[int, np.ndarray]] = []
    failures: List[Tuple[int, str]] = []
    for index, result, message in outcomes:
        if result is None:
            logger.warning("Realization %d failed: %s", index, message)
            failures.append((index, message))
        else:
            values.append((index, result))
        if on_result is not None:
            on_result(index)

    if not values or len(failures) > MAX_FAILURE_FRACTION * spec.n_realizations:
        raise EnsembleError(
            f"{len(failures)} of {spec.n_realizations} realizations failed; "
            f"first: {failures[0][1] if failures else 'none'}"
        )

    values.sort(key=lambda item: item[0])
    wd_samples = [v for _, v in values]
    mean_wd, stderr_wd = mean_and_stderr(wd_samples)

    d_values = np.asarray(spec.d_values, dtype=int)
    profiles = [_qfi_profiles(v, d_values, spec.l_region) for v in wd_samples]
    if profiles[0] is None:
        l_values = np.zeros(0, dtype=int)
        mean_fq = stderr_fq = np.zeros((len(spec.times), 0))
        fit = None
    else:
        l_values = np.arange(1, spec.l_region + 1)
        mean_fq, stderr_fq = mean_and_stderr([p for p in profiles if p is not None])
        fit = _final_time_fit(l_values, mean_fq[-1])

    return DisorderResult(
        times=np.asarray(spec.times),
        d_values=d_values,
        l_values=l_values,
        mean_wd=mean_wd,
        stderr_wd=stderr_wd,
        mean_fq=mean_fq,
        stderr_fq=stderr_fq,
        fit=fit,
        master_seed=spec.master_seed,
        n_realizations=spec.n_realizations,
        start_sites=len(start_sites(spec.chain_sites)),
        failures=failures,
    )


def _final_time_fit(l_values: np.ndarray, f_q: np.ndarray) -> Optional[ScalingFit]:
    try:
        return fit_or_saturate(QfiCurve(l_values, f_q, label="disorder"))
    except FitError as e:
        logger.warning("No scaling fit for the final time: %s", e)
        return None

