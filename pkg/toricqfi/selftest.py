"""Fast acceptance checks bundled with the CLI."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from .errors import NumericalError
from .exact import quench_correlator
from .ffcore import ChainSpec, build_bdg, diagonalize, evolve_kernel, ground_kernel, xx_correlator
from .pfaffian import pfaffian
from .qfi import thermal_bound_fq
from .uniform import ground_wd_profile, quench_cxd_infty_exact, quench_wd_profile

logger = logging.getLogger(__name__)

ED_TOLERANCE = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_skew(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return m - m.T


def check_pfaffian(rng: np.random.Generator) -> Tuple[bool, str]:
    a, b, c, d, e, f = rng.normal(size=6)
    four = np.array([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]])
    closed_error = abs(pfaffian(four) - (a * f - b * e + c * d))
    worst = 0.0
    for n in (2, 6, 10, 20):
        m = _random_skew(rng, n)
        det = np.linalg.det(m)
        worst = max(worst, abs(pfaffian(m) ** 2 - det) / abs(det))
    return closed_error < 1e-12 and worst < 1e-9, f"4x4 err {closed_error:.1e}, pf^2/det err {worst:.1e}"


def _random_chain(rng: np.random.Generator, n: int) -> ChainSpec:
    return ChainSpec(n, tuple(rng.uniform(0.2, 1.5, n)), tuple(rng.uniform(0.0, 1.5, n)))


def check_exact_equivalence(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for n in (4, 6, 8):
        initial, quench = _random_chain(rng, n), _random_chain(rng, n)
        before = diagonalize(build_bdg(initial))
        after = diagonalize(build_bdg(quench))
        for t in (0.0, 0.5, 1.7):
            kernel = evolve_kernel(before, after, t)
            for j in range(n):
                for d in range(1, n // 2):
                    reference = quench_correlator(initial, quench, t, j, d)
                    worst = max(worst, abs(xx_correlator(kernel, j, d) - reference))
    return worst <= ED_TOLERANCE, f"max deviation {worst:.1e} for N in 4, 6, 8"


def check_momentum_routes() -> Tuple[bool, str]:
    n = 16
    ground = ground_kernel(diagonalize(build_bdg(ChainSpec.uniform(n, 1.0, 0.7))))
    profile = ground_wd_profile(0.7, n, n // 2 - 1)
    ground_error = max(
        abs(xx_correlator(ground, 0, d) - profile[d - 1]) for d in range(1, n // 2)
    )
    before = diagonalize(build_bdg(ChainSpec.uniform(n, 1.0, 0.0)))
    after = diagonalize(build_bdg(ChainSpec.uniform(n, 1.0, 0.5)))
    kernel = evolve_kernel(before, after, 1.3)
    distances = list(range(1, n // 2))
    quenched = quench_wd_profile(0.0, 0.5, 1.3, n, distances)
    quench_error = max(abs(xx_correlator(kernel, 3, d) - quenched[d - 1]) for d in distances)
    worst = max(ground_error, quench_error)
    return worst < 1e-10, f"real space vs momentum space {worst:.1e}"


def check_closed_forms() -> Tuple[bool, str]:
    error = abs(quench_cxd_infty_exact(2, 0.5) - 0.8125)
    return error < 1e-12, f"C^x_2(inf) at lambda=0.5 off by {error:.1e}"


def check_thermal_bound() -> Tuple[bool, str]:
    value = thermal_bound_fq(1.0, 1.0, 10_000)
    series = 1.0 + sum(math.tanh(0.5) ** d for d in range(1, 30))
    series_error = abs(thermal_bound_fq(0.5, 1.0, 30) - series)
    passed = abs(value - 4.19454) <= 1e-4 and series_error <= 1e-12
    return passed, f"bound(J=T=1, L=1e4) = {value:.6f}, series err {series_error:.1e}"


def run_selftest(seed: int = 0) -> List[CheckResult]:
    """Run every check; numerical failures count as failed checks."""
    rng = np.random.default_rng(seed)
    checks: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
        ("pfaffian identities", lambda: check_pfaffian(rng)),
        ("exact diagonalization", lambda: check_exact_equivalence(rng)),
        ("momentum routes", check_momentum_routes),
        ("long-time closed form", check_closed_forms),
        ("thermal bound", check_thermal_bound),
    ]
    results = []
    for name, check in checks:
        try:
            passed, detail = check()
        except NumericalError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        logger.info("Self-test %s: %s", name, "pass" if passed else "fail")
        results.append(CheckResult(name, bool(passed), detail))
    return results
