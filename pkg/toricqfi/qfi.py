"""QFI densities, power-law scaling fits, the topological index and thermal bounds."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import ChainSpecError, FitError
from .uniform import ToricFieldPoint

logger = logging.getLogger(__name__)

ELECTRIC = "electric"
MAGNETIC = "magnetic"

MIN_FIT_SAMPLES = 4
SATURATION_THRESHOLD = 1e-9
BETA_SANITY_BAND = (-0.5, 1.5)
DEPTH_TOLERANCE = 1e-9


@dataclass(frozen=True)
class QfiCurve:
    """QFI density f_Q sampled at increasing region side lengths L."""

    l_values: np.ndarray
    f_q: np.ndarray
    label: str = ELECTRIC

    def __post_init__(self) -> None:
        l_values = np.asarray(self.l_values, dtype=int)
        f_q = np.asarray(self.f_q, dtype=float)
        object.__setattr__(self, "l_values", l_values)
        object.__setattr__(self, "f_q", f_q)
        if l_values.shape != f_q.shape or l_values.ndim != 1:
            raise FitError(f"Mismatched curve arrays: {l_values.shape} vs {f_q.shape}")
        if np.any(np.diff(l_values) <= 0):
            raise FitError("Side lengths must be strictly increasing")
        if np.any(f_q < 1 - 1e-12):
            raise FitError(f"QFI density below 1 in {self.label} curve: min {f_q.min()}")

    @classmethod
    def from_wd_profile(
        cls, wd: Sequence[float], l_values: Sequence[int], label: str = ELECTRIC
    ) -> "QfiCurve":
        """f_Q(L) = 1 + sum_{D<L} w_D for each L, where ``wd[D-1]`` holds w_D."""
        wd = np.asarray(wd, dtype=float)
        partial = np.concatenate([[0.0], np.cumsum(wd)])
        l_values = np.asarray(l_values, dtype=int)
        if np.any(l_values < 1) or np.any(l_values - 1 > wd.shape[0]):
            raise FitError(f"Side lengths need w_D up to D={l_values.max() - 1}")
        return cls(l_values, 1.0 + partial[l_values - 1], label)

    @property
    def samples(self) -> List[Tuple[int, float]]:
        """(L, f_Q) pairs."""
        return list(zip(self.l_values.tolist(), self.f_q.tolist()))

    def total_fisher(self) -> np.ndarray:
        """F_Q = f_Q L^2 for each sample."""
        return self.f_q * self.l_values.astype(float) ** 2


@dataclass(frozen=True)
class ScalingFit:
    """f_Q = 1 + alpha L^beta over ``window``; ``saturated`` marks the area-law branch."""

    alpha: float
    beta: float
    residual: float
    window: Tuple[int, int]
    n_samples: int
    saturated: bool = False

    @property
    def status(self) -> str:
        return "saturated" if self.saturated else "power-law"

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for manifests and JSON output."""
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "residual": self.residual,
            "window": list(self.window),
            "n_samples": self.n_samples,
            "status": self.status,
        }


@dataclass(frozen=True)
class TopoIndexResult:
    """Electric and magnetic exponents and the index I = beta^e beta^m (clamped at 0)."""

    beta_e: float
    beta_m: float
    index: float

    @property
    def raw_index(self) -> float:
        return self.beta_e * self.beta_m


def qfi_density(wd: Sequence[float]) -> float:
    """1 + sum of the reduced Wilson loops w_1 .. w_{L-1}."""
    return 1.0 + float(np.sum(np.asarray(wd, dtype=float)))


def wilson_loop(w_d: float, distance: int) -> float:
    """Full Wilson loop of a D x D region from its reduced loop, w_D^D."""
    return float(w_d) ** distance


def default_window(l_values: Sequence[int]) -> Tuple[int, int]:
    """Upper half of the available side lengths, widened to at least four samples."""
    ordered = sorted(int(v) for v in l_values)
    if not ordered:
        raise FitError("No samples to fit")
    count = max(len(ordered) - len(ordered) // 2, MIN_FIT_SAMPLES)
    upper = ordered[-count:]
    return upper[0], upper[-1]


def fit_scaling(curve: QfiCurve, window: Optional[Tuple[int, int]] = None) -> ScalingFit:
    """
    Least-squares line through (log L, log(f_Q - 1)) on ``window``.

    When at least half of the windowed samples have f_Q - 1 <= 1e-9 the curve
    is saturated: beta is 0 and alpha the clamped mean excess.
    """
    window = window or default_window(curve.l_values)
    inside = (curve.l_values >= window[0]) & (curve.l_values <= window[1])
    l_values = curve.l_values[inside]
    excess = curve.f_q[inside] - 1.0
    if l_values.shape[0] < MIN_FIT_SAMPLES:
        raise FitError(
            f"Need at least {MIN_FIT_SAMPLES} samples in window {window}, got {l_values.shape[0]}"
        )

    if np.count_nonzero(excess <= SATURATION_THRESHOLD) * 2 >= excess.shape[0]:
        alpha = max(float(np.mean(excess)), 0.0)
        residual = float(np.sqrt(np.mean((excess - alpha) ** 2)))
        logger.info("Saturated %s curve on window %s", curve.label, window)
        return ScalingFit(alpha, 0.0, residual, window, int(l_values.shape[0]), saturated=True)

    if np.any(excess <= 0):
        raise FitError(f"f_Q - 1 must be positive on window {window} for a log-log fit")

    log_l = np.log(l_values.astype(float))
    log_excess = np.log(excess)
    regression = stats.linregress(log_l, log_excess)
    predicted = regression.intercept + regression.slope * log_l
    residual = float(np.sqrt(np.mean((log_excess - predicted) ** 2)))
    beta = float(regression.slope)
    if not BETA_SANITY_BAND[0] <= beta <= BETA_SANITY_BAND[1]:
        logger.warning("Fitted beta=%.4f of %s curve is outside %s", beta, curve.label, BETA_SANITY_BAND)
    return ScalingFit(
        alpha=float(math.exp(regression.intercept)),
        beta=beta,
        residual=residual,
        window=(int(window[0]), int(window[1])),
        n_samples=int(l_values.shape[0]),
    )


def fit_or_saturate(curve: QfiCurve, window: Optional[Tuple[int, int]] = None) -> ScalingFit:
    """
    ``fit_scaling``, but a refused fit is reported through the saturated marker.

    Pipelines use this so a too-short curve (L=1, say) still yields a fit row:
    beta 0, alpha the clamped mean excess over every sample.
    """
    try:
        return fit_scaling(curve, window)
    except FitError as e:
        logger.info("Fit refused for %s curve: %s", curve.label, e)
        excess = curve.f_q - 1.0
        alpha = max(float(np.mean(excess)), 0.0)
        residual = float(np.sqrt(np.mean((excess - alpha) ** 2)))
        bounds = (int(curve.l_values[0]), int(curve.l_values[-1]))
        return ScalingFit(alpha, 0.0, residual, bounds, int(excess.shape[0]), saturated=True)


def topological_index(fit_e: ScalingFit, fit_m: ScalingFit) -> TopoIndexResult:
    """I = beta^e beta^m; small negative products from fit noise report as 0."""
    if tuple(fit_e.window) != tuple(fit_m.window):
        raise FitError(f"Fits use different windows: {fit_e.window} vs {fit_m.window}")
    return TopoIndexResult(
        beta_e=fit_e.beta,
        beta_m=fit_m.beta,
        index=max(fit_e.beta * fit_m.beta, 0.0),
    )


def entanglement_depth(f_q: float) -> int:
    """kappa + 1 for the largest integer kappa with f_Q > kappa; 1 when f_Q <= 1."""
    # Excess below DEPTH_TOLERANCE is rounding, not entanglement.
    if f_q <= 1.0 + DEPTH_TOLERANCE:
        return 1
    return int(math.ceil(f_q - DEPTH_TOLERANCE))


def thermal_bound_fq(coupling: float, temperature: float, side: int) -> float:
    """
    Upper bound 1 + sum_{D=1}^{L-1} tanh(J/T)^D on the thermal QFI density.

    The geometric sum is evaluated in closed form with expm1/log1p so the
    result stays accurate when tanh(J/T) is close to 1.
    """
    if temperature <= 0:
        raise ChainSpecError(f"Temperature must be positive, got {temperature}")
    if coupling <= 0:
        raise ChainSpecError(f"Coupling must be positive, got {coupling}")
    if side < 1:
        raise ChainSpecError(f"Side length must be >= 1, got {side}")

    decay = math.exp(-2.0 * coupling / temperature)
    gap = 2.0 * decay / (1.0 + decay)  # 1 - tanh(J/T)
    if gap == 0.0:
        return float(side)
    ratio = 1.0 - gap
    tail = -math.expm1((side - 1) * math.log1p(-gap))
    return 1.0 + ratio * tail / gap


def thermal_bound_curve(
    coupling: float, temperature: float, l_values: Sequence[int], label: str = MAGNETIC
) -> QfiCurve:
    """Thermal bound sampled at each side length."""
    values = [thermal_bound_fq(coupling, temperature, int(side)) for side in l_values]
    return QfiCurve(np.asarray(l_values, dtype=int), np.asarray(values), label)


def thermal_bound_pair(point: ToricFieldPoint, temperature: float, side: int) -> Tuple[float, float]:
    """(electric bound with J^B, magnetic bound with J^A)."""
    return (
        thermal_bound_fq(point.j_b, temperature, side),
        thermal_bound_fq(point.j_a, temperature, side),
    )
