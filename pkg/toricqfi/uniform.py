"""
Momentum-space analytics for translation-invariant chains.

Covers the toric-code to Ising-chain mapping, equilibrium and quenched
contractions G_r, G^A_r, G^B_r as finite antiperiodic momentum sums, the
Toeplitz-determinant and Pfaffian reconstruction of C^x_d, and the long-time
closed forms.

The real-space Jordan-Wigner frame used by ``ffcore`` is the momentum frame of
``MomentumModes`` shifted by pi, so every site-space sum carries a (-1)^r phase.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import ChainSpecError
from .ffcore import ChainSpec
from .pfaffian import pfaffian

logger = logging.getLogger(__name__)

# Beyond this many momenta the site sums switch to compensated summation.
COMPENSATED_SUM_THRESHOLD = 10_000


@dataclass(frozen=True)
class ToricFieldPoint:
    """External fields (lambda^x, lambda^z) and stabilizer couplings (J^A, J^B)."""

    lambda_x: float
    lambda_z: float
    j_a: float = 1.0
    j_b: float = 1.0

    def __post_init__(self) -> None:
        values = (self.lambda_x, self.lambda_z, self.j_a, self.j_b)
        if not all(math.isfinite(v) for v in values):
            raise ChainSpecError(f"Field point must be finite: {values}")
        if self.j_a <= 0 or self.j_b <= 0:
            raise ChainSpecError(f"Couplings must be positive, got J^A={self.j_a}, J^B={self.j_b}")


def map_toric_to_chains(point: ToricFieldPoint, n_sites: int) -> Tuple[ChainSpec, ChainSpec]:
    """
    Split the toric code in fields into its two families of Ising chains.

    Returns:
        (chain_e, chain_m): even rows carry J^B and lambda^x (electric sector),
        odd rows carry J^A and lambda^z (magnetic sector)
    """
    chain_e = ChainSpec.uniform(n_sites, point.j_b, point.lambda_x)
    chain_m = ChainSpec.uniform(n_sites, point.j_a, point.lambda_z)
    return chain_e, chain_m


def antiperiodic_momenta(n_sites: int) -> np.ndarray:
    """q = +-(2k-1) pi / N for k = 1..N/2, ascending."""
    _check_ring(n_sites)
    k = np.arange(1, n_sites // 2 + 1)
    positive = (2 * k - 1) * np.pi / n_sites
    return np.concatenate([-positive[::-1], positive])


@dataclass(frozen=True)
class MomentumModes:
    """
    Bogoliubov data of a uniform chain at field ``lam`` on a grid of momenta.

    y_q = -sin q, z_q = -lam - cos q, omega_q = sqrt(y^2 + z^2) (half the
    quasiparticle energy), tan Theta_q = y_q / z_q, u_q = cos(Theta/2),
    v_q = sin(Theta/2). Every field is an array over ``q``.
    """

    lam: float
    q: np.ndarray
    y: np.ndarray
    z: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def from_field(cls, lam: float, n_sites: int) -> "MomentumModes":
        """Modes on the antiperiodic grid of an ``n_sites`` ring."""
        q = antiperiodic_momenta(n_sites)
        y = -np.sin(q)
        z = -lam - np.cos(q)
        theta = np.arctan2(y, z)
        return cls(
            lam=float(lam),
            q=q,
            y=y,
            z=z,
            omega=np.hypot(y, z),
            theta=theta,
            u=np.cos(theta / 2),
            v=np.sin(theta / 2),
        )

    @property
    def energies(self) -> np.ndarray:
        """Quasiparticle energies 2 omega_q, the spectrum ``ffcore`` finds in real space."""
        return 2.0 * self.omega

    @property
    def w(self) -> np.ndarray:
        """z_q + i y_q."""
        return self.z + 1j * self.y

    def bogoliubov_factors(
        self, t: float, initial: "MomentumModes"
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Time factors (U_q(t), V_q(t)) of the pre-quench modes under this Hamiltonian.

        Solves i d/dt (U, V) = 2 (y sigma^y + z sigma^z)(U, V) from
        U(0) = u0, V(0) = -i v0.
        """
        u0 = initial.u.astype(complex)
        v0 = -1j * initial.v
        cos_term = np.cos(2 * self.omega * t)
        sin_over_omega = np.divide(
            np.sin(2 * self.omega * t),
            self.omega,
            out=np.full_like(self.omega, 2.0 * t),
            where=self.omega > 0,
        )
        u_t = cos_term * u0 - 1j * sin_over_omega * (self.z * u0 - 1j * self.y * v0)
        v_t = cos_term * v0 - 1j * sin_over_omega * (1j * self.y * u0 - self.z * v0)
        return u_t, v_t


@dataclass(frozen=True)
class ContractionSet:
    """
    Translation-invariant contractions for offsets r = -d_max..d_max.

    g[r] = <B_j A_{j+r}> is real; g_a[r] = <A_j A_{j+r}> and g_b[r] = <B_j B_{j+r}>
    are +1 / -1 at r = 0 and purely imaginary elsewhere. ``time`` is inf for the
    long-time limit.
    """

    d_max: int
    time: float
    g: np.ndarray
    g_a: np.ndarray
    g_b: np.ndarray

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.d_max, self.d_max + 1)

    def at(self, r: int) -> Tuple[float, complex, complex]:
        """(G_r, G^A_r, G^B_r) for a single offset."""
        if abs(r) > self.d_max:
            raise ChainSpecError(f"Offset {r} outside +-{self.d_max}")
        i = r + self.d_max
        return float(self.g[i]), complex(self.g_a[i]), complex(self.g_b[i])

    @property
    def is_equilibrium(self) -> bool:
        """True when G^A = delta and G^B = -delta, so determinants suffice."""
        delta = (self.offsets == 0).astype(float)
        return bool(
            np.max(np.abs(self.g_a - delta)) <= 1e-14
            and np.max(np.abs(self.g_b + delta)) <= 1e-14
        )


def _check_ring(n_sites: int) -> None:
    if n_sites < 2 or n_sites % 2:
        raise ChainSpecError(f"n_sites must be even and >= 2, got {n_sites}")


def _check_d_max(n_sites: int, d_max: int) -> None:
    _check_ring(n_sites)
    if not 0 <= d_max <= n_sites // 2 - 1:
        raise ChainSpecError(f"d_max {d_max} must lie in [0, {n_sites // 2 - 1}] for N={n_sites}")


def _site_sum(q: np.ndarray, symbol: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """(-1)^r (1/N) sum_q e^{-iqr} symbol(q) for every offset r."""
    n = q.shape[0]
    terms = np.exp(-1j * np.outer(offsets, q)) * symbol[None, :]
    if n > COMPENSATED_SUM_THRESHOLD:
        sums = np.array(
            [complex(math.fsum(row.real), math.fsum(row.imag)) for row in terms]
        )
    else:
        sums = terms.sum(axis=1)
    return np.where(offsets % 2 == 0, 1.0, -1.0) * sums / n


def ground_contractions(lam: float, n_sites: int, d_max: int) -> ContractionSet:
    """Equilibrium contractions of the uniform chain ground state at field ``lam``."""
    _check_d_max(n_sites, d_max)
    modes = MomentumModes.from_field(lam, n_sites)
    offsets = np.arange(-d_max, d_max + 1)
    delta = (offsets == 0).astype(complex)
    g = _site_sum(modes.q, modes.w / modes.omega, offsets)
    return ContractionSet(d_max=d_max, time=0.0, g=g.real, g_a=delta, g_b=-delta)


def quench_contractions(
    lam0: float, lam: float, t: float, n_sites: int, d_max: int
) -> ContractionSet:
    """Contractions at time ``t`` after quenching the ``lam0`` ground state to ``lam``."""
    _check_d_max(n_sites, d_max)
    before = MomentumModes.from_field(lam0, n_sites)
    after = MomentumModes.from_field(lam, n_sites)
    offsets = np.arange(-d_max, d_max + 1)
    delta = (offsets == 0).astype(complex)

    overlap = before.w * np.conj(after.w)
    phase = 4.0 * after.omega * t
    scale = after.w / (after.omega**2 * before.omega)
    g_symbol = scale * (overlap.real + 1j * overlap.imag * np.cos(phase))
    odd_symbol = np.sin(phase) * overlap.imag / (after.omega * before.omega)

    g = _site_sum(after.q, g_symbol, offsets)
    odd = _site_sum(after.q, odd_symbol.astype(complex), offsets)
    return ContractionSet(d_max=d_max, time=float(t), g=g.real, g_a=delta + odd, g_b=-delta + odd)


def quench_g_infty(r: int, lam: float) -> float:
    """Long-time G_r(inf) after a quench from lambda=0; lam = 1 uses the lam < 1 branch."""
    if lam < 0:
        raise ChainSpecError(f"Field must be nonnegative, got {lam}")
    if lam <= 1.0:
        if r >= 2:
            return (1 - lam**2) * lam ** (r - 1) / 2
        if r == 1:
            return 1 - lam**2 / 2
        if r == 0:
            return -lam / 2
        return 0.0
    if r >= 2:
        return 0.0
    if r == 1:
        return 0.5
    if r == 0:
        return -1 / (2 * lam)
    return (lam**2 - 1) * lam ** (r - 1) / 2


def infinite_time_contractions(lam: float, d_max: int) -> ContractionSet:
    """Stationary contractions of the lambda=0 -> ``lam`` quench in the thermodynamic limit."""
    offsets = np.arange(-d_max, d_max + 1)
    delta = (offsets == 0).astype(complex)
    g = np.array([quench_g_infty(int(r), lam) for r in offsets])
    return ContractionSet(d_max=d_max, time=math.inf, g=g, g_a=delta, g_b=-delta)


def _toeplitz_correlator(contractions: ContractionSet, distance: int) -> float:
    """det[G_{1+m-n}] for m, n = 0..d-1."""
    g = contractions.g
    c = contractions.d_max
    column = g[c + 1 : c + 1 + distance]
    row = g[c + 1 - distance + 1 : c + 2][::-1]
    return float(np.linalg.det(scipy.linalg.toeplitz(column, row)))


def _pfaffian_correlator(contractions: ContractionSet, distance: int) -> float:
    """Pfaffian over the string B_0, A_1, B_1, ..., A_d of a translation-invariant state."""
    c = contractions.d_max
    is_b = np.tile([True, False], distance)
    site = np.repeat(np.arange(distance), 2) + (~is_b)
    diff = site[None, :] - site[:, None]

    row_b, col_b = is_b[:, None], is_b[None, :]
    t_matrix = np.where(
        row_b & ~col_b,
        contractions.g[c + diff],
        np.where(
            ~row_b & col_b,
            -contractions.g[c - diff],
            np.where(row_b, contractions.g_b[c + diff], contractions.g_a[c + diff]),
        ),
    )
    value = pfaffian(t_matrix)
    if abs(value.imag) > 1e-6:
        logger.warning("Pfaffian correlator d=%d has imaginary residue %.3e", distance, value.imag)
    return float(value.real)


def correlator_from_contractions(contractions: ContractionSet, distance: int) -> float:
    """C^x_d from contractions: a Toeplitz determinant at equilibrium, a Pfaffian otherwise."""
    if not 1 <= distance <= contractions.d_max:
        raise ChainSpecError(f"distance {distance} outside [1, {contractions.d_max}]")
    if contractions.is_equilibrium:
        return _toeplitz_correlator(contractions, distance)
    return _pfaffian_correlator(contractions, distance)


def ground_wd(distance: int, lam: float, n_sites: int) -> float:
    """Reduced Wilson loop w_D of the ground state: a D x D Toeplitz determinant."""
    return _toeplitz_correlator(ground_contractions(lam, n_sites, distance), distance)


def ground_wd_profile(lam: float, n_sites: int, d_max: int) -> np.ndarray:
    """w_D for D = 1..d_max from a single set of contractions."""
    contractions = ground_contractions(lam, n_sites, d_max)
    return np.array([_toeplitz_correlator(contractions, d) for d in range(1, d_max + 1)])


def quench_wd_profile(
    lam0: float, lam: float, t: float, n_sites: int, distances: Sequence[int]
) -> np.ndarray:
    """C^x_d(t) after a uniform quench for each requested distance."""
    distances = list(distances)
    if not distances:
        return np.zeros(0)
    contractions = quench_contractions(lam0, lam, t, n_sites, max(distances))
    return np.array([correlator_from_contractions(contractions, d) for d in distances])


def quench_wd_infty(distance: int, lam: float) -> float:
    """Long-time reduced Wilson loop [(1 + sqrt(1 - lam^2)) / 2]^D, or 2^-D above lam = 1."""
    if lam < 0:
        raise ChainSpecError(f"Field must be nonnegative, got {lam}")
    if distance < 1:
        raise ChainSpecError(f"D must be >= 1, got {distance}")
    if lam > 1.0:
        return 2.0**-distance
    return ((1 + math.sqrt(1 - lam**2)) / 2) ** distance


def quench_cxd_infty_exact(distance: int, lam: float) -> float:
    """
    Exact C^x_d(inf) after a lambda=0 -> lam quench.

    For lam <= 1 this is lam^(d+1) / 2^d cosh[(d+1) log((1 + s) / lam)] with
    s = sqrt(1 - lam^2), evaluated as a^(d+1) + b^(d+1), a, b = (1 +- s) / 2,
    which stays finite for large d. Above lam = 1 it is 2^-d.
    """
    if lam < 0:
        raise ChainSpecError(f"Field must be nonnegative, got {lam}")
    if distance < 1:
        raise ChainSpecError(f"d must be >= 1, got {distance}")
    if lam > 1.0:
        return 2.0**-distance
    s = math.sqrt(1 - lam**2)
    return ((1 + s) / 2) ** (distance + 1) + ((1 - s) / 2) ** (distance + 1)


def time_averaged_correlator(
    lam0: float, lam: float, n_sites: int, distance: int, times: Sequence[float]
) -> float:
    """Mean of C^x_d(t) over ``times``."""
    values = [
        correlator_from_contractions(quench_contractions(lam0, lam, t, n_sites, distance), distance)
        for t in times
    ]
    return float(np.mean(values))
