"""
Free-fermion machinery for periodic transverse-field Ising chains.

A chain H = -sum_j (J_j tx_j tx_{j+1} + lambda_j tz_j) maps by Jordan-Wigner
(tz_j = 1 - 2 n_j) onto a quadratic form 1/2 C^dag M C with M = [[A, B], [B^T, -A]].
Writing A_j = c_j^dag + c_j and B_j = c_j^dag - c_j, the same form reads
1/2 sum_ij K_ij B_i A_j with K = A + B, and the singular value decomposition
K = Psi^T diag(W) Phi yields the Bogoliubov factors directly.

Only the even-parity sector is modelled: the boundary bond carries the
antiperiodic sign and the state is the quasiparticle vacuum.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import ChainSpecError, CorrelatorRangeError, DiagonalizationError
from .pfaffian import SkewMatrix, pfaffian

logger = logging.getLogger(__name__)

EVEN_PARITY = "even"

# Allowed overshoot of |C^x_d| beyond 1 and tolerated imaginary residue of pf(T).
CORRELATOR_EPS = 1e-6
IMAG_TOLERANCE = 1e-6

STRING_LAYOUT = "string"
BLOCK_LAYOUT = "block"


@dataclass(frozen=True)
class ChainSpec:
    """One periodic Ising chain: bond couplings J_j (J_{N-1} closes the ring) and fields."""

    n_sites: int
    couplings: Tuple[float, ...]
    fields: Tuple[float, ...]
    parity: str = EVEN_PARITY

    def __post_init__(self) -> None:
        object.__setattr__(self, "couplings", tuple(float(x) for x in self.couplings))
        object.__setattr__(self, "fields", tuple(float(x) for x in self.fields))
        if self.n_sites < 2 or self.n_sites % 2:
            raise ChainSpecError(f"n_sites must be even and >= 2, got {self.n_sites}")
        if len(self.couplings) != self.n_sites or len(self.fields) != self.n_sites:
            raise ChainSpecError(
                f"Expected {self.n_sites} couplings and fields, got "
                f"{len(self.couplings)} and {len(self.fields)}"
            )
        if not (np.all(np.isfinite(self.couplings)) and np.all(np.isfinite(self.fields))):
            raise ChainSpecError("Couplings and fields must be finite")
        if self.parity != EVEN_PARITY:
            raise ChainSpecError(f"Only the even-parity sector is supported, got {self.parity!r}")

    @classmethod
    def uniform(cls, n_sites: int, coupling: float, field: float) -> "ChainSpec":
        """Translation-invariant chain with one coupling and one field."""
        return cls(n_sites, (coupling,) * n_sites, (field,) * n_sites)

    def with_fields(self, fields: Sequence[float]) -> "ChainSpec":
        """Same couplings, new transverse fields."""
        return ChainSpec(self.n_sites, self.couplings, tuple(fields), self.parity)


@dataclass(frozen=True)
class BdgSystem:
    """Real N x N blocks of the BdG matrix: A symmetric, B antisymmetric."""

    a_matrix: np.ndarray
    b_matrix: np.ndarray

    @property
    def n_sites(self) -> int:
        return int(self.a_matrix.shape[0])

    @property
    def m_matrix(self) -> np.ndarray:
        """Full 2N x 2N matrix M = [[A, B], [B^T, -A]]."""
        return np.block([[self.a_matrix, self.b_matrix], [self.b_matrix.T, -self.a_matrix]])

    @property
    def k_matrix(self) -> np.ndarray:
        """Majorana coupling K = A + B."""
        return self.a_matrix + self.b_matrix


@dataclass(frozen=True)
class SpectralData:
    """Quasiparticle energies W (ascending) and Bogoliubov factors; rows are modes."""

    energies: np.ndarray
    g_matrix: np.ndarray
    h_matrix: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @property
    def n_sites(self) -> int:
        return int(self.energies.shape[0])

    @property
    def r_matrix(self) -> np.ndarray:
        """Orthogonal R = [[G, H], [H, G]] mapping (c, c^dag) onto (eta, eta^dag)."""
        return np.block([[self.g_matrix, self.h_matrix], [self.h_matrix, self.g_matrix]])

    @property
    def vacuum_parity(self) -> int:
        """Fermion parity of the quasiparticle vacuum, +1 for even."""
        sign = np.linalg.det(self.phi) * np.linalg.det(self.psi)
        return 1 if sign > 0 else -1


@dataclass(frozen=True)
class CorrelationKernel:
    """
    Time-evolved factors Phi~(t), Psi~(t) and the Majorana contractions they imply.

    ``contractions`` is the 2N x 2N matrix of <O_a O_b> over the operator order
    (A_0 .. A_{N-1}, B_0 .. B_{N-1}).
    """

    time: float
    phi_tilde: np.ndarray
    psi_tilde: np.ndarray
    contractions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        aa = self.phi_tilde @ self.phi_tilde.conj().T
        bb = -(self.psi_tilde @ self.psi_tilde.conj().T)
        ba = -(self.psi_tilde @ self.phi_tilde.conj().T)
        object.__setattr__(self, "contractions", np.block([[aa, -ba.T], [ba, bb]]))

    @property
    def n_sites(self) -> int:
        return int(self.phi_tilde.shape[0])

    @property
    def aa(self) -> np.ndarray:
        """<A_m A_n> = [Phi~ Phi~^dag]_mn."""
        n = self.n_sites
        return self.contractions[:n, :n]

    @property
    def bb(self) -> np.ndarray:
        """<B_m B_n> = -[Psi~ Psi~^dag]_mn."""
        n = self.n_sites
        return self.contractions[n:, n:]

    @property
    def ba(self) -> np.ndarray:
        """<B_m A_n> = -[Psi~ Phi~^dag]_mn."""
        n = self.n_sites
        return self.contractions[n:, :n]


def build_bdg(spec: ChainSpec) -> BdgSystem:
    """Assemble A and B for the even-parity sector of ``spec``."""
    n = spec.n_sites
    couplings = np.asarray(spec.couplings)
    a = np.diag(2.0 * np.asarray(spec.fields))
    b = np.zeros((n, n))

    bulk = np.arange(n - 1)
    a[bulk, bulk + 1] = -couplings[:-1]
    a[bulk + 1, bulk] = -couplings[:-1]
    b[bulk, bulk + 1] = -couplings[:-1]
    b[bulk + 1, bulk] = couplings[:-1]

    # Antiperiodic closing bond: even fermion parity flips its sign.
    boundary = couplings[-1]
    a[n - 1, 0] += boundary
    a[0, n - 1] += boundary
    b[n - 1, 0] += boundary
    b[0, n - 1] -= boundary
    return BdgSystem(a_matrix=a, b_matrix=b)


def diagonalize(bdg: BdgSystem) -> SpectralData:
    """
    Bogoliubov transformation of ``bdg``.

    Energies come out ascending. Each mode's sign is fixed so that its
    largest-magnitude entry in Phi is positive.
    """
    try:
        u, s, vh = scipy.linalg.svd(bdg.k_matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise DiagonalizationError(f"SVD of the BdG coupling failed: {e}") from e

    order = np.argsort(s, kind="stable")
    energies = s[order]
    phi = vh[order, :]
    psi = u.T[order, :]

    rows = np.arange(phi.shape[0])
    signs = np.sign(phi[rows, np.argmax(np.abs(phi), axis=1)])
    signs[signs == 0] = 1.0
    phi = phi * signs[:, None]
    psi = psi * signs[:, None]

    spectral = SpectralData(
        energies=energies,
        g_matrix=0.5 * (phi + psi),
        h_matrix=0.5 * (phi - psi),
        phi=phi,
        psi=psi,
    )
    if spectral.vacuum_parity < 0:
        logger.warning(
            "BdG vacuum has odd fermion parity; it is not the even-sector ground state"
        )
    return spectral


def evolve_kernel(initial: SpectralData, quench: SpectralData, t: float) -> CorrelationKernel:
    """Evolve the vacuum of ``initial`` for time ``t`` under the ``quench`` Hamiltonian."""
    if initial.n_sites != quench.n_sites:
        raise ChainSpecError(
            f"Initial and quench chains differ in size: {initial.n_sites} vs {quench.n_sites}"
        )
    if not np.isfinite(t):
        raise ChainSpecError(f"Evolution time must be finite, got {t}")

    cos_wt = np.cos(quench.energies * t)[:, None]
    sin_wt = np.sin(quench.energies * t)[:, None]
    phi_overlap = quench.phi @ initial.phi.T
    psi_overlap = quench.psi @ initial.psi.T

    phi_tilde = quench.phi.T @ (cos_wt * phi_overlap - 1j * sin_wt * psi_overlap)
    psi_tilde = quench.psi.T @ (cos_wt * psi_overlap - 1j * sin_wt * phi_overlap)
    return CorrelationKernel(time=float(t), phi_tilde=phi_tilde, psi_tilde=psi_tilde)


def ground_kernel(spectral: SpectralData) -> CorrelationKernel:
    """Contractions of the stationary vacuum of ``spectral``."""
    return evolve_kernel(spectral, spectral, 0.0)


def _check_string(n_sites: int, start_site: int, distance: int) -> None:
    if not 0 <= start_site < n_sites:
        raise ChainSpecError(f"start_site {start_site} outside [0, {n_sites})")
    if not 1 <= distance <= n_sites // 2 - 1:
        raise ChainSpecError(
            f"distance {distance} outside [1, {n_sites // 2 - 1}] for N={n_sites}"
        )


def _string_operators(n_sites: int, start_site: int, distance: int, layout: str) -> List[int]:
    """Row indices into ``CorrelationKernel.contractions`` for the string's Majoranas."""
    b_sites = [n_sites + (start_site + k) % n_sites for k in range(distance)]
    a_sites = [(start_site + k + 1) % n_sites for k in range(distance)]
    if layout == STRING_LAYOUT:
        return [site for pair in zip(b_sites, a_sites) for site in pair]
    if layout == BLOCK_LAYOUT:
        return b_sites + a_sites
    raise ValueError(f"Unknown layout {layout!r}; use {STRING_LAYOUT!r} or {BLOCK_LAYOUT!r}")


def contraction_matrices(
    kernel: CorrelationKernel,
    start_site: int,
    distance: int,
    layout: str = STRING_LAYOUT,
) -> SkewMatrix:
    """
    Skew matrix T whose Pfaffian gives <tx_j tx_{j+d}>.

    The string layout orders operators as B_j, A_{j+1}, B_{j+1}, ..., A_{j+d}.
    The block layout [[P, M], [-M^T, Q]] lists all B's before all A's and
    differs in Pfaffian sign by (-1)^(d(d-1)/2). A string passing the closing
    bond has its first row and column negated.
    """
    n = kernel.n_sites
    _check_string(n, start_site, distance)
    index = _string_operators(n, start_site, distance, layout)
    t_matrix = kernel.contractions[np.ix_(index, index)].copy()
    if start_site + distance >= n:
        t_matrix[0, :] *= -1
        t_matrix[:, 0] *= -1
    return SkewMatrix(t_matrix)


def xx_correlator(
    kernel: CorrelationKernel,
    start_site: int,
    distance: int,
    layout: str = STRING_LAYOUT,
) -> float:
    """C^x_d(t) = <tx_j tx_{j+d}> as the real part of a Pfaffian."""
    value = pfaffian(contraction_matrices(kernel, start_site, distance, layout))
    if layout == BLOCK_LAYOUT and (distance * (distance - 1) // 2) % 2:
        value = -value

    logger.debug(
        "C^x_%d(t=%g) at site %d: |Im pf| = %.3e", distance, kernel.time, start_site, abs(value.imag)
    )
    if abs(value.imag) > IMAG_TOLERANCE:
        logger.warning(
            "Correlator j=%d d=%d t=%g has imaginary residue %.3e",
            start_site,
            distance,
            kernel.time,
            abs(value.imag),
        )
    if abs(value.real) > 1.0 + CORRELATOR_EPS:
        raise CorrelatorRangeError(
            f"C^x_{distance}(t={kernel.time}) = {value.real} at site {start_site} exceeds 1"
        )
    return float(value.real)
