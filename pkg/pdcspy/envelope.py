"""Intracavity photon-number envelope of the quantum fluctuations.

In the ladder basis ``alpha = (a, a^dagger)`` the fluctuations follow ``d alpha/dt = (K - Gamma) alpha`` with
``K = O^dagger M O``. The resolvent ``Q(omega) = (i omega + Gamma - K)^-1 sqrt(2 Gamma)`` splits into N x N
blocks ``[[Q1, Q2], [Q3, Q4]]`` and the envelope is::

    n(theta) = integral d omega  sum_{l, m} exp(i (l - m) theta) (Q2 Q2^dagger)_{lm}

integrated over ``[-omega_max, omega_max]`` with no ``1/2 pi`` prefactor. The vacuum (``M = 0``) gives zero.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate, linalg, signal

from pdcspy._utils import as_matrix, check_finite, ladder_to_quadrature, wrap_angle
from pdcspy.exceptions import SingularSystemError, ValidationError
from pdcspy.providers import SerialProvider
from pdcspy.squeezing import LossMatrix

logger = logging.getLogger(__name__)

CONVERGENCE_TOL = 0.01


@dataclass(frozen=True, eq=False)
class AnnihilationTransfer:
    omega: float
    Q: np.ndarray

    @property
    def mode_count(self) -> int:
        return self.Q.shape[0] // 2

    @property
    def Q1(self) -> np.ndarray:
        n = self.mode_count
        return self.Q[:n, :n]

    @property
    def Q2(self) -> np.ndarray:
        n = self.mode_count
        return self.Q[:n, n:]

    @property
    def Q3(self) -> np.ndarray:
        n = self.mode_count
        return self.Q[n:, :n]

    @property
    def Q4(self) -> np.ndarray:
        n = self.mode_count
        return self.Q[n:, n:]


@dataclass(frozen=True, eq=False)
class NoiseEnvelope:
    theta: np.ndarray
    values: np.ndarray
    omega_max: float
    omega_points: int
    converged: Optional[bool] = None
    relative_change: Optional[float] = None

    def mean(self) -> float:
        return float(np.mean(self.values))


def annihilation_transfer(M, loss: LossMatrix, omega: float) -> AnnihilationTransfer:
    m = as_matrix(M)
    check_finite("omega", omega)
    n = m.shape[0] // 2
    if n != loss.mode_count:
        raise ValidationError(f"M covers {n} modes, loss {loss.mode_count}")
    basis = ladder_to_quadrature(n)
    generator = basis.conj().T @ m @ basis
    rates = loss.diagonal
    system = 1j * omega * np.eye(2 * n) + np.diag(rates) - generator
    try:
        Q = linalg.solve(system, np.diag(np.sqrt(2 * rates)).astype(complex))
    except linalg.LinAlgError as exc:
        raise SingularSystemError(omega) from exc
    return AnnihilationTransfer(float(omega), Q)


def _diagonal_sums(B: np.ndarray) -> np.ndarray:
    """``c[d + N - 1] = sum_{l - m = d} B[l, m]`` for ``d = -(N-1) .. N-1``."""
    n = B.shape[0]
    offsets = (np.subtract.outer(np.arange(n), np.arange(n)) + n - 1).ravel()
    flat = B.ravel()
    return np.bincount(offsets, weights=flat.real, minlength=2 * n - 1) + 1j * np.bincount(
        offsets, weights=flat.imag, minlength=2 * n - 1
    )


def _sums_at(omega: float, M: np.ndarray, loss: LossMatrix):
    """Diagonal sums of ``Q2 Q2^dagger`` at ``+omega`` and ``-omega`` from one solve."""
    q = annihilation_transfer(M, loss, omega)
    # Q2(-omega) = conj(Q3(omega))
    return _diagonal_sums(q.Q2 @ q.Q2.conj().T), np.conj(_diagonal_sums(q.Q3 @ q.Q3.conj().T))


def _theta_grid(theta: Union[int, Sequence[float]], n: int) -> np.ndarray:
    if isinstance(theta, (int, np.integer)):
        grid = 2 * np.pi * np.arange(theta) / theta
    else:
        grid = np.asarray(theta, dtype=float)
    if grid.ndim != 1 or grid.shape[0] < n:
        raise ValidationError(f"theta grid needs at least {n} points")
    return grid


def _integrate(omegas: np.ndarray, plus: np.ndarray, minus: np.ndarray, count: int, theta: np.ndarray) -> np.ndarray:
    """Trapezoid over the symmetric grid built from the first ``count`` non-negative samples."""
    full_omega = np.concatenate([-omegas[1:count][::-1], omegas[:count]])
    full = np.concatenate([minus[1:count][::-1], plus[:count]])
    sums = integrate.trapezoid(full, full_omega, axis=0)
    n = (sums.shape[0] + 1) // 2
    d = np.arange(-(n - 1), n)
    values = np.exp(1j * np.outer(theta, d)) @ sums
    residue = np.max(np.abs(values.imag))
    if residue > 1e-10 * max(np.max(np.abs(values.real)), 1e-300):
        logger.warning("envelope keeps an imaginary residue of %.3g", residue)
    return values.real


def photon_envelope(
    M,
    loss: LossMatrix,
    theta_grid: Union[int, Sequence[float]] = 512,
    omega_max: float = 20.0,
    omega_points: int = 401,
    *,
    check_convergence: bool = True,
    provider=None,
) -> NoiseEnvelope:
    """Photon-number density of the fluctuations around the ring.

    ``omega_points`` counts samples of the symmetric grid and must be odd. The convergence check repeats the
    integral on twice the domain with twice the points (same spacing) and flags a change above 1%.
    """
    m = as_matrix(M)
    n = m.shape[0] // 2
    if not omega_max > 0:
        raise ValidationError(f"omega_max must be positive, got {omega_max}")
    if omega_points < 3 or omega_points % 2 == 0:
        raise ValidationError(f"omega_points must be odd and >= 3, got {omega_points}")
    theta = _theta_grid(theta_grid, n)
    provider = provider or SerialProvider()

    half = (omega_points + 1) // 2
    spacing = omega_max / (half - 1)
    total = 2 * half - 1 if check_convergence else half
    omegas = spacing * np.arange(total)

    plus = np.empty((total, 2 * n - 1), dtype=complex)
    minus = np.empty_like(plus)
    for i, outcome in enumerate(provider.imap(functools.partial(_sums_at, M=m, loss=loss), omegas.tolist())):
        if isinstance(outcome, BaseException):
            raise outcome
        plus[i], minus[i] = outcome

    values = _integrate(omegas, plus, minus, half, theta)
    converged, change = None, None
    if check_convergence:
        doubled = _integrate(omegas, plus, minus, total, theta)
        scale = np.max(np.abs(values))
        change = float(np.max(np.abs(doubled - values)) / scale) if scale > 0 else 0.0
        converged = change < CONVERGENCE_TOL
        if not converged:
            logger.warning("envelope changes by %.2f%% when the omega domain is doubled", 100 * change)
    return NoiseEnvelope(theta, values, float(omega_max), int(omega_points), converged, change)


def peak_positions(values: np.ndarray, theta: np.ndarray, count: int = 2) -> np.ndarray:
    """Angles of the ``count`` highest local maxima of a periodic profile."""
    size = values.shape[0]
    tiled = np.concatenate([values, values, values])
    peaks, _ = signal.find_peaks(tiled)
    peaks = np.unique(peaks[(peaks >= size) & (peaks < 2 * size)] - size)
    top = peaks[np.argsort(values[peaks])[::-1][:count]]
    return theta[np.sort(top)]


def background_oscillation_metric(env: NoiseEnvelope, soliton_positions: Sequence[float], exclusion_halfwidth: float) -> float:
    """Variance of the envelope over the angles farther than ``exclusion_halfwidth`` from every pulse."""
    keep = np.ones(env.theta.shape[0], dtype=bool)
    for position in soliton_positions:
        keep &= np.abs(wrap_angle(env.theta - position)) > exclusion_halfwidth
    if not np.any(keep):
        raise ValidationError("the exclusion windows cover the whole ring")
    return float(np.var(env.values[keep]))
