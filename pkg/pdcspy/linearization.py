"""Linearized fluctuation dynamics around a steady comb.

Fluctuations obey ``da/dt = -i G a - i F a^dagger - Gamma a`` with::

    G_jk = 2 g sum_{n - m = j - k} A*_m A_n + delta_jk (delta_eff + d_int(j))
    F_jk = g sum_{m + n = j + k} A_m A_n

In quadratures ``x = (a + a^dagger)/sqrt(2)``, ``p = i(a^dagger - a)/sqrt(2)`` this becomes
``dR/dt = (M - Gamma) R`` with the real matrix ``M`` built by :func:`assemble_M`.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from pdcspy._utils import check_grid, symplectic_form
from pdcspy.dispersion import NormalizedParams
from pdcspy.exceptions import NotAFixedPoint, NotHermitian, PumpOverlapError, ValidationError
from pdcspy.meanfield import FieldState, _rhs, relative_residual

logger = logging.getLogger(__name__)

# Kerr coupling of the normalized equation, negative because the Kerr shift enters as +i|E|^2 E
KERR_COUPLING = -1.0
PUMP_MODELS = ("pdnlse", "full")
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PumpedSpectrum:
    """Steady comb plus the two stationary pumps at ``+-pump_mode_index``.

    Pump convention: ``A_+ = -i sqrt(|nu|/2) exp(i arg(nu)/2)``, ``A_- = sqrt(|nu|/2) exp(i arg(nu)/2)``,
    so that ``2 g A_+ A_- = i nu``.
    """

    comb: np.ndarray
    pump_plus: complex
    pump_minus: complex
    pump_mode_index: int
    nu: complex
    convention: str = "A+ = -i sqrt(|nu|/2) e^{i arg(nu)/2}, A- = sqrt(|nu|/2) e^{i arg(nu)/2}"

    @property
    def mode_count(self) -> int:
        return self.comb.shape[0]

    def pump_indices(self):
        n = self.mode_count
        return self.pump_mode_index + n // 2, -self.pump_mode_index + n // 2

    @property
    def amplitudes(self) -> np.ndarray:
        """Comb with the pump lines written in."""
        amplitudes = self.comb.copy()
        plus, minus = self.pump_indices()
        if self.pump_plus != 0 or self.pump_minus != 0:
            amplitudes[plus] = self.pump_plus
            amplitudes[minus] = self.pump_minus
        return amplitudes

    @property
    def drive(self) -> complex:
        """Parametric drive ``2 g A_+ A_-`` seen by the fluctuations."""
        return 2 * KERR_COUPLING * self.pump_plus * self.pump_minus


@dataclass(frozen=True, eq=False)
class InteractionMatrices:
    G: np.ndarray
    F: np.ndarray
    pump_model: str = "pdnlse"

    @property
    def mode_count(self) -> int:
        return self.G.shape[0]

    def check(self, tol: float = SYMMETRY_TOL) -> None:
        """Raise :class:`NotHermitian` unless G is Hermitian and F symmetric."""
        scale = max(1.0, float(np.max(np.abs(self.G))), float(np.max(np.abs(self.F))))
        if np.max(np.abs(self.G - self.G.conj().T)) > tol * scale:
            raise NotHermitian("G is not Hermitian")
        if np.max(np.abs(self.F - self.F.T)) > tol * scale:
            raise NotHermitian("F is not symmetric")


@dataclass(frozen=True, eq=False)
class ModeInteractionMatrix:
    M: np.ndarray

    @property
    def mode_count(self) -> int:
        return self.M.shape[0] // 2

    def hamiltonian_defect(self) -> float:
        """``max |M Omega + Omega M^T|``, zero for a Hamiltonian matrix."""
        omega = symplectic_form(self.mode_count)
        return float(np.max(np.abs(self.M @ omega + omega @ self.M.T)))


def pump_amplitudes(nu: complex):
    magnitude = np.sqrt(abs(nu) / 2)
    half_phase = np.exp(0.5j * np.angle(nu))
    return -1j * magnitude * half_phase, magnitude * half_phase


def assemble_pumped_spectrum(steady: FieldState, p: NormalizedParams, overlap_threshold: float = 1e-2) -> PumpedSpectrum:
    """Attach the pumps for drive ``p.nu`` to a steady comb.

    :raises PumpOverlapError: if the comb already carries more than ``overlap_threshold`` times the pump
        amplitude on a pump mode
    """
    check_grid("steady", steady.spectrum, p.mode_count)
    plus, minus = pump_amplitudes(p.nu)
    pumped = PumpedSpectrum(steady.spectrum.copy(), complex(plus), complex(minus), p.pump_mode_index, p.nu)

    if p.nu != 0:
        i, j = pumped.pump_indices()
        overlap = max(abs(steady.spectrum[i]), abs(steady.spectrum[j]))
        if overlap > overlap_threshold * abs(plus):
            raise PumpOverlapError(f"comb amplitude {overlap:.3g} on the pump modes +-{p.pump_mode_index}")
    return pumped


def _difference_sums(x: np.ndarray) -> np.ndarray:
    """``C[j, k] = sum_{n - m = j - k} conj(x_m) x_n``, truncated to the grid."""
    n = x.shape[0]
    full = np.convolve(x, np.conj(x[::-1]))
    idx = np.arange(n)
    return full[np.subtract.outer(idx, idx) + n - 1]


def _sum_products(x: np.ndarray) -> np.ndarray:
    """``P[j, k] = sum_{m + n = j + k} x_m x_n``, truncated to the grid."""
    full = np.convolve(x, x)
    idx = np.arange(x.shape[0])
    return full[np.add.outer(idx, idx)]


def build_GF(A: PumpedSpectrum, p: NormalizedParams, pump_model: str = "pdnlse") -> InteractionMatrices:
    """Interaction matrices for the comb ``A``.

    ``pump_model="pdnlse"`` keeps the pumps only as the stationary drive ``i nu`` on the ``j + k = 0``
    anti-diagonal, matching the mean-field equation exactly. ``"full"`` treats the pumps as two more comb
    lines in every sum, adding the single-pump terms at ``j + k = +-2 mu_p``, Bragg scattering at
    ``j - k = +-2 mu_p`` and pump-comb mixing. In both models the pump self and cross phase modulation on
    the diagonal is left out, because ``delta_eff`` already contains it.
    """
    if pump_model not in PUMP_MODELS:
        raise ValidationError(f"unknown pump model {pump_model!r}, expected one of {PUMP_MODELS}")
    check_grid("A", A.comb, p.mode_count)
    n = p.mode_count
    g = KERR_COUPLING

    if pump_model == "full":
        lines = A.amplitudes
        G = 2 * g * _difference_sums(lines)
        G -= 2 * g * (abs(A.pump_plus) ** 2 + abs(A.pump_minus) ** 2) * np.eye(n)
        F = g * _sum_products(lines)
    else:
        G = 2 * g * _difference_sums(A.comb)
        F = g * _sum_products(A.comb)
        rows = np.arange(1, n)
        F[rows, n - rows] += A.drive

    G = G + np.diag(p.delta_eff + p.d_int)
    G = (G + G.conj().T) / 2
    F = (F + F.T) / 2
    return InteractionMatrices(G, F, pump_model)


def assemble_M(gf: InteractionMatrices) -> ModeInteractionMatrix:
    """``[[Im(G+F), Re(G-F)], [-Re(G+F), -Im(G+F)^T]]``."""
    gf.check()
    plus = gf.G + gf.F
    minus = gf.G - gf.F
    M = np.block([[plus.imag, minus.real], [-plus.real, -plus.imag.T]])
    return ModeInteractionMatrix(M)


def pump_model_for(steady: FieldState, pump_model: str) -> str:
    """Model actually used for ``steady``: the vacuum below threshold always takes ``"pdnlse"``.

    Without a comb the fluctuations see the pumps only through the non-degenerate drive on ``j + k = 0``.
    """
    if pump_model not in PUMP_MODELS:
        raise ValidationError(f"unknown pump model {pump_model!r}, expected one of {PUMP_MODELS}")
    if pump_model == "full" and not np.any(steady.spectrum):
        logger.debug("vacuum state, using the drive-only pump model")
        return "pdnlse"
    return pump_model


def interaction_matrix(steady: FieldState, p: NormalizedParams, pump_model: str = "pdnlse") -> ModeInteractionMatrix:
    """Shortcut for pumps, then F and G, then M."""
    return assemble_M(build_GF(assemble_pumped_spectrum(steady, p), p, pump_model))


def quadrature_jacobian(steady: FieldState, p: NormalizedParams, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the mean-field right-hand side in ``(x, p)`` coordinates."""
    n = p.mode_count
    a0 = steady.spectrum
    r0 = np.sqrt(2) * np.concatenate([a0.real, a0.imag])

    def flow(r):
        rhs = _rhs((r[:n] + 1j * r[n:]) / np.sqrt(2), p)
        return np.sqrt(2) * np.concatenate([rhs.real, rhs.imag])

    jac = np.empty((2 * n, 2 * n))
    for k in range(2 * n):
        dr = np.zeros(2 * n)
        dr[k] = step
        jac[:, k] = (flow(r0 + dr) - flow(r0 - dr)) / (2 * step)
    return jac


def jacobian_check(
    M: ModeInteractionMatrix,
    steady: FieldState,
    p: NormalizedParams,
    *,
    step: float = 1e-6,
    require_fixed_point: bool = True,
    fixed_point_tol: float = 1e-8,
    exclude_modes: Optional[Sequence[int]] = None,
) -> float:
    """Max deviation between ``M - Gamma`` and the finite-difference Jacobian, relative to the Jacobian scale.

    Rows and columns of the pump modes are left out unless ``exclude_modes`` says otherwise. The
    comparison holds for matrices built with the ``"pdnlse"`` pump model.

    :raises NotAFixedPoint: when ``require_fixed_point`` is set and ``steady`` is not stationary
    """
    n = p.mode_count
    if M.mode_count != n:
        raise ValidationError(f"M covers {M.mode_count} modes, parameters {n}")
    if require_fixed_point:
        residual = relative_residual(steady, p)
        if residual > fixed_point_tol:
            raise NotAFixedPoint(f"relative residual {residual:.3g} exceeds {fixed_point_tol:.3g}")

    jac = quadrature_jacobian(steady, p, step)
    linear = M.M - p.gamma_total * np.eye(2 * n)

    if exclude_modes is None:
        exclude_modes = (p.pump_mode_index, -p.pump_mode_index)
    keep = np.ones(2 * n, dtype=bool)
    for mu in exclude_modes:
        keep[mu + n // 2] = False
        keep[mu + n // 2 + n] = False

    scale = max(1.0, float(np.max(np.abs(jac))))
    deviation = float(np.max(np.abs(linear - jac)[np.ix_(keep, keep)])) / scale
    logger.debug("jacobian deviation %.3g (scale %.3g)", deviation, scale)
    return deviation
