"""Output squeezing from the input-output transfer function.

Per analysis frequency ``omega`` (units of the total decay rate)::

    S(omega) = sqrt(2 Gamma) (i omega + Gamma - M)^-1 sqrt(2 Gamma) - I

is split as ``U diag(D) V^dagger``. Column ``r`` of ``U`` is the output supermode with quadrature variance
``D[r]**2``; intrinsic loss then mixes in vacuum as a beam splitter of transmission ``gamma_c / Gamma``.
At ``omega = 0`` an above-threshold state is close to singular because of its translation mode.
"""

import functools
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize
from tqdm import tqdm

from pdcspy._utils import as_matrix, check_finite, mode_indices, to_db
from pdcspy.dispersion import NormalizedParams
from pdcspy.exceptions import DegeneracyWarning, NumericalError, SingularSystemError, ValidationError
from pdcspy.providers import SerialProvider

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-10
RECIPROCITY_TOL = 1e-8
QDW_THRESHOLD = 0.5


@dataclass(frozen=True)
class LossMatrix:
    """Uniform coupling and intrinsic rates on ``mode_count`` modes (both quadratures)."""

    gamma_c: float
    gamma_i: float
    mode_count: int

    def __post_init__(self):
        if not self.gamma_c > 0 or self.gamma_i < 0:
            raise ValidationError(f"need gamma_c > 0 and gamma_i >= 0, got {self.gamma_c}, {self.gamma_i}")

    @classmethod
    def from_params(cls, p: NormalizedParams) -> "LossMatrix":
        return cls(p.gamma_c, p.gamma_i, p.mode_count)

    @property
    def gamma_total(self) -> float:
        return self.gamma_c + self.gamma_i

    @property
    def diagonal(self) -> np.ndarray:
        return np.full(2 * self.mode_count, self.gamma_total)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


@dataclass(frozen=True, eq=False)
class FrequencyDecomposition:
    omega: float
    S: np.ndarray
    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    D_loss: np.ndarray

    @property
    def levels_db(self) -> np.ndarray:
        return to_db(self.D_loss)

    def reconstruction_error(self) -> float:
        return float(np.linalg.norm(self.U @ np.diag(self.D) @ self.V.conj().T - self.S) / np.linalg.norm(self.S))


@dataclass(eq=False)
class SqueezingSpectrum:
    """Levels in dB, row per ``omega``, ascending within a row; failed frequencies hold NaN."""

    omega: np.ndarray
    levels_db: np.ndarray
    failures: Dict[int, str] = field(default_factory=dict)

    @property
    def supermode_ids(self) -> np.ndarray:
        """Rank of each level at its own frequency; no continuity across ``omega``."""
        return np.tile(np.arange(self.levels_db.shape[1]), (self.levels_db.shape[0], 1))

    def best(self) -> Tuple[float, float]:
        """``(omega, level)`` of the strongest squeezing."""
        column = self.levels_db[:, 0]
        i = int(np.nanargmin(column))
        return float(self.omega[i]), float(column[i])


@dataclass(frozen=True, eq=False)
class Supermode:
    omega: float
    rank: int
    coefficients: np.ndarray
    level_db: float

    @property
    def mode_count(self) -> int:
        return self.coefficients.shape[0] // 2

    @property
    def mu(self) -> np.ndarray:
        return mode_indices(self.mode_count)

    @property
    def x(self) -> np.ndarray:
        return self.coefficients[: self.mode_count]

    @property
    def p(self) -> np.ndarray:
        return self.coefficients[self.mode_count :]

    @property
    def weights(self) -> np.ndarray:
        """Squared weight per mode, both quadratures combined."""
        return np.abs(self.x) ** 2 + np.abs(self.p) ** 2

    @property
    def participation_ratio(self) -> float:
        return float(1 / np.sum(self.weights**2))

    @property
    def dominant_mu(self) -> int:
        return int(self.mu[np.argmax(self.weights)])

    def pair_weight(self, mu: int) -> float:
        """Weight on the modes ``+-mu``."""
        mask = np.abs(self.mu) == abs(mu)
        return float(self.weights[mask].sum())

    def two_mode_balance(self, mu: int) -> float:
        """``min/max`` of the weights on ``+mu`` and ``-mu``, 1 for a balanced two-mode state."""
        w = self.weights
        n = self.mode_count // 2
        if mu == 0 or abs(mu) >= n:
            return 0.0
        a, b = w[abs(mu) + n], w[-abs(mu) + n]
        return float(min(a, b) / max(a, b)) if max(a, b) > 0 else 0.0

@dataclass
class DegeneracyReport:
    omega: np.ndarray
    pairs: List[List[Tuple[int, int]]]
    unpaired: List[List[int]]
    single_mode_branches: List[List[int]]


def transfer_function(M, loss: LossMatrix, omega: float) -> np.ndarray:
    """``S(omega)``, by a dense solve rather than an explicit inverse."""
    m = as_matrix(M)
    check_finite("omega", omega)
    n2 = m.shape[0]
    if n2 != 2 * loss.mode_count:
        raise ValidationError(f"M has size {n2}, loss covers {loss.mode_count} modes")
    rates = loss.diagonal
    root = np.sqrt(2 * rates)
    system = 1j * omega * np.eye(n2) + np.diag(rates) - m
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", linalg.LinAlgWarning)
        try:
            solved = linalg.solve(system, np.diag(root).astype(complex))
        except linalg.LinAlgError as exc:
            raise SingularSystemError(omega) from exc
    for warning in caught:
        logger.warning("ill-conditioned resolvent at omega=%s: %s", omega, warning.message)
    return root[:, None] * solved - np.eye(n2)


def reciprocal_defect(D: np.ndarray) -> float:
    """``max |D[k] D[-1-k] - 1|`` over ascending singular values."""
    return float(np.max(np.abs(D * D[::-1] - 1)))


def _degenerate_blocks(D: np.ndarray, tol: float) -> List[np.ndarray]:
    blocks, start = [], 0
    for k in range(1, D.shape[0] + 1):
        if k == D.shape[0] or D[k] - D[k - 1] > tol * max(1.0, D[k - 1]):
            if k - start > 1:
                blocks.append(np.arange(start, k))
            start = k
    return blocks


def _fix_gauge(U: np.ndarray, V: np.ndarray, D: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    U, V = U.copy(), V.copy()
    for block in _degenerate_blocks(D, tol):
        u = U[:, block]
        # rotate the block towards the single-quadrature basis vectors it overlaps most
        targets = np.sort(np.argsort(-np.sum(np.abs(u) ** 2, axis=1), kind="stable")[: block.size])
        rotation, _ = linalg.polar(u[targets, :].conj().T)
        U[:, block] = u @ rotation
        V[:, block] = V[:, block] @ rotation
    for c in range(U.shape[1]):
        k = int(np.argmax(np.abs(U[:, c])))
        phase = U[k, c] / abs(U[k, c])
        U[:, c] /= phase
        V[:, c] /= phase
    return U, V


def bloch_messiah(
    S: np.ndarray, *, gauge: bool = True, expect_symplectic: bool = True, degeneracy_tol: float = DEGENERACY_TOL
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``S = U diag(D) V^dagger`` with ``D`` ascending.

    Within blocks of equal singular values the columns are rotated towards single-quadrature basis vectors
    and every column is phased so its largest entry is real and positive.
    """
    check_finite("S", S)
    u, s, vh = linalg.svd(S)
    U, D, V = u[:, ::-1], s[::-1], vh.conj().T[:, ::-1]
    if expect_symplectic:
        defect = reciprocal_defect(D)
        if defect > RECIPROCITY_TOL:
            logger.warning("singular values do not pair reciprocally, defect %.3g", defect)
    if gauge:
        U, V = _fix_gauge(U, V, D, degeneracy_tol)
    return U, D, V


def apply_intrinsic_loss(D: np.ndarray, gamma_c: float, gamma_i: float) -> np.ndarray:
    """Variance after the loss beam splitter, ``gamma_i/Gamma + (gamma_c/Gamma) D**2``."""
    if not gamma_c > 0 or gamma_i < 0:
        raise ValidationError(f"need gamma_c > 0 and gamma_i >= 0, got {gamma_c}, {gamma_i}")
    total = gamma_c + gamma_i
    return gamma_i / total + (gamma_c / total) * np.asarray(D) ** 2


def decompose(M, loss: LossMatrix, omega: float, gauge: bool = True) -> FrequencyDecomposition:
    S = transfer_function(M, loss, omega)
    U, D, V = bloch_messiah(S, gauge=gauge)
    return FrequencyDecomposition(float(omega), S, U, D, V, apply_intrinsic_loss(D, loss.gamma_c, loss.gamma_i))


def _levels_at(omega: float, M: np.ndarray, loss: LossMatrix) -> np.ndarray:
    S = transfer_function(M, loss, omega)
    D = linalg.svdvals(S)[::-1]
    return to_db(apply_intrinsic_loss(D, loss.gamma_c, loss.gamma_i))


def squeezing_spectrum(M, loss: LossMatrix, omega_grid, *, provider=None, progress: bool = False) -> SqueezingSpectrum:
    """Sorted levels at every ``omega``, each frequency decomposed independently."""
    omega = np.asarray(omega_grid, dtype=float)
    check_finite("omega_grid", omega)
    m = as_matrix(M)
    provider = provider or SerialProvider()

    levels = np.full((omega.shape[0], m.shape[0]), np.nan)
    failures: Dict[int, str] = {}
    outcomes = provider.imap(functools.partial(_levels_at, M=m, loss=loss), omega.tolist())
    for i, outcome in enumerate(tqdm(outcomes, total=omega.shape[0], disable=not progress)):
        if isinstance(outcome, BaseException):
            if not isinstance(outcome, (NumericalError, ValidationError, linalg.LinAlgError)):
                raise outcome
            logger.warning("squeezing spectrum failed at omega=%s: %s", omega[i], outcome)
            failures[i] = f"{type(outcome).__name__}: {outcome}"
            continue
        levels[i] = outcome
    return SqueezingSpectrum(omega, levels, failures)


def extract_supermodes(M, loss: LossMatrix, omega: float, k: int) -> List[Supermode]:
    """The ``k`` most squeezed output supermodes at ``omega``."""
    m = as_matrix(M)
    if not 1 <= k <= m.shape[0]:
        raise ValidationError(f"k must lie in [1, {m.shape[0]}], got {k}")
    dec = decompose(m, loss, omega)
    gaps = np.diff(dec.D_loss[: min(k + 1, m.shape[0])])
    if np.any(gaps < DEGENERACY_TOL):
        warnings.warn(f"degenerate supermodes among the first {k} at omega={omega}", DegeneracyWarning, stacklevel=2)
        logger.info("degenerate supermodes at omega=%s, basis fixed by gauge rotation", omega)
    levels = dec.levels_db
    return [Supermode(dec.omega, r, dec.U[:, r].copy(), float(levels[r])) for r in range(k)]


def detect_degenerate_pairs(spectrum: SqueezingSpectrum, tol: float = 1e-6) -> DegeneracyReport:
    """Greedily pair neighbouring levels closer than ``tol`` dB at every frequency."""
    pairs, unpaired, single = [], [], []
    for row in spectrum.levels_db:
        row_pairs, row_unpaired = [], []
        if np.all(np.isfinite(row)):
            k = 0
            while k < row.shape[0]:
                if k + 1 < row.shape[0] and abs(row[k + 1] - row[k]) < tol:
                    row_pairs.append((k, k + 1))
                    k += 2
                else:
                    row_unpaired.append(k)
                    k += 1
        pairs.append(row_pairs)
        unpaired.append(row_unpaired)
        single.append([k for k in row_unpaired if row[k] < 0])
    return DegeneracyReport(spectrum.omega, pairs, unpaired, single)


def qdw_localization(sm: Supermode, crossings: Sequence[float], window: float = 3) -> float:
    """Share of the supermode weight within ``window`` modes of any dispersion zero crossing."""
    if len(crossings) == 0:
        return 0.0
    distance = np.min(np.abs(sm.mu[:, None] - np.asarray(crossings, dtype=float)[None, :]), axis=1)
    weights = sm.weights
    return float(weights[distance <= window].sum() / weights.sum())


def is_quantum_dispersive_wave(sm: Supermode, crossings: Sequence[float], window: float = 3) -> bool:
    return qdw_localization(sm, crossings, window) > QDW_THRESHOLD


def relabel_by_overlap(decompositions: Sequence[FrequencyDecomposition]) -> List[np.ndarray]:
    """Column permutations that follow supermodes from one frequency to the next.

    ``perms[i][r]`` is the column at frequency ``i`` continuing label ``r``. Stored data is not touched.
    """
    if not decompositions:
        return []
    perms = [np.arange(decompositions[0].U.shape[1])]
    for previous, current in zip(decompositions, decompositions[1:]):
        reference = previous.U[:, perms[-1]]
        overlap = np.abs(reference.conj().T @ current.U) ** 2
        _, columns = optimize.linear_sum_assignment(-overlap)
        perms.append(columns)
    return perms
