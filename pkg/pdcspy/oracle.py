"""Closed-form below-threshold spectra.

With no comb, mode pairs ``(mu, -mu)`` decouple. For even dispersion each pair splits into two identical
detuned degenerate amplifiers with quadrature matrix ``[[nu, delta], [-delta, -nu]]``, solved here directly.
"""

import functools
import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from pdcspy.dispersion import NormalizedParams
from pdcspy.exceptions import DegeneracyWarning, ValidationError
from pdcspy.linearization import interaction_matrix
from pdcspy.meanfield import FieldState
from pdcspy.providers import SerialProvider
from pdcspy.squeezing import LossMatrix, Supermode, extract_supermodes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairSystem:
    mu: int
    detuning: float
    nu_mag: float
    eta: float

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta}")

    @classmethod
    def from_params(cls, p: NormalizedParams, mu: int) -> "PairSystem":
        detuning = p.delta_eff + p.d_at(mu)
        if mu != 0 and not math.isclose(p.d_at(mu), p.d_at(-mu), rel_tol=1e-12, abs_tol=1e-12):
            raise ValidationError(f"modes +-{mu} are not degenerate; the pair solution needs even dispersion")
        return cls(int(mu), float(detuning), abs(p.nu), p.eta)

    @property
    def single_mode(self) -> bool:
        return self.mu == 0


def _pair_transfer(ps: PairSystem, omega: float) -> np.ndarray:
    w = 1 + 1j * omega
    nu, delta = ps.nu_mag, ps.detuning
    det = w**2 - nu**2 + delta**2
    return np.array(
        [
            [2 * (w + nu) / det - 1, 2 * delta / det],
            [-2 * delta / det, 2 * (w - nu) / det - 1],
        ]
    )


def opa_output_spectrum(ps: PairSystem, omega: float) -> Tuple[float, float]:
    """Smallest and largest output quadrature variance of the pair after loss mixing."""
    if not 0 <= ps.nu_mag < 1:
        raise ValidationError(f"the pair solution needs 0 <= |nu| < 1, got {ps.nu_mag}")
    s = _pair_transfer(ps, omega)
    frobenius = float(np.sum(np.abs(s) ** 2))
    det2 = abs(np.linalg.det(s)) ** 2
    largest = (frobenius + math.sqrt(max(frobenius**2 - 4 * det2, 0.0))) / 2
    smallest = det2 / largest
    return (1 - ps.eta) + ps.eta * smallest, (1 - ps.eta) + ps.eta * largest


def oracle_levels(p: NormalizedParams, omega: float) -> np.ndarray:
    """All ``2N`` below-threshold variances on the grid of ``p``, ascending."""
    n = p.mode_count
    variances: List[float] = []
    for mu in range(0, n // 2):
        low, high = opa_output_spectrum(PairSystem.from_params(p, mu), omega)
        copies = 1 if mu == 0 else 2
        variances += [low, high] * copies
    # mode -N/2 has no partner; the drive does not act on it
    variances += [1.0, 1.0]
    return np.sort(np.asarray(variances))


def phase_matched_detuning(mu: int, d_int) -> float:
    """Detuning that cancels the pair detuning of mode ``mu``: ``-d_int(mu)``."""
    d_int = np.asarray(d_int, dtype=float)
    index = int(mu) + d_int.shape[0] // 2
    if not 0 <= index < d_int.shape[0]:
        raise ValidationError(f"mode {mu} is off the grid")
    return float(-d_int[index])


@dataclass
class DetuningScan:
    mu: int
    delta_grid: np.ndarray
    levels_db: np.ndarray
    best_delta: float
    best_supermode: Optional[Supermode]


def _mode_level(delta_eff: float, mu: int, p: NormalizedParams, omega: float, k: int) -> Tuple[float, Supermode]:
    point = p.at(delta_eff, p.nu)
    M = interaction_matrix(FieldState.zeros(p.mode_count), point)
    supermodes = extract_supermodes(M, LossMatrix.from_params(point), omega, k)
    for sm in supermodes:
        if sm.pair_weight(mu) > 0.5:
            return sm.level_db, sm
    return math.inf, supermodes[0]


def detuning_scan(
    mu: int,
    p: NormalizedParams,
    delta_grid: Sequence[float],
    loss: Optional[LossMatrix] = None,
    *,
    omega: float = 0.0,
    k: Optional[int] = None,
    provider=None,
) -> DetuningScan:
    """Run the numerical pipeline on the vacuum state across ``delta_grid`` and keep the ``delta_eff``
    that squeezes the pair ``+-mu`` most.

    The squeezing of a pair is the lowest level among supermodes carrying most of their weight on ``+-mu``.
    """
    grid = np.asarray(delta_grid, dtype=float)
    if grid.size == 0:
        raise ValidationError("empty detuning grid")
    if loss is not None:
        p = p.with_overcoupling(loss.gamma_c / loss.gamma_total)
    k = k or 2 * p.mode_count
    provider = provider or SerialProvider()

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        outcomes = list(provider.imap(functools.partial(_mode_level, mu=mu, p=p, omega=omega, k=k), grid.tolist()))

    levels = np.full(grid.shape, np.inf)
    supermodes: List[Optional[Supermode]] = [None] * grid.size
    for i, outcome in enumerate(outcomes):
        if isinstance(outcome, BaseException):
            logger.warning("detuning scan failed at delta_eff=%s: %s", grid[i], outcome)
            continue
        levels[i], supermodes[i] = outcome
    best = int(np.argmin(levels))
    logger.info("mode %d squeezes best at delta_eff=%.6g (%.3f dB)", mu, grid[best], levels[best])
    return DetuningScan(int(mu), grid, levels, float(grid[best]), supermodes[best])
