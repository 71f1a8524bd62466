"""Mode grid, physical parameters and the normalized integrated dispersion.

Notes
-----
Normalized units follow the mean-field equation used throughout the package:

* time is measured in photon lifetimes ``t_R / Gamma``, with ``Gamma = pi / finesse`` the loss per round trip;
* the total decay rate is 1, split into a coupling part ``gamma_c`` and an intrinsic part ``gamma_i``;
* the dispersion coefficients are ``d_n = t_R * D_n / Gamma`` with ``D_n = 2 pi * d_n_hz``.

Definitions
-----------
d_int
    normalized integrated dispersion ``sum_n d_n mu**n / n!`` on the integer mode grid
mode grid
    ``mu = -N/2 .. N/2-1``, stored in ascending order so that array index ``i`` holds ``mu = i - N/2``
"""

import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

import numpy as np

from pdcspy._utils import check_finite, mode_indices
from pdcspy.exceptions import DegeneracyWarning, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_OVERCOUPLING = 1 / 1.01


@dataclass(frozen=True)
class PhysicalParams:
    """Physical description of the resonator, SI units.

    :param fsr_hz: Free spectral range, ``1 / t_R``.
    :param finesse: Cavity finesse.
    :param d2_hz: Second-order dispersion ``D_2 / 2 pi``.
    :param d4_hz: Fourth-order dispersion ``D_4 / 2 pi``.
    :param kerr_coeff: Nonlinear coefficient, per watt per meter.
    :param cavity_length_m: Round-trip length.
    :param pump_mode_index: Relative mode number ``mu_p`` of the two pumps at ``+-mu_p``.
    :param mode_count: Number of simulated modes, even.
    :param d3_hz: Odd third-order dispersion, zero for the symmetric profiles studied here.
    """

    fsr_hz: float
    finesse: float
    d2_hz: float
    d4_hz: float
    kerr_coeff: float
    cavity_length_m: float
    pump_mode_index: int
    mode_count: int = 200
    d3_hz: float = 0.0

    def __post_init__(self):
        for name in ("fsr_hz", "finesse", "d2_hz", "d3_hz", "d4_hz", "kerr_coeff", "cavity_length_m"):
            check_finite(name, getattr(self, name))
        if self.fsr_hz <= 0:
            raise ValidationError("fsr_hz must be positive")
        if self.finesse <= 0:
            raise ValidationError("finesse must be positive")
        if self.mode_count < 4 or self.mode_count % 2:
            raise ValidationError(f"mode_count must be even and >= 4, got {self.mode_count}")
        if not 0 < abs(self.pump_mode_index) < self.mode_count // 2 - 1:
            raise ValidationError(f"pump mode {self.pump_mode_index} is not strictly inside the mode grid")

    @property
    def round_trip_time(self) -> float:
        return 1.0 / self.fsr_hz

    @property
    def loss_per_round_trip(self) -> float:
        """``Gamma = pi / finesse``."""
        return math.pi / self.finesse

    @property
    def mode_range(self) -> np.ndarray:
        return mode_indices(self.mode_count)

    def dispersion_hz(self) -> Dict[int, float]:
        return {2: self.d2_hz, 3: self.d3_hz, 4: self.d4_hz}


@dataclass(frozen=True, eq=False)
class NormalizedParams:
    """The complete normalized system handed to the solvers.

    ``nu`` is complex; its phase fixes the orientation of the squeezed quadrature.
    """

    d_int: np.ndarray
    delta_eff: float
    nu: complex
    gamma_c: float
    gamma_i: float
    pump_mode_index: int
    coefficients: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        d_int = np.asarray(self.d_int, dtype=float)
        object.__setattr__(self, "d_int", d_int)
        object.__setattr__(self, "nu", complex(self.nu))
        n = d_int.shape[0]
        if d_int.ndim != 1 or n < 4 or n % 2:
            raise ValidationError("d_int must be a 1-D array over an even grid of at least 4 modes")
        check_finite("d_int", d_int)
        check_finite("delta_eff", self.delta_eff)
        check_finite("nu", self.nu)
        if d_int[n // 2] != 0.0:
            raise ValidationError("d_int(0) must vanish")
        if self.gamma_c <= 0 or self.gamma_i < 0:
            raise ValidationError("need gamma_c > 0 and gamma_i >= 0")
        if not math.isclose(self.gamma_c + self.gamma_i, 1.0, rel_tol=1e-12):
            raise ValidationError("gamma_c + gamma_i must equal the normalized total rate 1")
        if not 0 < abs(self.pump_mode_index) < n // 2 - 1:
            raise ValidationError(f"pump mode {self.pump_mode_index} is not strictly inside the mode grid")

    @classmethod
    def from_coefficients(
        cls,
        coefficients: Mapping[int, float],
        mode_count: int,
        delta_eff: float = 0.0,
        nu: complex = 0.0,
        *,
        overcoupling_ratio: float = DEFAULT_OVERCOUPLING,
        pump_mode_index: Optional[int] = None,
    ) -> "NormalizedParams":
        """Build directly from normalized coefficients ``{order: d_n}``.

        The pump defaults to ``mu_p = N/4``.
        """
        gamma_c, gamma_i = _split_loss(overcoupling_ratio)
        if pump_mode_index is None:
            pump_mode_index = mode_count // 4
        return cls(
            d_int=dispersion_profile(coefficients, mode_indices(mode_count)),
            delta_eff=float(delta_eff),
            nu=complex(nu),
            gamma_c=gamma_c,
            gamma_i=gamma_i,
            pump_mode_index=pump_mode_index,
            coefficients=dict(coefficients),
        )

    @property
    def mode_count(self) -> int:
        return self.d_int.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return mode_indices(self.mode_count)

    @property
    def gamma_total(self) -> float:
        return self.gamma_c + self.gamma_i

    @property
    def eta(self) -> float:
        """Escape efficiency ``gamma_c / Gamma``."""
        return self.gamma_c / self.gamma_total

    def d_at(self, mu: int) -> float:
        index = int(mu) + self.mode_count // 2
        if not 0 <= index < self.mode_count:
            raise ValidationError(f"mode {mu} is off the grid")
        return float(self.d_int[index])

    def at(self, delta_eff: float, nu: complex) -> "NormalizedParams":
        """Same resonator at another point of the ``(delta_eff, nu)`` plane."""
        return dataclasses.replace(self, delta_eff=float(delta_eff), nu=complex(nu))

    def with_overcoupling(self, overcoupling_ratio: float) -> "NormalizedParams":
        gamma_c, gamma_i = _split_loss(overcoupling_ratio)
        return dataclasses.replace(self, gamma_c=gamma_c, gamma_i=gamma_i)


def _split_loss(overcoupling_ratio: float):
    check_finite("overcoupling_ratio", overcoupling_ratio)
    if not 0 < overcoupling_ratio <= 1:
        raise ValidationError(f"overcoupling_ratio must lie in (0, 1], got {overcoupling_ratio}")
    return float(overcoupling_ratio), 1.0 - float(overcoupling_ratio)


def normalized_coefficients(p: PhysicalParams) -> Dict[int, float]:
    """``d_n = t_R * 2 pi * d_n_hz / Gamma`` for every order carried by ``p``."""
    scale = p.round_trip_time * 2 * math.pi / p.loss_per_round_trip
    return {order: scale * value for order, value in p.dispersion_hz().items()}


def physical_dispersion(coefficients: Mapping[int, float], p: PhysicalParams) -> Dict[int, float]:
    """Inverse of :func:`normalized_coefficients`, returning ``D_n / 2 pi`` in hertz."""
    scale = p.loss_per_round_trip / (p.round_trip_time * 2 * math.pi)
    return {order: scale * value for order, value in coefficients.items()}


def field_scale(p: PhysicalParams) -> float:
    """Factor turning an intracavity field in sqrt(W) into normalized amplitude."""
    return math.sqrt(p.kerr_coeff * p.cavity_length_m / p.loss_per_round_trip)


def time_scale(p: PhysicalParams) -> float:
    """Seconds per normalized time unit (the photon lifetime)."""
    return p.round_trip_time / p.loss_per_round_trip


def normalize(
    p: PhysicalParams, delta_eff: float, nu: complex, overcoupling_ratio: float = DEFAULT_OVERCOUPLING
) -> NormalizedParams:
    check_finite("delta_eff", delta_eff)
    check_finite("nu", nu)
    gamma_c, gamma_i = _split_loss(overcoupling_ratio)
    coefficients = normalized_coefficients(p)
    logger.debug("normalized dispersion %s for finesse %s", coefficients, p.finesse)
    return NormalizedParams(
        d_int=dispersion_profile(coefficients, p.mode_range),
        delta_eff=float(delta_eff),
        nu=complex(nu),
        gamma_c=gamma_c,
        gamma_i=gamma_i,
        pump_mode_index=p.pump_mode_index,
        coefficients=coefficients,
    )


def dispersion_profile(d_coeffs: Mapping[int, float], mu_range) -> np.ndarray:
    """Evaluate ``sum_n d_n mu**n / n!`` on integer modes."""
    mu = np.asarray(mu_range, dtype=float)
    profile = np.zeros_like(mu)
    for order, value in sorted(d_coeffs.items()):
        if int(order) != order or order < 2:
            raise ValidationError(f"dispersion order must be an integer >= 2, got {order}")
        check_finite(f"d{order}", value)
        profile += value * mu**order / math.factorial(int(order))
    return profile


def zero_crossings(d_int, mu_range=None, *, skip_origin: bool = False) -> List[float]:
    """Mode positions where ``d_int`` changes sign, linearly interpolated.

    Grid points where ``d_int`` is exactly zero are reported as well, so the origin always appears unless
    ``skip_origin`` is set. Results are ordered by distance from the origin, negative first, which keeps
    symmetric pairs together.
    """
    values = np.asarray(d_int, dtype=float)
    mu = mode_indices(values.shape[0]).astype(float) if mu_range is None else np.asarray(mu_range, dtype=float)

    if not np.any(values):
        warnings.warn("d_int vanishes identically, every mode is degenerate", DegeneracyWarning, stacklevel=2)
        logger.warning("zero_crossings called on an identically vanishing dispersion profile")
        return []

    found = set(mu[values == 0.0].tolist())
    left = np.nonzero(values[:-1] * values[1:] < 0)[0]
    for i in left:
        x = mu[i] - values[i] * (mu[i + 1] - mu[i]) / (values[i + 1] - values[i])
        found.add(float(x))

    if skip_origin:
        found.discard(0.0)
    return sorted(found, key=lambda x: (abs(x), x))
