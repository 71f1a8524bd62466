import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from pdcspy import dispersion
from pdcspy.defaults import DEFAULT_CONF, conf_for_name
from pdcspy.dispersion import NormalizedParams, PhysicalParams, normalize, zero_crossings
from pdcspy.envelope import NoiseEnvelope, photon_envelope
from pdcspy.linearization import PUMP_MODELS, ModeInteractionMatrix, interaction_matrix, pump_model_for
from pdcspy.meanfield import (
    FieldState,
    Regime,
    RegimeLabel,
    find_steady_state,
    init_antisymmetric_soliton_pair,
    noise_seed,
    phase_diagram_sweep,
)
from pdcspy.squeezing import (
    DegeneracyReport,
    LossMatrix,
    SqueezingSpectrum,
    Supermode,
    detect_degenerate_pairs,
    extract_supermodes,
    squeezing_spectrum,
)

logger = logging.getLogger(__name__)


@dataclass
class AnalysisResult:
    params: NormalizedParams
    matrix: ModeInteractionMatrix
    spectrum: SqueezingSpectrum
    supermodes: Dict[float, List[Supermode]] = field(default_factory=dict)
    degeneracy: Optional[DegeneracyReport] = None


class SqueezingAnalysis:
    """Fluent builder for the quantum analysis of one steady state.

    .. code-block:: python

        result = resonator.analysis(state, params).omega(0, 15, 301).at(10.0).supermodes(2).run()
    """

    def __init__(self, resonator: "Resonator", state: FieldState, params: NormalizedParams):
        self._resonator = resonator
        self._state = state
        self._params = params
        conf = resonator.conf
        self._omega = np.linspace(conf["omega_min"], conf["omega_max"], conf["omega_points"])
        self._at: List[float] = []
        self._k = 2
        self._pump_model = conf["pump_model"]
        self._provider = None
        self._degeneracy_tol: Optional[float] = None

    def omega(self, start: float, stop: float, points: int) -> "SqueezingAnalysis":
        self._omega = np.linspace(start, stop, points)
        return self

    def at(self, *omegas: float) -> "SqueezingAnalysis":
        """Frequencies where supermodes are extracted."""
        self._at = [float(w) for w in omegas]
        return self

    def supermodes(self, k: int) -> "SqueezingAnalysis":
        self._k = k
        return self

    def loss(self, overcoupling_ratio: float) -> "SqueezingAnalysis":
        self._params = self._params.with_overcoupling(overcoupling_ratio)
        return self

    def pump_model(self, name: str) -> "SqueezingAnalysis":
        if name not in PUMP_MODELS:
            raise ValueError(f"unknown pump model {name!r}")
        self._pump_model = name
        return self

    def degeneracy(self, tol: float = 1e-6) -> "SqueezingAnalysis":
        """Also pair degenerate levels at every frequency."""
        self._degeneracy_tol = tol
        return self

    def with_provider(self, provider) -> "SqueezingAnalysis":
        self._provider = provider
        return self

    def run(self, progress: bool = False) -> AnalysisResult:
        M = self._resonator.mode_interaction(self._state, self._params, self._pump_model)
        loss = LossMatrix.from_params(self._params)
        spectrum = squeezing_spectrum(M, loss, self._omega, provider=self._provider, progress=progress)
        result = AnalysisResult(self._params, M, spectrum)
        for omega in self._at:
            result.supermodes[omega] = extract_supermodes(M, loss, omega, self._k)
        if self._degeneracy_tol is not None:
            result.degeneracy = detect_degenerate_pairs(spectrum, self._degeneracy_tol)
        return result


class Resonator:
    """One bichromatically pumped Kerr ring in normalized units.

    :param physical: A :class:`~pdcspy.dispersion.PhysicalParams`; built from ``preset`` when omitted
    :param preset: Named parameter set, ``"quartic"`` or ``"quadratic"``
    :param conf: Overrides of the numerical defaults in :data:`pdcspy.defaults.DEFAULT_CONF`
    """

    def __init__(self, physical: PhysicalParams = None, *, preset: str = "quartic", conf: dict = None):
        self.conf = DEFAULT_CONF
        """The numerical settings."""

        if conf is not None:
            unknown = set(conf) - set(DEFAULT_CONF)
            if unknown:
                raise ValueError(f"unknown conf keys {sorted(unknown)}")
            self.conf = dict(DEFAULT_CONF, **conf)

        if physical is None:
            preset_conf = conf_for_name(preset)
            if preset_conf is None:
                raise ValueError(f"unknown preset {preset!r}")
            self.physical = PhysicalParams(**preset_conf)
        elif isinstance(physical, (PhysicalParams,)):
            self.physical = physical
        else:
            raise TypeError("physical is not a PhysicalParams")

    def params(self, delta_eff: float, nu: complex) -> NormalizedParams:
        return normalize(self.physical, delta_eff, nu, self.conf["overcoupling_ratio"])

    @property
    def d_int(self) -> np.ndarray:
        return self.params(0.0, 0.0).d_int

    def crossings(self, skip_origin: bool = True) -> List[float]:
        return zero_crossings(self.d_int, skip_origin=skip_origin)

    def describe(self) -> dict:
        """Normalized constants and physical scales of the ring."""
        p = self.physical
        return {
            "loss_per_round_trip": p.loss_per_round_trip,
            "photon_lifetime_s": dispersion.time_scale(p),
            "field_scale": dispersion.field_scale(p),
            "coefficients": {f"d{order}": value for order, value in dispersion.normalized_coefficients(p).items()},
            "zero_crossings": self.crossings(),
        }

    def seed(self, params: NormalizedParams, kind: str = "soliton") -> FieldState:
        if kind == "soliton":
            return init_antisymmetric_soliton_pair(params)
        if kind == "noise":
            return noise_seed(params, self.conf["noise_amplitude"], self.conf["seed"])
        raise ValueError(f"unknown seed kind {kind!r}")

    def _solver_options(self) -> dict:
        conf = self.conf
        return {
            "tol": conf["steady_tol"],
            "max_time": conf["max_time"],
            "dt": conf["dt"],
            "transient_time": conf["transient_time"],
            "blowup_norm": conf["blowup_norm"],
        }

    def steady_state(
        self, delta_eff: float, nu: complex, seed: str = "soliton"
    ) -> Tuple[NormalizedParams, FieldState, RegimeLabel]:
        params = self.params(delta_eff, nu)
        state, label = find_steady_state(self.seed(params, seed), params, **self._solver_options())
        if label.regime is Regime.BELOW_THRESHOLD:
            state = FieldState.zeros(params.mode_count, state.time)
        return params, state, label

    def below_threshold_state(self, delta_eff: float, nu: complex) -> Tuple[NormalizedParams, FieldState, RegimeLabel]:
        """The vacuum, the stable fixed point for ``|nu| < 1``, without integrating."""
        params = self.params(delta_eff, nu)
        if abs(params.nu) >= 1:
            raise ValueError(f"|nu| = {abs(params.nu)} is not below threshold")
        return params, FieldState.zeros(params.mode_count), RegimeLabel(Regime.BELOW_THRESHOLD, residual=0.0)

    def sweep(self, delta_grid: Sequence[float], nu_grid: Sequence[float], *, provider=None, on_result=None, progress=False):
        options = dict(self._solver_options(), noise_amplitude=self.conf["noise_amplitude"], seed=self.conf["seed"])
        return phase_diagram_sweep(
            delta_grid, nu_grid, self.params(0.0, 0.0), provider=provider, on_result=on_result, progress=progress, **options
        )

    def mode_interaction(
        self, state: FieldState, params: NormalizedParams, pump_model: Optional[str] = None
    ) -> ModeInteractionMatrix:
        """``M`` for ``state`` with the configured pump model; the vacuum always gets the drive-only model."""
        model = pump_model_for(state, pump_model or self.conf["pump_model"])
        return interaction_matrix(state, params, model)

    def analysis(self, state: FieldState, params: NormalizedParams) -> SqueezingAnalysis:
        return SqueezingAnalysis(self, state, params)

    def envelope(
        self, state: FieldState, params: NormalizedParams, *, check_convergence: bool = True, provider=None
    ) -> NoiseEnvelope:
        M = self.mode_interaction(state, params)
        return photon_envelope(
            M,
            LossMatrix.from_params(params),
            self.conf["theta_points"],
            self.conf["envelope_omega_max"],
            self.conf["envelope_omega_points"],
            check_convergence=check_convergence,
            provider=provider,
        )
