"""Mean-field dynamics of the parametrically driven Kerr cavity.

The normalized envelope obeys::

    dE/dt = [-1 + i(|E|^2 - delta_eff) - i d_int(mu)] E + nu E*

The field is stored by its mode amplitudes ``a_mu`` with ``E(theta) = sum_mu a_mu exp(i mu theta)``.
"""

import enum
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft, linalg, optimize, signal
from tqdm import tqdm

from pdcspy._utils import check_finite, check_grid, mode_indices, wrap_angle
from pdcspy.dispersion import NormalizedParams
from pdcspy.exceptions import BlowUpError, ConvergenceError, NumericalError, ValidationError
from pdcspy.providers import SerialProvider

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_TOL = 1e-10
AMPLITUDE_FLOOR = 1e-6
BLOWUP_NORM = 1e6
OSCILLATION_THRESHOLD = 0.01
HARMONIC_THRESHOLD = 0.5
DUTY_THRESHOLD = 0.3
MIN_WINDOW = 20.0
# linear phase a mode may pick up in one split step
MAX_LINEAR_PHASE = 0.8 * math.pi
POLISH_TOL = 1e-3
STABILITY_TOL = 1e-6


def synthesize(spectrum: np.ndarray, points: int) -> np.ndarray:
    """Azimuthal samples ``E(2 pi j / points)`` of a mode spectrum, ``points >= N``."""
    n = spectrum.shape[-1]
    padded = np.zeros(spectrum.shape[:-1] + (points,), dtype=complex)
    padded[..., mode_indices(n) % points] = spectrum
    return points * fft.ifft(padded, axis=-1)


def analyze(values: np.ndarray, n: int) -> np.ndarray:
    """Mode amplitudes ``-N/2 .. N/2-1`` of azimuthal samples on any grid of at least ``n`` points."""
    points = values.shape[-1]
    return fft.fft(values, axis=-1)[..., mode_indices(n) % points] / points


def conjugate_partner(spectrum: np.ndarray) -> np.ndarray:
    """``conj(a_{-mu})`` on the grid; mode ``-N/2`` has no partner and gets zero."""
    partner = np.zeros_like(spectrum, dtype=complex)
    partner[..., 1:] = np.conj(spectrum[..., 1:][..., ::-1])
    return partner


@dataclass(frozen=True, eq=False)
class FieldState:
    """Intracavity envelope at slow time ``time``.

    The spectral representation is canonical; :meth:`azimuthal` gives the field samples.
    """

    spectrum: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        spectrum = np.array(self.spectrum, dtype=complex)
        if spectrum.ndim != 1:
            raise ValidationError("spectrum must be one-dimensional")
        check_finite("spectrum", spectrum)
        object.__setattr__(self, "spectrum", spectrum)

    @classmethod
    def zeros(cls, n: int, time: float = 0.0) -> "FieldState":
        return cls(np.zeros(n, dtype=complex), time)

    @classmethod
    def from_azimuthal(cls, values, time: float = 0.0) -> "FieldState":
        values = np.asarray(values, dtype=complex)
        return cls(analyze(values, values.shape[0]), time)

    @property
    def mode_count(self) -> int:
        return self.spectrum.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return mode_indices(self.mode_count)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.spectrum))

    def azimuthal(self, points: Optional[int] = None) -> np.ndarray:
        return synthesize(self.spectrum, points or self.mode_count)

    def intensity(self, points: Optional[int] = None) -> np.ndarray:
        return np.abs(self.azimuthal(points)) ** 2

    def rotated(self, theta0: float) -> "FieldState":
        """The same field shifted by ``theta0`` around the ring."""
        return FieldState(self.spectrum * np.exp(-1j * self.mu * theta0), self.time)


class Regime(enum.Enum):
    BELOW_THRESHOLD = "BT"
    STABLE_SOLITON = "SS"
    OSCILLATORY_SOLITON = "OS"
    TURING_PATTERN = "TP"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class RegimeLabel:
    regime: Regime
    residual: float = math.nan
    limit_cycle_amplitude: float = 0.0
    harmonic_strength: float = 0.0
    period: float = math.nan

    def __str__(self):
        return self.regime.value

    @property
    def is_soliton(self) -> bool:
        return self.regime in (Regime.STABLE_SOLITON, Regime.OSCILLATORY_SOLITON)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Spectra recorded at ``times``; rows of ``spectra`` follow ``times``."""

    times: np.ndarray
    spectra: np.ndarray

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def final(self) -> FieldState:
        return FieldState(self.spectra[-1], float(self.times[-1]))

    def intensity(self, points: Optional[int] = None) -> np.ndarray:
        return np.abs(synthesize(self.spectra, points or self.spectra.shape[1])) ** 2

    def peak_intensity(self) -> np.ndarray:
        return self.intensity().max(axis=1)

    def tail(self, duration: float) -> "Trajectory":
        keep = self.times >= self.times[-1] - duration - 1e-9
        return Trajectory(self.times[keep], self.spectra[keep])

    @classmethod
    def concatenate(cls, parts: Sequence["Trajectory"]) -> "Trajectory":
        times = [parts[0].times] + [p.times[1:] for p in parts[1:]]
        spectra = [parts[0].spectra] + [p.spectra[1:] for p in parts[1:]]
        return cls(np.concatenate(times), np.concatenate(spectra))


def _check_state(state: FieldState, p: NormalizedParams) -> None:
    check_grid("state", state.spectrum, p.mode_count)


def _rhs(spectrum: np.ndarray, p: NormalizedParams) -> np.ndarray:
    n = spectrum.shape[-1]
    # 2N points keep |E|^2 E alias free on the retained modes
    e = synthesize(spectrum, 2 * n)
    kerr = analyze(np.abs(e) ** 2 * e, n)
    linear = -p.gamma_total - 1j * (p.delta_eff + p.d_int)
    return linear * spectrum + 1j * kerr + p.nu * conjugate_partner(spectrum)


def pdnlse_rhs(state: FieldState, p: NormalizedParams) -> FieldState:
    """Time derivative of ``state`` as a spectrum."""
    _check_state(state, p)
    return FieldState(_rhs(state.spectrum, p), state.time)


def relative_residual(state: FieldState, p: NormalizedParams) -> float:
    """``||rhs|| / ||E||``; the bare norm of the derivative for the vacuum."""
    rhs = np.linalg.norm(_rhs(state.spectrum, p))
    norm = state.norm
    return float(rhs / norm) if norm > 0 else float(rhs)


def fixed_point_jacobian(spectrum: np.ndarray, p: NormalizedParams) -> np.ndarray:
    """Exact Jacobian of the right-hand side with respect to ``(Re a, Im a)``.

    The Kerr term differentiates into ``2 i C[mu_j - mu_k]`` on ``a`` and ``i D[mu_j + mu_k]`` on ``conj(a)``,
    where ``C`` and ``D`` are the mode spectra of ``|E|^2`` and ``E^2`` on the doubled grid.
    """
    n = spectrum.shape[0]
    e = synthesize(spectrum, 2 * n)
    intensity = analyze(np.abs(e) ** 2, 2 * n)
    square = analyze(e**2, 2 * n)
    idx = np.arange(n)

    linear = -p.gamma_total - 1j * (p.delta_eff + p.d_int)
    on_a = np.diag(linear) + 2j * intensity[np.subtract.outer(idx, idx) + n]
    on_conj = 1j * square[np.add.outer(idx, idx)]
    on_conj[idx[1:], n - idx[1:]] += p.nu

    plus, minus = on_a + on_conj, on_a - on_conj
    return np.block([[plus.real, -minus.imag], [plus.imag, minus.real]])


def growth_rate(state: FieldState, p: NormalizedParams) -> float:
    """Largest real part in the spectrum of the linearized flow around ``state``."""
    _check_state(state, p)
    return float(np.max(linalg.eigvals(fixed_point_jacobian(state.spectrum, p)).real))


def stable_time_step(p: NormalizedParams, dt: float = DEFAULT_DT, max_phase: float = MAX_LINEAR_PHASE) -> float:
    """``dt``, shortened so no mode turns by more than ``max_phase`` in one linear step.

    Near multiples of pi the split step phase-matches far detuned modes through the Kerr step and pumps them
    without any physical gain.
    """
    rate = float(np.max(np.abs(p.delta_eff + p.d_int))) + abs(p.nu)
    if rate == 0:
        return dt
    return min(dt, max_phase / rate)


def _sinhc(z: np.ndarray, t: float) -> np.ndarray:
    """``sinh(z) / (z / t)`` with the removable singularity at ``z = 0``."""
    small = np.abs(z) < 1e-6
    safe = np.where(small, 1.0, z)
    return np.where(small, t * (1 + z**2 / 6), t * np.sinh(safe) / safe)


def linear_propagator(p: NormalizedParams, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients ``(c1, c2)`` of ``a(t) = c1 a + c2 conj(a_-mu)`` for the linear part over ``t``."""
    lin = -p.gamma_total - 1j * (p.delta_eff + p.d_int)
    partner_lin = np.zeros_like(lin)
    partner_lin[1:] = lin[1:][::-1]
    has_partner = np.ones(lin.shape, dtype=bool)
    has_partner[0] = False
    drive = np.where(has_partner, p.nu, 0.0)

    # exact exponential of [[L_mu, nu], [conj(nu), conj(L_-mu)]] acting on (a_mu, conj a_-mu)
    top, bottom = lin, np.conj(partner_lin)
    tau = (top + bottom) / 2
    lam = np.sqrt(((top - bottom) / 2) ** 2 + drive * np.conj(drive))
    growth = np.exp(tau * t)
    s = _sinhc(lam * t, t)
    own = growth * (np.cosh(lam * t) + s * (top - tau))
    cross = growth * s * drive
    own = np.where(has_partner, own, np.exp(lin * t))
    return own, cross


def _apply_linear(spectrum: np.ndarray, coefficients) -> np.ndarray:
    own, cross = coefficients
    return own * spectrum + cross * conjugate_partner(spectrum)


def _apply_kerr(spectrum: np.ndarray, t: float) -> np.ndarray:
    n = spectrum.shape[0]
    e = synthesize(spectrum, 2 * n)
    return analyze(e * np.exp(1j * np.abs(e) ** 2 * t), n)


def evolve(
    state: FieldState,
    p: NormalizedParams,
    dt: float = DEFAULT_DT,
    steps: int = 1,
    *,
    blowup_norm: float = BLOWUP_NORM,
    check_every: int = 100,
) -> FieldState:
    """Advance ``steps`` Strang steps: half linear, full Kerr, half linear.

    Consecutive linear half steps are fused into one full step.

    :raises BlowUpError: when the spectral norm leaves ``blowup_norm`` or stops being finite
    """
    _check_state(state, p)
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if steps < 0:
        raise ValidationError(f"steps must be non-negative, got {steps}")
    if steps == 0:
        return state

    half = linear_propagator(p, dt / 2)
    full = linear_propagator(p, dt)
    a = _apply_linear(state.spectrum, half)
    for step in range(1, steps + 1):
        a = _apply_kerr(a, dt)
        a = _apply_linear(a, full if step < steps else half)
        if step % check_every == 0 or step == steps:
            norm = np.linalg.norm(a)
            if not np.isfinite(norm) or norm > blowup_norm:
                t = state.time + step * dt
                logger.warning("blow-up at t=%.6g, norm=%.6g, delta_eff=%s, nu=%s", t, norm, p.delta_eff, p.nu)
                raise BlowUpError(t, float(norm))
    return FieldState(a, state.time + steps * dt)


def trajectory(
    state: FieldState, p: NormalizedParams, dt: float, steps: int, every: int = 50, **kwargs
) -> Trajectory:
    """Evolve ``steps`` steps, recording a snapshot every ``every`` steps (and the initial state)."""
    if every < 1:
        raise ValidationError("every must be >= 1")
    times = [state.time]
    spectra = [state.spectrum]
    done = 0
    while done < steps:
        chunk = min(every, steps - done)
        state = evolve(state, p, dt, chunk, **kwargs)
        done += chunk
        times.append(state.time)
        spectra.append(state.spectrum)
    return Trajectory(np.asarray(times), np.asarray(spectra))


def noise_seed(p: NormalizedParams, amplitude: float = AMPLITUDE_FLOOR, seed: int = 0) -> FieldState:
    """Complex Gaussian noise of rms ``amplitude`` per mode."""
    rng = np.random.default_rng(seed)
    n = p.mode_count
    return FieldState(amplitude * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2))


def soliton_parameters(p: NormalizedParams) -> Tuple[float, float, float]:
    """Peak amplitude, inverse width and phase of the stationary single pulse.

    Loss is balanced by the drive when ``|nu| cos(2 phi - arg nu) = 1``; the remaining part of the drive
    shifts the detuning to ``delta_eff + sqrt(|nu|^2 - 1)``, the branch of larger amplitude.
    """
    magnitude = abs(p.nu)
    if magnitude >= 1:
        phase = 0.5 * math.acos(1 / magnitude) + 0.5 * np.angle(p.nu)
        shift = math.sqrt(magnitude**2 - 1)
    else:
        phase = 0.5 * np.angle(p.nu)
        shift = 0.0
    detuning = p.delta_eff + shift
    d2_eff = p.d_at(1) + p.d_at(-1)
    if detuning <= 0 or d2_eff <= 0:
        logger.warning("no bright soliton for delta_eff=%s with d2_eff=%s, using a unit-width pulse", p.delta_eff, d2_eff)
        return math.sqrt(max(2 * detuning, 0.0)), 1.0, float(phase)
    return math.sqrt(2 * detuning), math.sqrt(2 * detuning / d2_eff), float(phase)


def init_antisymmetric_soliton_pair(p: NormalizedParams) -> FieldState:
    """Two sech pulses at ``theta = 0`` and ``pi`` with opposite signs."""
    n = p.mode_count
    amplitude, k, phase = soliton_parameters(p)
    theta = 2 * np.pi * np.arange(n) / n
    pulses = 1 / np.cosh(k * wrap_angle(theta)) - 1 / np.cosh(k * wrap_angle(theta - np.pi))
    return FieldState.from_azimuthal(amplitude * np.exp(1j * phase) * pulses)


def _pattern_strength(intensity: np.ndarray) -> Tuple[int, float, float]:
    """Dominant non-DC harmonic, its share of non-DC power and the duty cycle above half maximum."""
    power = np.abs(fft.rfft(intensity)) ** 2
    ac = power[1:]
    total = ac.sum()
    if total <= 0:
        return 0, 0.0, 1.0
    q = int(np.argmax(ac)) + 1
    peak = intensity.max()
    duty = float(np.mean(intensity > peak / 2)) if peak > 0 else 1.0
    return q, float(ac[q - 1] / total), duty


def _stationary_regime(spectrum: np.ndarray, harmonic_threshold: float, duty_threshold: float) -> Tuple[Regime, float]:
    q, strength, duty = _pattern_strength(np.abs(synthesize(spectrum, spectrum.shape[0])) ** 2)
    # the antisymmetric pulse pair itself repeats with q = 2
    if q > 2 and strength > harmonic_threshold and duty > duty_threshold:
        return Regime.TURING_PATTERN, strength
    return Regime.STABLE_SOLITON, strength


def _period(trace: np.ndarray, spacing: float) -> float:
    x = trace - trace.mean()
    ac = np.correlate(x, x, mode="full")[x.size - 1 :]
    if ac[0] <= 0:
        return math.nan
    peaks, _ = signal.find_peaks(ac / ac[0], height=0.5)
    return float(peaks[0] * spacing) if peaks.size else math.nan


def classify_regime(
    window: Trajectory,
    params: Optional[NormalizedParams] = None,
    *,
    floor: float = AMPLITUDE_FLOOR,
    tol: float = DEFAULT_TOL,
    stationary_tol: float = 1e-6,
    oscillation_threshold: float = OSCILLATION_THRESHOLD,
    harmonic_threshold: float = HARMONIC_THRESHOLD,
    duty_threshold: float = DUTY_THRESHOLD,
    min_duration: float = MIN_WINDOW,
) -> RegimeLabel:
    """Label a post-transient trajectory window.

    With ``params`` the fixed-point residual is part of the diagnostics and a stationary window only counts
    as a stable state when the residual is below ``tol``.
    """
    if window.duration < min_duration - 1e-9:
        raise ValidationError(f"window covers {window.duration:.3g} time units, need at least {min_duration}")

    final = window.final
    residual = relative_residual(final, params) if params is not None else math.nan
    if final.norm < floor:
        return RegimeLabel(Regime.BELOW_THRESHOLD, residual=residual)

    intensity = window.intensity()
    last = intensity[-1]
    change = np.max(np.linalg.norm(intensity - last, axis=1)) / np.linalg.norm(last)
    peaks = window.peak_intensity()
    amplitude = float((peaks.max() - peaks.min()) / (2 * peaks.mean()))

    if change < stationary_tol:
        regime, strength = _stationary_regime(final.spectrum, harmonic_threshold, duty_threshold)
        if params is not None and not residual < tol:
            return RegimeLabel(Regime.UNCLASSIFIED, residual=residual, harmonic_strength=strength)
        return RegimeLabel(regime, residual=residual, harmonic_strength=strength)

    if amplitude > oscillation_threshold:
        spacing = float(np.mean(np.diff(window.times)))
        period = _period(peaks, spacing)
        if np.isfinite(period):
            _, strength, _ = _pattern_strength(last)
            return RegimeLabel(
                Regime.OSCILLATORY_SOLITON,
                residual=residual,
                limit_cycle_amplitude=amplitude,
                harmonic_strength=strength,
                period=period,
            )

    logger.debug("ambiguous window: profile change %.3g, peak oscillation %.3g", change, amplitude)
    return RegimeLabel(Regime.UNCLASSIFIED, residual=residual, limit_cycle_amplitude=amplitude)


def polish_steady_state(state: FieldState, p: NormalizedParams) -> FieldState:
    """Refine a nearly stationary state with a Levenberg-Marquardt solve of ``rhs = 0``.

    The translation of the pulse is a null direction of the Jacobian, which the damped steps tolerate.
    """
    n = p.mode_count

    def residual(x):
        a = x[:n] + 1j * x[n:]
        r = _rhs(a, p)
        return np.concatenate([r.real, r.imag]), fixed_point_jacobian(a, p)

    a = state.spectrum
    sol = optimize.root(
        residual, np.concatenate([a.real, a.imag]), jac=True, method="lm", options={"xtol": 1e-15, "ftol": 1e-15}
    )
    return FieldState(sol.x[:n] + 1j * sol.x[n:], state.time)


def find_steady_state(
    seed: FieldState,
    p: NormalizedParams,
    tol: float = DEFAULT_TOL,
    max_time: float = 400.0,
    *,
    dt: float = DEFAULT_DT,
    floor: float = AMPLITUDE_FLOOR,
    transient_time: float = 50.0,
    window_time: float = MIN_WINDOW,
    chunk_time: float = 1.0,
    samples_per_unit: int = 20,
    stationary_tol: float = 1e-7,
    polish_tol: float = POLISH_TOL,
    stability_tol: float = STABILITY_TOL,
    blowup_norm: float = BLOWUP_NORM,
    strict: bool = False,
) -> Tuple[FieldState, RegimeLabel]:
    """Integrate from ``seed`` until the state is classified or ``max_time`` runs out.

    Once the state changes by less than ``polish_tol`` per chunk it is polished into an exact fixed point. The
    polished point is labeled stable when its relative residual is below ``tol`` and either the trajectory has
    stopped changing (``stationary_tol``) or no eigenvalue of the linearized flow grows faster than
    ``stability_tol``. The step is shortened by :func:`stable_time_step` when needed.

    :raises ConvergenceError: with ``strict`` set, instead of returning an unclassified state at ``max_time``
    """
    _check_state(seed, p)
    if not tol > 0:
        raise ValidationError("tol must be positive")
    step = stable_time_step(p, dt)
    if step < dt:
        logger.info("dt %.3g shortened to %.3g for delta_eff=%s", dt, step, p.delta_eff)
    steps = max(1, int(round(chunk_time / step)))
    every = max(1, steps // samples_per_unit)

    state = seed
    parts: List[Trajectory] = []
    elapsed = 0.0
    while elapsed < max_time:
        part = trajectory(state, p, step, steps, every, blowup_norm=blowup_norm)
        previous, state = state, part.final
        elapsed += steps * step
        parts.append(part)

        if state.norm < floor and state.norm <= previous.norm:
            logger.info("t=%.1f: below amplitude floor, delta_eff=%s nu=%s", elapsed, p.delta_eff, p.nu)
            return state, RegimeLabel(Regime.BELOW_THRESHOLD, residual=relative_residual(state, p))

        change = np.linalg.norm(state.spectrum - previous.spectrum) / max(state.norm, floor)
        if change < polish_tol:
            polished = polish_steady_state(state, p)
            residual = relative_residual(polished, p)
            moved = np.linalg.norm(polished.spectrum - state.spectrum) / max(state.norm, floor)
            logger.debug("t=%.1f: polished residual %.3g, moved %.3g", elapsed, residual, moved)
            if residual < tol and moved < 1e-3:
                stable = change < stationary_tol or growth_rate(polished, p) < stability_tol
                if stable:
                    regime, strength = _stationary_regime(polished.spectrum, HARMONIC_THRESHOLD, DUTY_THRESHOLD)
                    return polished, RegimeLabel(regime, residual=residual, harmonic_strength=strength)

        recorded = sum(part.duration for part in parts)
        if elapsed >= transient_time + window_time and recorded >= window_time:
            window = Trajectory.concatenate(parts).tail(window_time)
            parts = [window]
            label = classify_regime(window, floor=floor, min_duration=window_time)
            if label.regime is Regime.OSCILLATORY_SOLITON:
                logger.info("t=%.1f: oscillating with period %.3g", elapsed, label.period)
                return state, RegimeLabel(
                    label.regime,
                    residual=relative_residual(state, p),
                    limit_cycle_amplitude=label.limit_cycle_amplitude,
                    harmonic_strength=label.harmonic_strength,
                    period=label.period,
                )

    residual = relative_residual(state, p)
    if strict:
        raise ConvergenceError(f"no classification after {max_time} time units (relative residual {residual:.3g})")
    logger.warning("no classification after %s time units at delta_eff=%s nu=%s", max_time, p.delta_eff, p.nu)
    return state, RegimeLabel(Regime.UNCLASSIFIED, residual=residual)


@dataclass
class SweepPoint:
    delta_eff: float
    nu: float
    label: Optional[RegimeLabel] = None
    state: Optional[FieldState] = None
    soliton_label: Optional[RegimeLabel] = None
    noise_label: Optional[RegimeLabel] = None
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def _solve_point(task, params: NormalizedParams, options: dict) -> SweepPoint:
    index, delta_eff, nu = task
    options = dict(options)
    noise_amplitude = options.pop("noise_amplitude", AMPLITUDE_FLOOR)
    seed = options.pop("seed", 0)
    point = params.at(delta_eff, nu)

    soliton_state, soliton_label = find_steady_state(init_antisymmetric_soliton_pair(point), point, **options)
    noise_state, noise_label = find_steady_state(noise_seed(point, noise_amplitude, seed + index), point, **options)
    if soliton_label.is_soliton:
        state, label = soliton_state, soliton_label
    else:
        state, label = noise_state, noise_label
    return SweepPoint(delta_eff, nu, label, state, soliton_label, noise_label)


def _check_grid_axis(name: str, values: Sequence[float]) -> List[float]:
    values = [float(v) for v in values]
    if not values:
        raise ValidationError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError(f"{name} grid must be strictly increasing")
    return values


def phase_diagram_sweep(
    delta_grid: Iterable[float],
    nu_grid: Iterable[float],
    p: NormalizedParams,
    *,
    provider=None,
    on_result: Optional[Callable[[SweepPoint], None]] = None,
    progress: bool = False,
    **options,
) -> Dict[Tuple[float, float], SweepPoint]:
    """Solve every grid point from both seeds; the soliton seed wins when it finds a soliton.

    Points are streamed to ``on_result`` in grid order. A failing point is recorded and the sweep goes on.
    """
    deltas = _check_grid_axis("delta_eff", delta_grid)
    nus = _check_grid_axis("nu", nu_grid)
    tasks = [(i, d, n) for i, (d, n) in enumerate((d, n) for d in deltas for n in nus)]
    provider = provider or SerialProvider()

    results: Dict[Tuple[float, float], SweepPoint] = {}
    outcomes = provider.imap(functools.partial(_solve_point, params=p, options=options), tasks)
    for (index, delta_eff, nu), outcome in tqdm(zip(tasks, outcomes), total=len(tasks), disable=not progress):
        if isinstance(outcome, BaseException):
            if not isinstance(outcome, (NumericalError, ValidationError)):
                raise outcome
            logger.warning("sweep point (%s, %s) failed: %s", delta_eff, nu, outcome)
            outcome = SweepPoint(delta_eff, nu, error=f"{type(outcome).__name__}: {outcome}")
        results[(delta_eff, nu)] = outcome
        if on_result is not None:
            on_result(outcome)
    return results
