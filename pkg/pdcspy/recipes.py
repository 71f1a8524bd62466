"""Subcommand handlers and figure recipes.

Every handler takes ``(bundle, config, provider)`` and writes its tables into the
:class:`~pdcspy.results.ResultBundle`. Figure recipes run at the fixed parameter points of
:data:`pdcspy.defaults.FIGURE_POINTS` whatever the ``[point]`` section says.
"""

import functools
import logging
import warnings
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from pdcspy._utils import to_db
from pdcspy.config import RunConfig
from pdcspy.defaults import FIGURE_POINTS
from pdcspy.dispersion import NormalizedParams
from pdcspy.envelope import background_oscillation_metric, peak_positions
from pdcspy.exceptions import ConfigError, ConvergenceError, DegeneracyWarning, ValidationError
from pdcspy.meanfield import FieldState, Regime, RegimeLabel, SweepPoint, relative_residual
from pdcspy.oracle import PairSystem, detuning_scan, opa_output_spectrum, phase_matched_detuning
from pdcspy.resonator import AnalysisResult, Resonator
from pdcspy.results import ResultBundle, load_state_csv, state_rows
from pdcspy.squeezing import (
    LossMatrix,
    Supermode,
    detect_degenerate_pairs,
    extract_supermodes,
    qdw_localization,
)

logger = logging.getLogger(__name__)

SCAN_MODES = (0, 20, 40)
SCAN_HALFWIDTH = 10.0
SCAN_POINTS = 41

SUPERMODE_HEADER = ["mu", "reX", "imX", "reP", "imP"]
POINT_HEADER = ["delta_eff", "nu", "label", "residual", "limit_cycle_amplitude", "period"]


def build_resonator(config: RunConfig, d4_zero: Optional[bool] = None) -> Resonator:
    return Resonator(config.physical_params(d4_zero), conf=config.resonator_conf())


def _point_row(delta_eff: float, nu: complex, label: RegimeLabel) -> list:
    return [delta_eff, abs(nu), str(label), label.residual, label.limit_cycle_amplitude, label.period]


def solve_point(
    resonator: Resonator, config: RunConfig, delta_eff: float, nu: complex, *, integrate_below: bool = False
) -> Tuple[NormalizedParams, FieldState, RegimeLabel]:
    """Steady state at one point: the saved state when configured, the vacuum below threshold, else integration."""
    if config.squeeze.state:
        params = resonator.params(delta_eff, nu)
        state = load_state_csv(config.squeeze.state)
        if state.mode_count != params.mode_count:
            raise ValidationError(f"{config.squeeze.state} holds {state.mode_count} modes, the ring has {params.mode_count}")
        logger.info("using the steady state stored in %s", config.squeeze.state)
        return params, state, RegimeLabel(Regime.UNCLASSIFIED, residual=relative_residual(state, params))
    if abs(nu) < 1 and not integrate_below:
        return resonator.below_threshold_state(delta_eff, nu)
    return resonator.steady_state(delta_eff, nu, seed=config.seeds.kind)


def _check_fixed_point(bundle: ResultBundle, label: RegimeLabel, tol: float) -> None:
    if label.regime in (Regime.BELOW_THRESHOLD, Regime.STABLE_SOLITON, Regime.TURING_PATTERN):
        return
    if label.regime is Regime.UNCLASSIFIED and label.residual < tol:
        return
    bundle.record_failure("steady", f"state labeled {label} with residual {label.residual:.3g} is not a fixed point")


def _emit_state(bundle: ResultBundle, name: str, state: FieldState) -> None:
    bundle.emit_csv(name, ["mu", "re", "im"], state_rows(state))


def _emit_spectrum(bundle: ResultBundle, name: str, result: AnalysisResult, levels: int) -> None:
    spectrum = result.spectrum
    count = min(levels, spectrum.levels_db.shape[1])
    header = ["omega"] + [f"level_{i + 1}" for i in range(count)]
    rows = [[w] + row[:count].tolist() for w, row in zip(spectrum.omega, spectrum.levels_db)]
    bundle.emit_csv(name, header, rows)
    for index, error in spectrum.failures.items():
        bundle.record_failure(f"omega={spectrum.omega[index]!r}", error)


def _supermode_rows(sm: Supermode) -> list:
    return [[int(m), x.real, x.imag, p.real, p.imag] for m, x, p in zip(sm.mu, sm.x, sm.p)]


def _emit_supermodes(
    bundle: ResultBundle, by_omega: Dict[float, List[Supermode]], crossings: Sequence[float], window: float
) -> None:
    summary = []
    for omega, supermodes in by_omega.items():
        for sm in supermodes:
            bundle.emit_csv(f"supermode_w{omega:g}_r{sm.rank + 1}.csv", SUPERMODE_HEADER, _supermode_rows(sm))
            summary.append(
                [
                    omega,
                    sm.rank + 1,
                    sm.level_db,
                    sm.participation_ratio,
                    sm.dominant_mu,
                    sm.pair_weight(sm.dominant_mu),
                    sm.two_mode_balance(sm.dominant_mu),
                    qdw_localization(sm, crossings, window),
                ]
            )
    header = ["omega", "rank", "level_db", "participation_ratio", "dominant_mu", "pair_weight", "balance", "qdw_localization"]
    bundle.emit_csv("supermodes.csv", header, summary)


def _analyze(resonator: Resonator, config: RunConfig, params, state, provider, at: Sequence[float] = ()) -> AnalysisResult:
    analysis = (
        resonator.analysis(state, params)
        .omega(config.omega.min, config.omega.max, config.omega.points)
        .at(*at)
        .supermodes(config.squeeze.supermodes)
        .with_provider(provider)
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        return analysis.run(progress=True)


def _quartic_crossings(config: RunConfig) -> List[float]:
    """Zero crossings of the profile with fourth-order dispersion, the reference positions for localization."""
    return build_resonator(config, d4_zero=False).crossings()


def cmd_steady(bundle: ResultBundle, config: RunConfig, provider) -> None:
    resonator = build_resonator(config)
    point = config.point
    params, state, label = solve_point(resonator, config, point.delta_eff, point.drive, integrate_below=True)
    bundle.extra["resonator"] = resonator.describe()
    bundle.emit_csv("point.csv", POINT_HEADER, [_point_row(point.delta_eff, params.nu, label)])
    _emit_state(bundle, "state.csv", state)


def cmd_sweep(bundle: ResultBundle, config: RunConfig, provider) -> None:
    resonator = build_resonator(config)
    header = ["index", "delta_eff", "nu", "label", "soliton_label", "noise_label", "residual", "error"]
    counter = iter(range(len(config.sweep.delta_eff) * len(config.sweep.nu)))

    with bundle.stream_csv("sweep.csv", header) as stream:

        def on_result(point: SweepPoint):
            index = next(counter)
            if point.failed:
                bundle.record_failure(f"sweep({point.delta_eff}, {point.nu})", point.error)
                stream.write([index, point.delta_eff, point.nu, "", "", "", float("nan"), point.error])
                return
            stream.write(
                [
                    index,
                    point.delta_eff,
                    point.nu,
                    str(point.label),
                    str(point.soliton_label),
                    str(point.noise_label),
                    point.label.residual,
                    "",
                ]
            )
            _emit_state(bundle, f"state_{index:04d}.csv", point.state)

        resonator.sweep(config.sweep.delta_eff, config.sweep.nu, provider=provider, on_result=on_result, progress=True)


def cmd_squeeze(bundle: ResultBundle, config: RunConfig, provider) -> None:
    resonator = build_resonator(config)
    point = config.point
    params, state, label = solve_point(resonator, config, point.delta_eff, point.drive)
    _check_fixed_point(bundle, label, config.integrator.tol)
    result = _analyze(resonator, config, params, state, provider)
    _emit_spectrum(bundle, "spectrum.csv", result, config.squeeze.levels)
    best_omega, best_level = result.spectrum.best()
    bundle.emit_json(
        "decomposition.json",
        {
            "point": {"delta_eff": point.delta_eff, "nu": abs(params.nu), "label": str(label)},
            "best": {"omega": best_omega, "level_db": best_level},
            "hamiltonian_defect": result.matrix.hamiltonian_defect(),
            "failures": {str(result.spectrum.omega[i]): e for i, e in result.spectrum.failures.items()},
        },
    )


def cmd_supermodes(bundle: ResultBundle, config: RunConfig, provider) -> None:
    resonator = build_resonator(config)
    point = config.point
    params, state, label = solve_point(resonator, config, point.delta_eff, point.drive)
    _check_fixed_point(bundle, label, config.integrator.tol)
    M = resonator.mode_interaction(state, params)
    loss = LossMatrix.from_params(params)
    by_omega = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        for omega in config.squeeze.omega:
            by_omega[omega] = extract_supermodes(M, loss, omega, config.squeeze.supermodes)
    _emit_supermodes(bundle, by_omega, _quartic_crossings(config), config.squeeze.qdw_window)


def _envelope_tables(
    bundle: ResultBundle, config: RunConfig, resonator: Resonator, state: FieldState, params, provider, name: str
) -> Dict[str, float]:
    env = resonator.envelope(state, params, check_convergence=config.envelope.check_convergence, provider=provider)
    classical = state.intensity(env.theta.shape[0])
    peak = classical.max()
    normalized = classical / peak if peak > 0 else classical
    bundle.emit_csv(name, ["theta", "noise", "classical_intensity_normalized"], zip(env.theta, env.values, normalized))

    pulses = peak_positions(classical, env.theta, 2) if peak > 0 else np.array([])
    noise_peaks = peak_positions(env.values, env.theta, 2)
    if env.converged is False:
        logger.warning("%s: envelope not converged (%.3g relative change)", name, env.relative_change)
    return {
        "background_metric": background_oscillation_metric(env, pulses, config.envelope.exclusion_halfwidth),
        "mean": env.mean(),
        "converged": env.converged,
        "relative_change": env.relative_change,
        "pulse_positions": pulses.tolist(),
        "noise_peak_positions": noise_peaks.tolist(),
    }


def cmd_envelope(bundle: ResultBundle, config: RunConfig, provider) -> None:
    resonator = build_resonator(config)
    point = config.point
    params, state, label = solve_point(resonator, config, point.delta_eff, point.drive)
    _check_fixed_point(bundle, label, config.integrator.tol)
    metrics = _envelope_tables(bundle, config, resonator, state, params, provider, "envelope.csv")
    bundle.emit_json("envelope.json", dict(metrics, label=str(label)))


def cmd_oracle(bundle: ResultBundle, config: RunConfig, provider) -> None:
    resonator = build_resonator(config)
    params = resonator.params(config.point.delta_eff, config.point.drive)
    pair = PairSystem.from_params(params, config.oracle.mu)
    rows = []
    for omega in np.linspace(config.omega.min, config.omega.max, config.omega.points):
        low, high = opa_output_spectrum(pair, omega)
        rows.append([omega, float(to_db(low)), float(to_db(high))])
    bundle.emit_csv("oracle.csv", ["omega", "min_dB", "max_dB"], rows)


def _figure_point(name: str) -> Tuple[float, float]:
    return FIGURE_POINTS[name]


# regime each figure point has to reach before its tables are worth writing
FIGURE_REGIMES = {
    "below_threshold": Regime.BELOW_THRESHOLD,
    "stable_soliton": Regime.STABLE_SOLITON,
}


def _require_regime(name: str, label: RegimeLabel, tol: float) -> None:
    """:raises ConvergenceError: when the figure point ``name`` did not settle into its expected regime"""
    expected = FIGURE_REGIMES[name]
    if label.regime is expected and not label.residual > tol:
        return
    raise ConvergenceError(
        f"{name} point came out {label} with relative residual {label.residual:.3g}, expected {expected.value}"
    )


def _figure_spectrum(bundle, config, provider, name: str, d4_zero: bool, at: Sequence[float]):
    resonator = build_resonator(config, d4_zero)
    delta_eff, nu = _figure_point(name)
    params, state, label = solve_point(resonator, config, delta_eff, nu)
    _require_regime(name, label, config.integrator.tol)
    bundle.emit_csv("point.csv", POINT_HEADER, [_point_row(delta_eff, nu, label)])
    _emit_state(bundle, "state.csv", state)
    result = _analyze(resonator, config, params, state, provider, at)
    _emit_spectrum(bundle, "spectrum.csv", result, config.squeeze.levels)
    _emit_supermodes(bundle, result.supermodes, _quartic_crossings(config), config.squeeze.qdw_window)
    return resonator, params, state, result


def figure_2b(bundle, config, provider):
    """Squeezing spectrum and supermodes of the stable soliton at (12, 1.05)."""
    _figure_spectrum(bundle, config, provider, "stable_soliton", config.dispersion.d4_zero, config.squeeze.omega)


def figure_2c(bundle, config, provider):
    """Squeezing spectrum below threshold at (0, 0.95); the top supermode at omega = 0 is single-mode."""
    _figure_spectrum(bundle, config, provider, "below_threshold", config.dispersion.d4_zero, [0.0])


def _qdw_level(omega: float, M, loss: LossMatrix, k: int, crossings: Sequence[float], window: float) -> list:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        supermodes = extract_supermodes(M, loss, omega, k)
    return [[omega, sm.rank + 1, sm.level_db, qdw_localization(sm, crossings, window)] for sm in supermodes]


def _qdw_scan(bundle, config, provider, d4_zero: bool) -> float:
    _, params, state, result = _figure_spectrum(bundle, config, provider, "stable_soliton", d4_zero, config.squeeze.omega)
    crossings = _quartic_crossings(config)
    loss = LossMatrix.from_params(params)
    task = functools.partial(
        _qdw_level,
        M=result.matrix.M,
        loss=loss,
        k=config.squeeze.supermodes,
        crossings=crossings,
        window=config.squeeze.qdw_window,
    )
    rows = []
    for omega, outcome in zip(result.spectrum.omega, provider.imap(task, result.spectrum.omega.tolist())):
        if isinstance(outcome, BaseException):
            bundle.record_failure(f"qdw omega={omega!r}", f"{type(outcome).__name__}: {outcome}")
            continue
        rows.extend(outcome)
    bundle.emit_csv("qdw.csv", ["omega", "rank", "level_db", "qdw_localization"], rows)
    best = max((row[3] for row in rows), default=0.0)
    bundle.extra["max_qdw_localization"] = best
    logger.info("largest localization at the zero crossings %s: %.3f", crossings, best)
    return best


def figure_3(bundle, config, provider):
    """Quantum dispersive waves of the stable soliton (12, 1.05) with fourth-order dispersion."""
    _qdw_scan(bundle, config, provider, d4_zero=False)


def figure_s4(bundle, config, provider):
    """The stable soliton (12, 1.05) with purely quadratic dispersion; no dispersive waves."""
    _qdw_scan(bundle, config, provider, d4_zero=True)


def figure_4(bundle, config, provider):
    """Photon-number envelopes of the stable soliton (12, 1.05), quartic against quadratic dispersion."""
    delta_eff, nu = _figure_point("stable_soliton")
    metrics = {}
    for name, d4_zero in (("quartic", False), ("quadratic", True)):
        resonator = build_resonator(config, d4_zero)
        params, state, label = solve_point(resonator, config, delta_eff, nu)
        _require_regime("stable_soliton", label, config.integrator.tol)
        _emit_state(bundle, f"state_{name}.csv", state)
        metrics[name] = dict(
            _envelope_tables(bundle, config, resonator, state, params, provider, f"envelope_{name}.csv"), label=str(label)
        )
    quadratic = metrics["quadratic"]["background_metric"]
    metrics["background_ratio"] = metrics["quartic"]["background_metric"] / quadratic if quadratic > 0 else float("inf")
    bundle.emit_json("metrics.json", metrics)


def figure_s1(bundle, config, provider):
    """Degenerate pairing of the below-threshold levels at (0, 0.95)."""
    resonator = build_resonator(config)
    delta_eff, nu = _figure_point("below_threshold")
    params, state, _ = resonator.below_threshold_state(delta_eff, nu)
    result = _analyze(resonator, config, params, state, provider)
    _emit_spectrum(bundle, "spectrum.csv", result, config.squeeze.levels)
    report = detect_degenerate_pairs(result.spectrum, config.squeeze.degeneracy_tol)
    rows = []
    for omega, pairs, unpaired, single, levels in zip(
        report.omega, report.pairs, report.unpaired, report.single_mode_branches, result.spectrum.levels_db
    ):
        gap = max((abs(levels[j] - levels[i]) for i, j in pairs), default=0.0)
        rows.append([omega, len(pairs), len(unpaired), ";".join(str(k + 1) for k in single), gap])
    bundle.emit_csv("degeneracy.csv", ["omega", "pairs", "unpaired", "single_mode_branches", "max_pair_gap_db"], rows)


def figure_s2(bundle, config, provider):
    """Squeezing of the mode pairs +-0, +-20, +-40 at omega = 0 against the detuning, at nu = 0.95."""
    resonator = build_resonator(config)
    nu = _figure_point("below_threshold")[1]
    params = resonator.params(0.0, nu)
    rows = []
    summary = {}
    for mu in SCAN_MODES:
        target = phase_matched_detuning(mu, params.d_int)
        grid = np.linspace(target - SCAN_HALFWIDTH, target + SCAN_HALFWIDTH, SCAN_POINTS)
        scan = detuning_scan(mu, params, grid, omega=0.0, provider=provider)
        rows.extend([mu, d, level] for d, level in zip(scan.delta_grid, scan.levels_db))
        sm = scan.best_supermode
        summary[str(mu)] = {
            "phase_matched_delta": target,
            "best_delta": scan.best_delta,
            "grid_step": float(grid[1] - grid[0]),
            "pair_weight": sm.pair_weight(mu) if sm else None,
            "two_mode_balance": sm.two_mode_balance(mu) if sm else None,
            "participation_ratio": sm.participation_ratio if sm else None,
        }
    bundle.emit_csv("detuning_scan.csv", ["mu", "delta_eff", "level_db"], rows)
    bundle.emit_json("detuning_scan.json", summary)


def figure_s3(bundle, config, provider):
    """Regime labels of the broad soliton (1.2, 1.05) and the oscillating soliton (12, 1.5)."""
    resonator = build_resonator(config)
    rows = []
    for name in ("broad_soliton", "oscillatory_soliton"):
        delta_eff, nu = _figure_point(name)
        params, state, label = resonator.steady_state(delta_eff, nu, seed=config.seeds.kind)
        rows.append(_point_row(delta_eff, nu, label))
        _emit_state(bundle, f"state_{name}.csv", state)
    bundle.emit_csv("labels.csv", POINT_HEADER, rows)


COMMANDS: Dict[str, Callable] = {
    "steady": cmd_steady,
    "sweep": cmd_sweep,
    "squeeze": cmd_squeeze,
    "supermodes": cmd_supermodes,
    "envelope": cmd_envelope,
    "oracle": cmd_oracle,
}

FIGURES: Dict[str, Callable] = {
    "2b": figure_2b,
    "2c": figure_2c,
    "3": figure_3,
    "4": figure_4,
    "S1": figure_s1,
    "S2": figure_s2,
    "S3": figure_s3,
    "S4": figure_s4,
}


def check(command: str, config: RunConfig, figure: Optional[str] = None) -> None:
    """Reject a configuration that cannot run ``command`` before anything is written."""
    if command == "reproduce-figure":
        if figure not in FIGURES:
            raise ConfigError(f"figure: unknown figure {figure!r}, expected one of {sorted(FIGURES)}")
    elif command not in COMMANDS:
        raise ConfigError(f"command: unknown subcommand {command!r}")
    if command == "sweep" and config.sweep is None:
        raise ConfigError("sweep: grid is empty")
    if command == "oracle" and config.point.nu >= 1:
        raise ConfigError(f"point.nu: the closed-form spectrum needs nu < 1, got {config.point.nu}")
    if config.squeeze.state and command not in ("squeeze", "supermodes", "envelope"):
        raise ConfigError(f"squeeze.state: a stored state cannot be used with {command}")
    config.physical_params()
    if command == "reproduce-figure" and figure in ("4", "S4"):
        config.physical_params(d4_zero=True)
