"""End-to-end checks on the full 200-mode quartic ring. Tests marked slow integrate above threshold."""

import numpy as np
import pytest

from pdcspy import Regime, Resonator
from pdcspy._utils import from_db, to_db
from pdcspy.cli import run
from pdcspy.config import RunConfig, with_overrides
from pdcspy.linearization import jacobian_check
from pdcspy.oracle import detuning_scan, oracle_levels, phase_matched_detuning
from pdcspy.providers import ThreadProvider
from pdcspy.results import load_json
from pdcspy.squeezing import LossMatrix, bloch_messiah, reciprocal_defect, transfer_function
from tests.utils import check_conjugate_symplectic

ETA = 1 / 1.01


@pytest.fixture(scope="module")
def resonator():
    return Resonator()


@pytest.fixture(scope="module")
def below_threshold(resonator):
    params, state, _ = resonator.below_threshold_state(0.0, 0.95)
    return params, state


def test_below_threshold_spectrum(resonator, below_threshold):
    params, state = below_threshold
    with ThreadProvider(4) as provider:
        result = resonator.analysis(state, params).omega(0, 10, 11).with_provider(provider).run()
    levels = result.spectrum.levels_db
    assert levels[0, 0] == pytest.approx(-19.77, abs=0.05)
    for omega, row in zip(result.spectrum.omega, levels):
        np.testing.assert_allclose(from_db(row), oracle_levels(params, omega), rtol=1e-6, atol=1e-9)


def test_loss_floor(resonator):
    floor = to_db(1 - ETA)
    best = []
    for nu in (0.99, 0.999, 0.9999):
        params, state, _ = resonator.below_threshold_state(0.0, nu)
        best.append(resonator.analysis(state, params).omega(0, 0, 1).run().spectrum.levels_db[0, 0])
    assert best[0] > best[1] > best[2]
    assert min(best) >= floor - 1e-3


def test_structure_below_threshold(resonator, below_threshold):
    params, state = below_threshold
    M = resonator.analysis(state, params).omega(0, 0, 1).run().matrix
    assert M.hamiltonian_defect() < 1e-10
    loss = LossMatrix.from_params(params)
    for omega in np.linspace(0.5, 15, 10):
        S = transfer_function(M, loss, omega)
        check_conjugate_symplectic(S)
        assert reciprocal_defect(bloch_messiah(S, gauge=False)[1]) < 1e-8


def test_single_mode_branch(resonator, below_threshold):
    params, state = below_threshold
    result = resonator.analysis(state, params).omega(0, 3.7, 2).at(0.0).supermodes(1).degeneracy().run()
    assert result.supermodes[0.0][0].pair_weight(0) > 0.99
    report = result.degeneracy
    assert [len(u) for u in report.unpaired] == [2, 2]
    assert [len(s) for s in report.single_mode_branches] == [1, 1]


@pytest.mark.slow
@pytest.mark.parametrize("mu", [0, 20, 40])
def test_phase_matching_scan(resonator, mu):
    params = resonator.params(0.0, 0.95)
    target = phase_matched_detuning(mu, params.d_int)
    grid = np.linspace(target - 10, target + 10, 41)
    with ThreadProvider() as provider:
        scan = detuning_scan(mu, params, grid, provider=provider)
    assert abs(scan.best_delta - target) <= grid[1] - grid[0]
    assert scan.best_supermode.pair_weight(mu) > 0.5
    if mu:
        assert scan.best_supermode.two_mode_balance(mu) > 0.9


@pytest.mark.slow
def test_stable_soliton_structure(resonator):
    params, state, label = resonator.steady_state(12.0, 1.05)
    assert label.regime is Regime.STABLE_SOLITON
    assert label.residual < 1e-10
    reduced = resonator.analysis(state, params).omega(1, 15, 5).pump_model("pdnlse").run()
    assert jacobian_check(reduced.matrix, state, params) < 1e-4
    result = resonator.analysis(state, params).omega(1, 15, 5).run()
    assert result.matrix.hamiltonian_defect() < 1e-10
    loss = LossMatrix.from_params(params)
    for omega in (1.0, 7.5):
        S = transfer_function(result.matrix, loss, omega)
        check_conjugate_symplectic(S)
        assert reciprocal_defect(bloch_messiah(S, gauge=False)[1]) < 1e-8


@pytest.mark.slow
@pytest.mark.parametrize(
    "point, seed, regime",
    [
        ((0.0, 0.95), "noise", Regime.BELOW_THRESHOLD),
        ((12.0, 1.05), "soliton", Regime.STABLE_SOLITON),
        ((1.2, 1.05), "soliton", Regime.STABLE_SOLITON),
        ((12.0, 1.5), "soliton", Regime.OSCILLATORY_SOLITON),
    ],
)
def test_regime_labels(resonator, point, seed, regime):
    _, _, label = resonator.steady_state(*point, seed=seed)
    assert label.regime is regime


def _figure_config(tmp_path, name, **overrides):
    return with_overrides(RunConfig(), dict({"output.directory": str(tmp_path / name)}, **overrides))


@pytest.mark.slow
def test_quantum_dispersive_waves(tmp_path):
    overrides = {"omega.min": 5.0, "omega.max": 15.0, "omega.points": 21}
    quartic = run("reproduce-figure", _figure_config(tmp_path, "fig3", **overrides), figure="3")
    quadratic = run("reproduce-figure", _figure_config(tmp_path, "figS4", **overrides), figure="S4")
    assert quartic.status == quadratic.status == "ok"
    assert quartic.extra["max_qdw_localization"] > 0.5
    assert quadratic.extra["max_qdw_localization"] <= 0.2


@pytest.mark.slow
def test_photon_envelopes(tmp_path):
    bundle = run("reproduce-figure", _figure_config(tmp_path, "fig4"), figure="4")
    assert bundle.status == "ok"
    metrics = load_json(tmp_path / "fig4" / "metrics.json")
    assert metrics["background_ratio"] > 10
    for name in ("quartic", "quadratic"):
        assert metrics[name]["converged"]
        theta = np.loadtxt(tmp_path / "fig4" / f"envelope_{name}.csv", delimiter=",", skiprows=1)[:, 0]
        step = theta[1] - theta[0]
        for noise, pulse in zip(sorted(metrics[name]["noise_peak_positions"]), sorted(metrics[name]["pulse_positions"])):
            assert abs(noise - pulse) <= 2 * step + 1e-12
