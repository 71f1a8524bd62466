import numpy as np
import pytest

from pdcspy import PhysicalParams, Regime, Resonator
from pdcspy.defaults import CONF_QUARTIC
from pdcspy.exceptions import DegeneracyWarning
from pdcspy.meanfield import FieldState, relative_residual
from pdcspy.providers import ThreadProvider

SMALL_CONF = {"dt": 1e-2, "omega_points": 5, "theta_points": 32, "envelope_omega_max": 5.0, "envelope_omega_points": 21}


@pytest.fixture
def ring():
    return Resonator(PhysicalParams(**dict(CONF_QUARTIC, mode_count=16, pump_mode_index=4)), conf=SMALL_CONF)


def test_presets():
    assert Resonator().physical.d4_hz == CONF_QUARTIC["d4_hz"]
    assert Resonator(preset="quadratic").physical.d4_hz == 0.0
    with pytest.raises(ValueError):
        Resonator(preset="cubic")
    with pytest.raises(ValueError):
        Resonator(conf={"timestep": 1e-3})
    with pytest.raises(TypeError):
        Resonator(CONF_QUARTIC)


def test_conf_merges_defaults(ring):
    assert ring.conf["dt"] == 1e-2
    assert ring.conf["pump_model"] == "full"
    assert Resonator().conf["dt"] == 1e-3


def test_describe():
    info = Resonator().describe()
    assert info["coefficients"]["d2"] == pytest.approx(3.0, abs=1e-3)
    assert info["coefficients"]["d4"] == pytest.approx(-9.87e-3, abs=1e-5)
    assert info["zero_crossings"] == pytest.approx([-60.4, 60.4], abs=0.05)
    assert info["loss_per_round_trip"] == pytest.approx(np.pi / 3000)


def test_params(ring):
    p = ring.params(1.0, 0.5)
    assert p.mode_count == 16
    assert p.pump_mode_index == 4
    assert p.gamma_c == pytest.approx(1 / 1.01)
    np.testing.assert_array_equal(ring.d_int, p.d_int)


def test_steady_state_below_threshold(ring):
    params, state, label = ring.steady_state(0.0, 0.5)
    assert label.regime is Regime.BELOW_THRESHOLD
    assert state.norm == 0.0

    params, state, label = ring.steady_state(0.0, 0.5, seed="noise")
    assert label.regime is Regime.BELOW_THRESHOLD
    assert state.norm == 0.0
    with pytest.raises(ValueError):
        ring.steady_state(0.0, 0.5, seed="flat")


def test_below_threshold_state(ring):
    params, state, label = ring.below_threshold_state(0.0, 0.95)
    assert state.norm == 0.0
    assert label.residual == 0.0
    with pytest.raises(ValueError):
        ring.below_threshold_state(0.0, 1.05)


def test_analysis_builder(ring):
    params, state, _ = ring.below_threshold_state(0.0, 0.5)
    with pytest.warns(DegeneracyWarning):
        result = ring.analysis(state, params).omega(0, 2, 5).at(0.0).supermodes(2).degeneracy().run()
    assert result.spectrum.levels_db.shape == (5, 32)
    assert list(result.supermodes) == [0.0]
    assert len(result.supermodes[0.0]) == 2
    assert result.supermodes[0.0][0].pair_weight(0) > 0.99
    assert len(result.degeneracy.pairs) == 5
    assert result.matrix.hamiltonian_defect() < 1e-12


def test_analysis_options(ring):
    params, state, _ = ring.below_threshold_state(0.0, 0.5)
    with ThreadProvider(2) as provider:
        result = ring.analysis(state, params).loss(0.5).pump_model("full").with_provider(provider).run()
    assert result.params.gamma_c == 0.5
    assert result.spectrum.omega.shape == (5,)
    assert result.degeneracy is None
    with pytest.raises(ValueError):
        ring.analysis(state, params).pump_model("exact")


def test_lossier_ring_squeezes_less(ring):
    params, state, _ = ring.below_threshold_state(0.0, 0.95)
    analysis = ring.analysis(state, params).omega(0, 0, 1)
    tight = analysis.run().spectrum.levels_db[0, 0]
    loose = analysis.loss(0.5).run().spectrum.levels_db[0, 0]
    assert tight < loose < 0


def test_envelope(ring):
    params, state, _ = ring.below_threshold_state(0.0, 0.9)
    env = ring.envelope(state, params)
    assert env.values.shape == (32,)
    assert env.omega_points == 21
    assert env.mean() > 0


def test_sweep(ring):
    results = ring.sweep([0.0], [0.5, 0.8])
    assert [point.label.regime for point in results.values()] == [Regime.BELOW_THRESHOLD] * 2
    assert all(isinstance(point.state, FieldState) for point in results.values())


@pytest.mark.parametrize("preset", ["quartic", "quadratic"])
def test_stable_soliton_at_figure_point(preset):
    params, state, label = Resonator(preset=preset).steady_state(12.0, 1.05)
    assert label.regime is Regime.STABLE_SOLITON
    assert label.residual < 1e-8
    assert relative_residual(state, params) < 1e-8
    # the antisymmetric pair keeps its two pulses half a turn apart
    assert np.max(np.abs(state.rotated(np.pi).spectrum + state.spectrum)) < 1e-6 * state.norm


def test_mode_interaction_model(ring):
    params, vacuum, _ = ring.below_threshold_state(0.0, 0.5)
    full = ring.mode_interaction(vacuum, params)
    reduced = ring.mode_interaction(vacuum, params, "pdnlse")
    np.testing.assert_array_equal(full.M, reduced.M)
