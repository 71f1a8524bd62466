import numpy as np
import pytest

from pdcspy import PhysicalParams, normalize
from pdcspy._utils import to_db
from pdcspy.defaults import CONF_QUARTIC
from pdcspy.exceptions import ValidationError
from pdcspy.oracle import PairSystem, detuning_scan, opa_output_spectrum, oracle_levels, phase_matched_detuning
from pdcspy.providers import ThreadProvider
from tests.utils import small_params

ETA = 1 / 1.01


def test_resonant_single_mode():
    low, high = opa_output_spectrum(PairSystem(0, 0.0, 0.95, ETA), 0.0)
    assert to_db(low) == pytest.approx(-19.77, abs=0.01)
    assert low == pytest.approx(1 - ETA * 4 * 0.95 / 1.95**2)
    assert high == pytest.approx(1 + ETA * 4 * 0.95 / 0.05**2)


def test_lorentzian_profile():
    for omega in (0.5, 3.0):
        low, _ = opa_output_spectrum(PairSystem(0, 0.0, 0.6, ETA), omega)
        assert low == pytest.approx(1 - ETA * 4 * 0.6 / (1.6**2 + omega**2))


def test_no_drive_is_shot_noise():
    for detuning in (0.0, 2.0):
        assert opa_output_spectrum(PairSystem(3, detuning, 0.0, ETA), 1.0) == pytest.approx((1.0, 1.0))


@pytest.mark.parametrize("detuning", [0.0, 0.7, 3.0])
@pytest.mark.parametrize("omega", [0.0, 0.4, 5.0])
def test_lossless_pair_is_pure(detuning, omega):
    low, high = opa_output_spectrum(PairSystem(2, detuning, 0.8, 1.0), omega)
    assert low * high == pytest.approx(1.0, rel=1e-9)


def test_detuning_weakens_squeezing():
    lows = [opa_output_spectrum(PairSystem(1, d, 0.95, ETA), 0.0)[0] for d in (0.0, 0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(lows, lows[1:]))


def test_loss_floor():
    levels = [to_db(opa_output_spectrum(PairSystem(0, 0.0, nu, ETA), 0.0)[0]) for nu in (0.99, 0.999, 0.9999)]
    floor = to_db(1 - ETA)
    assert all(a > b for a, b in zip(levels, levels[1:]))
    assert all(level >= floor - 1e-3 for level in levels)
    assert levels[-1] == pytest.approx(floor, abs=0.01)


def test_validation():
    with pytest.raises(ValidationError):
        opa_output_spectrum(PairSystem(0, 0.0, 1.0, ETA), 0.0)
    with pytest.raises(ValidationError):
        PairSystem(0, 0.0, 0.5, 0.0)
    with pytest.raises(ValidationError):
        PairSystem.from_params(small_params(d3=0.5, nu=0.5), 2)


def test_from_params():
    p = small_params(d2=2.0, delta=-1.0, nu=0.5j)
    pair = PairSystem.from_params(p, 3)
    assert pair.detuning == pytest.approx(-1.0 + 9.0)
    assert pair.nu_mag == pytest.approx(0.5)
    assert not pair.single_mode
    assert PairSystem.from_params(p, 0).single_mode


def test_oracle_levels_cover_the_grid():
    p = small_params(nu=0.9)
    levels = oracle_levels(p, 0.0)
    assert levels.shape == (32,)
    assert np.all(np.diff(levels) >= 0)
    assert np.count_nonzero(levels == 1.0) >= 2


def test_phase_matched_detuning():
    d_int = normalize(PhysicalParams(**CONF_QUARTIC), 0.0, 0.0).d_int
    assert phase_matched_detuning(0, d_int) == 0.0
    assert phase_matched_detuning(40, d_int) == pytest.approx(-1347.2, abs=0.2)
    assert phase_matched_detuning(-40, d_int) == phase_matched_detuning(40, d_int)
    with pytest.raises(ValidationError):
        phase_matched_detuning(100, d_int)


@pytest.mark.parametrize("mu", [0, 3])
def test_detuning_scan_finds_phase_matching(mu):
    p = small_params(nu=0.95)
    target = phase_matched_detuning(mu, p.d_int)
    grid = np.linspace(target - 4.0, target + 4.0, 17)
    with ThreadProvider(2) as provider:
        scan = detuning_scan(mu, p, grid, provider=provider)
    assert abs(scan.best_delta - target) <= 0.5
    assert scan.levels_db.shape == (17,)
    assert scan.best_supermode.pair_weight(mu) > 0.5
    if mu:
        assert scan.best_supermode.two_mode_balance(mu) > 0.9
    else:
        assert scan.best_supermode.pair_weight(0) > 0.99


def test_detuning_scan_rejects_empty_grid():
    with pytest.raises(ValidationError):
        detuning_scan(0, small_params(nu=0.5), [])
