import math

import numpy as np
import pytest

from pdcspy import PhysicalParams, normalize
from pdcspy.defaults import CONF_QUADRATIC, CONF_QUARTIC
from pdcspy.dispersion import (
    NormalizedParams,
    dispersion_profile,
    field_scale,
    normalized_coefficients,
    physical_dispersion,
    time_scale,
    zero_crossings,
)
from pdcspy.exceptions import DegeneracyWarning, ValidationError
from tests.utils import small_params


@pytest.fixture
def quartic():
    return PhysicalParams(**CONF_QUARTIC)


def test_normalized_coefficients(quartic):
    coefficients = normalized_coefficients(quartic)
    assert coefficients[2] == pytest.approx(3.000, abs=1e-3)
    assert coefficients[4] == pytest.approx(-9.870e-3, abs=1e-5)
    assert coefficients[3] == 0.0


def test_physical_dispersion_inverts_normalization(quartic):
    back = physical_dispersion(normalized_coefficients(quartic), quartic)
    for order, value in quartic.dispersion_hz().items():
        assert back[order] == pytest.approx(value, rel=1e-12, abs=1e-12)


def test_quartic_profile(quartic):
    p = normalize(quartic, 0.0, 0.0)
    assert p.d_at(0) == 0.0
    assert p.d_at(20) == pytest.approx(534.2, abs=0.1)
    assert p.d_at(40) == pytest.approx(1347.2, abs=0.2)
    assert p.d_at(60) == pytest.approx(70.0, abs=0.5)
    assert p.d_at(61) == pytest.approx(-112.6, abs=0.5)


def test_profile_is_even(quartic):
    d = normalize(quartic, 0.0, 0.0).d_int
    # index 0 is mu = -N/2, which has no partner on the grid
    np.testing.assert_array_equal(d[1:], d[1:][::-1])


def test_quartic_zero_crossings(quartic):
    d = normalize(quartic, 0.0, 0.0).d_int
    crossings = zero_crossings(d)
    assert crossings[0] == 0.0
    assert len(crossings) == 3
    assert crossings[1] == pytest.approx(-60.4, abs=0.05)
    assert crossings[2] == pytest.approx(60.4, abs=0.05)
    assert zero_crossings(d, skip_origin=True) == crossings[1:]


def test_quadratic_has_only_the_origin():
    p = normalize(PhysicalParams(**CONF_QUADRATIC), 0.0, 0.0)
    assert zero_crossings(p.d_int) == [0.0]
    assert zero_crossings(p.d_int, skip_origin=True) == []


def test_vanishing_profile_warns():
    with pytest.warns(DegeneracyWarning):
        assert zero_crossings(np.zeros(16)) == []


def test_dispersion_profile_rejects_low_orders():
    with pytest.raises(ValidationError):
        dispersion_profile({1: 1.0}, range(-4, 4))
    with pytest.raises(ValidationError):
        dispersion_profile({2: math.nan}, range(-4, 4))


def test_dispersion_profile_values():
    d = dispersion_profile({2: 2.0, 3: 6.0}, [-2, 0, 1])
    np.testing.assert_allclose(d, [4.0 - 8.0, 0.0, 1.0 + 1.0])


def test_loss_split():
    p = small_params()
    assert p.gamma_c == pytest.approx(1 / 1.01)
    assert p.gamma_i == pytest.approx(1 - 1 / 1.01)
    assert p.gamma_total == pytest.approx(1.0)
    assert p.eta == pytest.approx(1 / 1.01)


@pytest.mark.parametrize("ratio", [0.0, -0.1, 1.5, math.inf])
def test_bad_overcoupling(quartic, ratio):
    with pytest.raises(ValidationError):
        normalize(quartic, 0.0, 0.5, ratio)


def test_non_finite_point(quartic):
    with pytest.raises(ValidationError):
        normalize(quartic, math.nan, 0.5)
    with pytest.raises(ValidationError):
        normalize(quartic, 0.0, complex(0.5, math.inf))


@pytest.mark.parametrize(
    "change",
    [{"mode_count": 201}, {"mode_count": 2}, {"pump_mode_index": 0}, {"pump_mode_index": 99}, {"finesse": -1.0}],
)
def test_bad_physical_params(change):
    with pytest.raises(ValidationError):
        PhysicalParams(**dict(CONF_QUARTIC, **change))


def test_scales(quartic):
    assert time_scale(quartic) == pytest.approx(1e-12 * 3000 / math.pi)
    assert field_scale(quartic) == pytest.approx(math.sqrt(2 * math.pi * 23e-6 * 3000 / math.pi))


def test_from_coefficients():
    p = NormalizedParams.from_coefficients({2: 1.0}, 16, 2.0, 0.5)
    assert p.pump_mode_index == 4
    assert p.mode_count == 16
    assert p.d_at(3) == pytest.approx(4.5)
    assert p.nu == 0.5 + 0j
    with pytest.raises(ValidationError):
        p.d_at(8)


def test_at_and_overcoupling_keep_the_profile():
    p = small_params(d2=2.0)
    q = p.at(3.0, 1j).with_overcoupling(0.5)
    np.testing.assert_array_equal(q.d_int, p.d_int)
    assert (q.delta_eff, q.nu, q.gamma_c, q.gamma_i) == (3.0, 1j, 0.5, 0.5)


def test_normalized_params_validation():
    d = dispersion_profile({2: 1.0}, range(-8, 8))
    with pytest.raises(ValidationError):
        NormalizedParams(d + 1.0, 0.0, 0.0, 1.0, 0.0, 4)
    with pytest.raises(ValidationError):
        NormalizedParams(d, 0.0, 0.0, 0.5, 0.1, 4)
    with pytest.raises(ValidationError):
        NormalizedParams(d, 0.0, 0.0, 1.0, 0.0, 7)
