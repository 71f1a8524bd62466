import numpy as np
import pytest

from pdcspy.exceptions import NotAFixedPoint, NotHermitian, PumpOverlapError, ValidationError
from pdcspy.linearization import (
    KERR_COUPLING,
    InteractionMatrices,
    assemble_M,
    assemble_pumped_spectrum,
    build_GF,
    interaction_matrix,
    jacobian_check,
    pump_amplitudes,
)
from pdcspy.meanfield import FieldState
from tests.utils import index, random_comb, small_params


def test_pump_convention():
    for nu in (0.95, 1.05 * np.exp(0.4j), -0.3):
        plus, minus = pump_amplitudes(nu)
        assert 2 * KERR_COUPLING * plus * minus == pytest.approx(1j * nu)
        assert abs(plus) == pytest.approx(abs(minus))


def test_vacuum_without_drive():
    p = small_params(delta=1.5)
    gf = build_GF(assemble_pumped_spectrum(FieldState.zeros(16), p), p)
    np.testing.assert_array_equal(gf.G, np.diag(1.5 + p.d_int))
    assert not np.any(gf.F)


def test_drive_sits_on_the_anti_diagonal():
    p = small_params(nu=0.95)
    gf = build_GF(assemble_pumped_spectrum(FieldState.zeros(16), p), p)
    mu = p.mu
    mask = np.add.outer(mu, mu) == 0
    assert np.all(gf.F[~mask] == 0)
    # mode -N/2 has no partner
    np.testing.assert_allclose(gf.F[mask], 1j * 0.95)
    assert gf.F[0, 0] == 0


def test_full_pump_model_sparsity():
    p = small_params(nu=0.95)
    gf = build_GF(assemble_pumped_spectrum(FieldState.zeros(16), p), p, pump_model="full")
    sums = np.add.outer(p.mu, p.mu)
    mask = np.isin(sums, [0, 8, -8])
    assert np.all(gf.F[~mask] == 0)
    assert np.all(gf.F[mask] != 0)
    differences = np.subtract.outer(p.mu, p.mu)
    assert np.all(gf.G[~np.isin(differences, [0, 8, -8])] == 0)
    np.testing.assert_allclose(gf.F[sums == 0], 1j * 0.95)


def test_single_bright_mode():
    a = 0.4 + 0.3j
    spectrum = np.zeros(16, dtype=complex)
    spectrum[index(0, 16)] = a
    p = small_params(delta=2.0)
    gf = build_GF(assemble_pumped_spectrum(FieldState(spectrum), p), p)
    c = index(0, 16)
    assert gf.G[c, c] == pytest.approx(2.0 + 2 * KERR_COUPLING * abs(a) ** 2)
    assert gf.F[c, c] == pytest.approx(KERR_COUPLING * a**2)


def test_hermitian_and_symmetric():
    rng = np.random.default_rng(3)
    p = small_params(delta=1.0, nu=0.5)
    state = FieldState(random_comb(16, rng, skip=(4, -4)))
    for model in ("pdnlse", "full"):
        gf = build_GF(assemble_pumped_spectrum(state, p), p, model)
        gf.check()
        M = assemble_M(gf)
        assert M.M.dtype == float
        assert M.hamiltonian_defect() < 1e-10


def test_assemble_M_examples():
    zero = assemble_M(InteractionMatrices(np.zeros((3, 3)), np.zeros((3, 3))))
    np.testing.assert_array_equal(zero.M, np.zeros((6, 6)))

    drive = assemble_M(InteractionMatrices(np.zeros((1, 1), dtype=complex), np.array([[0.5j]])))
    np.testing.assert_allclose(drive.M, [[0.5, 0.0], [0.0, -0.5]])


def test_assemble_M_rejects_non_hermitian_G():
    G = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NotHermitian):
        assemble_M(InteractionMatrices(G, np.zeros((2, 2))))
    F = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(NotHermitian):
        assemble_M(InteractionMatrices(np.zeros((2, 2)), F))


def test_unknown_pump_model():
    p = small_params()
    with pytest.raises(ValidationError):
        build_GF(assemble_pumped_spectrum(FieldState.zeros(16), p), p, pump_model="bogus")


def test_pump_overlap():
    spectrum = np.zeros(16, dtype=complex)
    spectrum[index(4, 16)] = 1.0
    with pytest.raises(PumpOverlapError):
        assemble_pumped_spectrum(FieldState(spectrum), small_params(nu=0.5))


def test_jacobian_below_threshold():
    p = small_params(nu=0.95)
    state = FieldState.zeros(16)
    assert jacobian_check(interaction_matrix(state, p), state, p) < 1e-6


def test_jacobian_off_a_fixed_point():
    rng = np.random.default_rng(5)
    p = small_params(delta=0.5, nu=0.7)
    state = FieldState(random_comb(16, rng, amplitude=0.3, skip=(4, -4)))
    M = interaction_matrix(state, p)
    with pytest.raises(NotAFixedPoint):
        jacobian_check(M, state, p)
    assert jacobian_check(M, state, p, require_fixed_point=False) < 1e-5


def test_jacobian_grid_mismatch():
    p = small_params()
    M = interaction_matrix(FieldState.zeros(16), p)
    with pytest.raises(ValidationError):
        jacobian_check(M, FieldState.zeros(32), small_params(n=32))
