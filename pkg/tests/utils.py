import numpy as np
from scipy import linalg

from pdcspy._utils import symplectic_form
from pdcspy.dispersion import NormalizedParams


def small_params(n=16, d2=1.0, d4=0.0, delta=0.0, nu=0.0, pump=None, overcoupling=1 / 1.01, d3=0.0):
    coefficients = {2: d2, 4: d4}
    if d3:
        coefficients[3] = d3
    return NormalizedParams.from_coefficients(
        coefficients, n, delta, nu, overcoupling_ratio=overcoupling, pump_mode_index=pump
    )


def random_symmetric(n, rng, scale=0.3):
    h = rng.standard_normal((2 * n, 2 * n)) * scale / np.sqrt(2 * n)
    return (h + h.T) / 2


def random_hamiltonian_matrix(n, rng, scale=0.3):
    """A real matrix ``M = Omega H`` with ``M Omega + Omega M^T = 0``."""
    return symplectic_form(n) @ random_symmetric(n, rng, scale)


def random_symplectic(n, rng, scale=0.3):
    return linalg.expm(symplectic_form(n) @ random_symmetric(n, rng, scale))


def random_comb(n, rng, amplitude=0.05, skip=()):
    comb = amplitude * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    for mu in skip:
        comb[mu + n // 2] = 0
    return comb


def index(mu, n):
    return mu + n // 2


def check_conjugate_symplectic(S, tol=1e-8):
    omega = symplectic_form(S.shape[0] // 2)
    assert np.max(np.abs(S @ omega @ S.conj().T - omega)) < tol


def check_reciprocal(D, tol=1e-8):
    assert np.all(np.diff(D) >= 0)
    assert np.max(np.abs(D * D[::-1] - 1)) < tol
