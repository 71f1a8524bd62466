"""Private helpers shared by the numerical modules."""

import numpy as np
from thewalrus.symplectic import sympmat

from pdcspy.exceptions import GridMismatch, ValidationError


def mode_indices(n: int) -> np.ndarray:
    """Integer mode numbers ``-N/2 .. N/2-1`` in array order."""
    return np.arange(-(n // 2), n - n // 2)


def symplectic_form(n: int) -> np.ndarray:
    """The 2N x 2N form ``[[0, I], [-I, 0]]``."""
    return sympmat(n)


def ladder_to_quadrature(n: int) -> np.ndarray:
    """Unitary ``O`` with ``(x, p) = O (a, a^dagger)``."""
    eye = np.eye(n)
    return np.block([[eye, eye], [-1j * eye, 1j * eye]]) / np.sqrt(2)


def to_db(variance):
    return 10.0 * np.log10(variance)


def from_db(level):
    return 10.0 ** (np.asarray(level) / 10.0)


def wrap_angle(theta):
    """Wrap to ``[-pi, pi)``."""
    return (np.asarray(theta) + np.pi) % (2 * np.pi) - np.pi


def check_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise ValidationError(f"{name} must be finite")


def check_grid(name: str, array: np.ndarray, n: int) -> None:
    if array.shape[-1] != n:
        raise GridMismatch(f"{name} has {array.shape[-1]} modes, expected {n}")


def as_matrix(M) -> np.ndarray:
    """The dense array behind a :class:`~pdcspy.linearization.ModeInteractionMatrix` or a plain array."""
    return np.asarray(getattr(M, "M", M))
