import numpy as np
import pytest

from pmns.duhamel import eta_constant
from pmns.grid import FrequencyGrid, SpectralVectorField

ETA = eta_constant().eta_effective
EPS = 0.5 / (4 * ETA)


def gaussian_spectrum(grid, width=1.0, direction=(0.0, 1.0, 0.0)):
    """Divergence-free spectrum xi x e * exp(-|xi|^2 w^2 / 2), times i so the field is real."""
    e = np.asarray(direction, dtype=float).reshape(3, 1, 1, 1)
    xi = grid.xi
    cross = np.array(
        [xi[1] * e[2] - xi[2] * e[1], xi[2] * e[0] - xi[0] * e[2], xi[0] * e[1] - xi[1] * e[0]]
    )
    c = 1j * cross * np.exp(-grid.xi2 * width**2 / 2)
    return SpectralVectorField(grid, np.where(grid.active, c, 0.0))


@pytest.fixture
def grid8():
    return FrequencyGrid(8, 1.0)


@pytest.fixture
def grid16():
    return FrequencyGrid(16, 1.0)
