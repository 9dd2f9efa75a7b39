"""Constructors for initial data and forces on a lattice."""

import numpy as np

from .errors import ParameterError
from .grid import FrequencyGrid, SpectralVectorField, spectral_coeffs
from .norms import pm_values
from .symbols import project


def _scaled(coeffs, grid, pm2):
    norm = float(pm_values(coeffs, grid, 2))
    if norm == 0.0:
        raise ParameterError("field vanishes on the active lattice")
    return coeffs * (pm2 / norm)


def random_solenoidal(grid: FrequencyGrid, pm2: float, seed: int = 0, mask=None) -> SpectralVectorField:
    """Divergence-free field from Gaussian noise, rescaled to the given PM^2 norm.

    The noise is smoothed by exp(-|xi|^2 h^2) so that the weighted spectrum
    is not dominated by the top modes; ``mask`` restricts the support.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3,) + grid.shape)
    c = spectral_coeffs(noise, grid) * np.exp(-grid.xi2 * grid.spacing**2)
    c = project(c, grid)
    if mask is not None:
        c = np.where(mask, c, 0.0)
    return SpectralVectorField(grid, _scaled(c, grid, pm2))


def homogeneous_field(grid: FrequencyGrid, direction=(1.0, 0.0, 0.0), pm2: float = 1.0, mask=None) -> SpectralVectorField:
    """u^(xi) = s P^(xi) e / |xi|^2, the spectrum of a degree -1 homogeneous field.

    The scale s is chosen so that the PM^2 norm equals ``pm2``.
    """
    e = np.asarray(direction, dtype=np.float64).reshape(3, 1, 1, 1)
    c = project(np.broadcast_to(e, (3,) + grid.shape).astype(np.complex128), grid) * grid.inv_xi2
    c = np.where(grid.active, c, 0.0)
    if mask is not None:
        c = np.where(mask, c, 0.0)
    return SpectralVectorField(grid, _scaled(c, grid, pm2))


def single_mode(grid: FrequencyGrid, k, amplitude) -> SpectralVectorField:
    """Real divergence-free field a e^{i k.x} + conj at lattice index k.

    ``amplitude`` must be orthogonal to k; it is the coefficient at +k and its
    conjugate sits at -k.
    """
    k = np.asarray(k, dtype=int)
    amp = np.asarray(amplitude, dtype=np.complex128)
    if abs(np.dot(k, amp)) > 1e-12 * max(1.0, np.linalg.norm(amp)):
        raise ParameterError("single-mode amplitude must be orthogonal to k")
    c = np.zeros((3,) + grid.shape, dtype=np.complex128)
    idx = tuple(int(v) % grid.n for v in k)
    neg = tuple(int(-v) % grid.n for v in k)
    c[(slice(None),) + idx] = amp
    c[(slice(None),) + neg] = np.conj(amp)
    if grid.nyquist[idx]:
        raise ParameterError("single mode may not sit on a Nyquist plane")
    return SpectralVectorField(grid, c)
