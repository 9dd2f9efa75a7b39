"""Fourier multipliers of the mild formulation: Leray projector, heat semigroup,
divergence contraction and the projector bound kappa."""

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, ParameterError
from .grid import SpectralTensorField, SpectralVectorField


def leray_symbol(xi):
    """3x3 matrix delta_jk - xi_j xi_k / |xi|^2; the identity at xi = 0."""
    xi = np.asarray(xi, dtype=np.float64)
    n2 = float(xi @ xi)
    if n2 == 0.0:
        return np.eye(3)
    return np.eye(3) - np.outer(xi, xi) / n2


def project(coeffs, grid):
    """Leray projection of raw arrays (..., 3, n, n, n)."""
    dot = np.sum(grid.xi * coeffs, axis=-4, keepdims=True)
    return coeffs - grid.xi * (dot * grid.inv_xi2_nonzero)


def contract(tensor, grid):
    """sum_k i xi_k T_jk followed by projection, for raw arrays (..., 3, 3, n, n, n)."""
    div = 1j * np.sum(tensor * grid.xi, axis=-4)
    return project(div, grid)


def leray_apply(f: SpectralVectorField) -> SpectralVectorField:
    return SpectralVectorField(f.grid, project(f.coeffs, f.grid), f.approximate)


def heat_apply(f: SpectralVectorField, t: float) -> SpectralVectorField:
    """Multiply by exp(-t |xi|^2)."""
    if t < 0:
        raise ParameterError(f"heat_apply needs t >= 0, got {t}")
    return SpectralVectorField(f.grid, f.coeffs * np.exp(-t * f.grid.xi2), f.approximate)


def divergence_contract(T: SpectralTensorField, grid=None) -> SpectralVectorField:
    """Projected divergence P^(xi) i xi . T^(xi), contracting the second index."""
    if grid is not None and grid != T.grid:
        raise GridMismatchError(f"grid mismatch: {T.grid} vs {grid}")
    return SpectralVectorField(T.grid, contract(T.coeffs, T.grid))


@dataclass(frozen=True)
class KappaConstant:
    value: float
    offdiag_max: float
    n_directions: int


def sphere_directions(n):
    """Spiral points on S^2 with z running from -1 to 1 inclusive.

    The two poles are coordinate axes, so the diagonal projector entries
    orthogonal to them are attained exactly.
    """
    i = np.arange(n)
    z = -1.0 + 2.0 * i / (n - 1)
    z[0], z[-1] = -1.0, 1.0
    golden = np.pi * (3.0 - np.sqrt(5.0))
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = golden * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def kappa_estimate(n_directions: int) -> KappaConstant:
    """Max over entries and sampled directions of |P^_jk(xi)|."""
    if n_directions < 100:
        raise ParameterError("kappa_estimate needs at least 100 directions")
    d = sphere_directions(n_directions)
    n2 = np.sum(d * d, axis=1)
    P = np.eye(3)[None] - d[:, :, None] * d[:, None, :] / n2[:, None, None]
    off = np.abs(P[:, [0, 0, 1], [1, 2, 2]])
    return KappaConstant(float(np.max(np.abs(P))), float(np.max(off)), n_directions)
