"""Frequency lattice, spectral/physical field containers and transforms.

Fourier convention: f^(xi) = (2 pi)^(-3/2) int exp(-i x.xi) f(x) dx.  The
lattice stores samples of f^ at xi = delta_xi * k, k in [-n/2, n/2)^3, so the
physical dual grid is a periodic box of side 2 pi / delta_xi with spacing
h = 2 pi / (n delta_xi).  Arrays are kept in numpy FFT ordering; index 0 is
xi = 0 (resp. x = 0).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import (
    GridMismatchError,
    KnotError,
    ParameterError,
    SymmetryError,
    UnsupportedRescaleError,
)

FOURIER_NORM = (2.0 * np.pi) ** -1.5
HERMITIAN_RTOL = 1e-10


def fft_workers():
    """Worker count for FFTs, capped by the PMNS_THREADS environment variable."""
    value = os.environ.get("PMNS_THREADS")
    if not value:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        return 1


@dataclass(frozen=True)
class FrequencyGrid:
    """Truncated cubic lattice {delta_xi * k : -n/2 <= k_j < n/2}."""

    n_per_axis: int
    delta_xi: float

    def __post_init__(self):
        n = self.n_per_axis
        if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
            raise ParameterError(f"n_per_axis must be an even integer >= 2, got {n!r}")
        if not self.delta_xi > 0:
            raise ParameterError(f"delta_xi must be positive, got {self.delta_xi!r}")
        object.__setattr__(self, "n_per_axis", int(n))
        object.__setattr__(self, "delta_xi", float(self.delta_xi))

    @property
    def n(self):
        return self.n_per_axis

    @property
    def shape(self):
        return (self.n,) * 3

    @property
    def cutoff(self):
        return self.delta_xi * self.n / 2

    @property
    def spacing(self):
        """Physical grid spacing h of the dual grid."""
        return 2.0 * np.pi / (self.n * self.delta_xi)

    @property
    def box_length(self):
        return 2.0 * np.pi / self.delta_xi

    @cached_property
    def k1d(self):
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)

    @cached_property
    def xi(self):
        """Frequency components, shape (3, n, n, n)."""
        k = self.k1d * self.delta_xi
        return np.array(np.meshgrid(k, k, k, indexing="ij"))

    @cached_property
    def xi2(self):
        return np.sum(self.xi**2, axis=0)

    @cached_property
    def xi_abs(self):
        return np.sqrt(self.xi2)

    @cached_property
    def nyquist(self):
        """True on modes with some k_j = -n/2 (unpaired, kept at zero)."""
        ny = self.k1d == -(self.n // 2)
        a, b, c = np.meshgrid(ny, ny, ny, indexing="ij")
        return a | b | c

    @cached_property
    def active(self):
        """Modes entering norms and 1/|xi|^2 symbols: xi != 0 and not Nyquist."""
        act = ~self.nyquist
        act[0, 0, 0] = False
        return act

    @cached_property
    def inv_xi2(self):
        out = np.zeros(self.shape)
        out[self.active] = 1.0 / self.xi2[self.active]
        return out

    @cached_property
    def inv_xi2_nonzero(self):
        """1/|xi|^2 on every mode except xi = 0, Nyquist planes included."""
        out = np.zeros(self.shape)
        nz = self.xi2 > 0
        out[nz] = 1.0 / self.xi2[nz]
        return out

    @cached_property
    def dealias_mask(self):
        """Modes kept by the 2/3 rule: every |xi_j| <= (2/3) cutoff."""
        limit = 2.0 / 3.0 * self.cutoff
        return np.all(np.abs(self.xi) <= limit + 1e-12 * self.delta_xi, axis=0) & ~self.nyquist

    @cached_property
    def x(self):
        """Dual spatial grid, shape (3, n, n, n), centred so that index 0 is x = 0."""
        s = self.k1d * self.spacing
        return np.array(np.meshgrid(s, s, s, indexing="ij"))

    def to_dict(self):
        return {"n_per_axis": self.n, "delta_xi": self.delta_xi}


def _check_same_grid(*grids):
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {g}")


def reflect(arr):
    """Return arr evaluated at -xi (last three axes, FFT ordering)."""
    axes = (-3, -2, -1)
    return np.roll(np.flip(arr, axis=axes), 1, axis=axes)


def hermitian_deviation(coeffs, grid):
    """Max |c(-xi) - conj c(xi)| over paired modes, relative to max |c|."""
    diff = np.abs(reflect(coeffs) - np.conj(coeffs))
    diff[..., grid.nyquist] = 0.0
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(diff) / scale)


@dataclass(frozen=True)
class SpectralVectorField:
    """Fourier coefficients (u^_1, u^_2, u^_3) on a FrequencyGrid.

    Treated as an immutable value; every operation returns a new field.
    ``approximate`` marks band-limited surrogates of non-band-limited fields.
    """

    grid: FrequencyGrid
    coeffs: np.ndarray
    approximate: bool = field(default=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (3,) + self.grid.shape:
            raise ParameterError(f"coeffs must have shape {(3,) + self.grid.shape}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((3,) + grid.shape, dtype=np.complex128))

    def _new(self, coeffs, approximate=None):
        return SpectralVectorField(
            self.grid, coeffs, self.approximate if approximate is None else approximate
        )

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return self._new(self.coeffs + other.coeffs, self.approximate or other.approximate)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return self._new(self.coeffs - other.coeffs, self.approximate or other.approximate)

    def __mul__(self, scalar):
        return self._new(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.coeffs)

    def divergence(self):
        """Lattice divergence symbol xi . u^(xi) (real factor i omitted)."""
        return np.sum(self.grid.xi * self.coeffs, axis=0)

    def hermitian_deviation(self):
        return hermitian_deviation(self.coeffs, self.grid)


@dataclass(frozen=True)
class PhysicalVectorField:
    """Real values of a vector field on the dual spatial grid."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (3,) + self.grid.shape:
            raise ParameterError(f"values must have shape {(3,) + self.grid.shape}, got {v.shape}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SpectralTensorField:
    """Fourier coefficients T^_jk of a 3x3 tensor field, shape (3, 3, n, n, n)."""

    grid: FrequencyGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (3, 3) + self.grid.shape:
            raise ParameterError(f"tensor coeffs must have shape {(3, 3) + self.grid.shape}")
        object.__setattr__(self, "coeffs", c)


def physical_values(coeffs, grid):
    """Inverse transform of raw coefficient arrays (..., n, n, n); no checks."""
    c = np.where(grid.nyquist, 0.0, coeffs)
    scale = FOURIER_NORM * grid.delta_xi**3 * grid.n**3
    out = scipy.fft.ifftn(c, axes=(-3, -2, -1), workers=fft_workers())
    return scale * out.real


def spectral_coeffs(values, grid):
    """Forward transform of raw value arrays (..., n, n, n); pins xi = 0 and Nyquist."""
    scale = FOURIER_NORM * grid.spacing**3
    out = scale * scipy.fft.fftn(values, axes=(-3, -2, -1), workers=fft_workers())
    out[..., 0, 0, 0] = 0.0
    out[..., grid.nyquist] = 0.0
    return out


def to_physical(f: SpectralVectorField) -> PhysicalVectorField:
    """Inverse transform of a Hermitian spectral field to real values."""
    dev = f.hermitian_deviation()
    if dev > HERMITIAN_RTOL:
        raise SymmetryError(f"field is not Hermitian (max relative deviation {dev:.3e})", dev)
    return PhysicalVectorField(f.grid, physical_values(f.coeffs, f.grid))


def to_spectral(g: PhysicalVectorField) -> SpectralVectorField:
    """Forward transform; the mean (xi = 0) and the Nyquist modes are removed."""
    return SpectralVectorField(g.grid, spectral_coeffs(g.values, g.grid))


def dyadic_support(grid, lam):
    """Modes on which dyadic_rescale(., lam) is defined (xi / lam on the lattice)."""
    k = grid.k1d
    if lam == 2:
        ok = k % 2 == 0
    elif lam == 0.5:
        ok = (2 * k >= -(grid.n // 2)) & (2 * k < grid.n // 2)
    else:
        raise UnsupportedRescaleError(f"only lambda in {{2, 1/2}} is supported, got {lam!r}")
    a, b, c = np.meshgrid(ok, ok, ok, indexing="ij")
    return a & b & c & ~grid.nyquist


def dyadic_rescale(f: SpectralVectorField, lam: float) -> SpectralVectorField:
    """Spectral representation of x -> lam f(lam x), i.e. lam^-2 f^(xi / lam).

    Modes whose preimage xi / lam is off the lattice are dropped (set to 0).
    """
    grid = f.grid
    support = dyadic_support(grid, lam)
    n = grid.n
    k = grid.k1d
    src = np.zeros(n, dtype=int)
    if lam == 2:
        src[k % 2 == 0] = (k[k % 2 == 0] // 2) % n
    else:
        sel = (2 * k >= -(n // 2)) & (2 * k < n // 2)
        src[sel] = (2 * k[sel]) % n
    gathered = f.coeffs[:, src][:, :, src][:, :, :, src]
    out = np.where(support, gathered * lam**-2, 0.0)
    return SpectralVectorField(grid, out, f.approximate)


@dataclass(frozen=True)
class Trajectory:
    """Spectral fields sampled at increasing knots t_0 = 0 < t_1 < ..."""

    grid: FrequencyGrid
    knots: np.ndarray
    coeffs: np.ndarray  # (K, 3, n, n, n)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if knots.ndim != 1 or len(knots) == 0:
            raise ParameterError("knots must be a non-empty 1-D sequence")
        if c.shape != (len(knots), 3) + self.grid.shape:
            raise ParameterError(f"trajectory coeffs shape {c.shape} does not match knots/grid")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_fields(cls, knots, fields):
        fields = list(fields)
        if not fields:
            raise ParameterError("empty trajectory")
        grid = fields[0].grid
        _check_same_grid(*(f.grid for f in fields))
        return cls(grid, knots, np.stack([f.coeffs for f in fields]))

    @classmethod
    def constant(cls, f: SpectralVectorField, knots):
        knots = np.asarray(knots, dtype=np.float64)
        return cls(f.grid, knots, np.broadcast_to(f.coeffs, (len(knots),) + f.coeffs.shape).copy())

    def __len__(self):
        return len(self.knots)

    def field(self, i) -> SpectralVectorField:
        return SpectralVectorField(self.grid, self.coeffs[i])

    def knot_index(self, t):
        idx = np.flatnonzero(np.isclose(self.knots, t, rtol=1e-12, atol=1e-15))
        if len(idx) == 0:
            raise KnotError(f"t = {t!r} is not a stored knot")
        return int(idx[0])

    def at(self, t) -> SpectralVectorField:
        return self.field(self.knot_index(t))

    def fields(self):
        return [self.field(i) for i in range(len(self))]


def check_knots(knots):
    """Validate a knot sequence: strictly increasing and starting at 0."""
    knots = np.asarray(knots, dtype=np.float64)
    if knots.ndim != 1 or len(knots) < 1:
        raise ParameterError("knots must be a non-empty 1-D sequence")
    if knots[0] != 0.0:
        raise ParameterError("knots must start at t = 0")
    if np.any(np.diff(knots) <= 0):
        raise ParameterError("knots must be strictly increasing")
    return knots


def geometric_knots(t_min, t_max, per_decade=8):
    """Knots 0, t_min, t_min r, ..., t_max with r = 10^(1/per_decade)."""
    if not 0 < t_min < t_max:
        raise ParameterError("need 0 < t_min < t_max")
    count = int(round(np.log10(t_max / t_min) * per_decade))
    return np.concatenate([[0.0], t_min * (t_max / t_min) ** (np.arange(count + 1) / max(count, 1))])
