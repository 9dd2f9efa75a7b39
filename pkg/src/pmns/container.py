"""Binary container for spectral fields.

Layout (little-endian): magic b"PMNS", uint32 version, uint32 n_per_axis,
float64 delta_xi, then the three components u^_1, u^_2, u^_3 as row-major
complex arrays of shape (n, n, n) with real and imaginary parts interleaved.
The lattice is written in centred order, k_j = -n/2, ..., n/2 - 1 along each
axis (axis 0 is k_1).
"""

import struct

import numpy as np

from .errors import ParameterError
from .grid import FrequencyGrid, SpectralVectorField

MAGIC = b"PMNS"
VERSION = 1
_HEADER = struct.Struct("<4sIId")


def dumps_field(f: SpectralVectorField) -> bytes:
    header = _HEADER.pack(MAGIC, VERSION, f.grid.n, f.grid.delta_xi)
    centred = np.fft.fftshift(f.coeffs, axes=(-3, -2, -1))
    return header + np.ascontiguousarray(centred, dtype="<c16").tobytes()


def loads_field(data: bytes) -> SpectralVectorField:
    if len(data) < _HEADER.size:
        raise ParameterError("truncated PMNS container")
    magic, version, n, dxi = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParameterError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ParameterError(f"unsupported container version {version}")
    grid = FrequencyGrid(n, dxi)
    body = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if body.size != 3 * n**3:
        raise ParameterError(f"expected {3 * n**3} coefficients, found {body.size}")
    coeffs = np.fft.ifftshift(body.reshape(3, n, n, n), axes=(-3, -2, -1))
    return SpectralVectorField(grid, coeffs.astype(np.complex128))


def write_field(path, f: SpectralVectorField):
    with open(path, "wb") as fh:
        fh.write(dumps_field(f))


def read_field(path) -> SpectralVectorField:
    with open(path, "rb") as fh:
        return loads_field(fh.read())
