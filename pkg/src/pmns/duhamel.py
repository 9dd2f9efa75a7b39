"""The bilinear Duhamel form B(u, v), its stationary counterpart, tensor
products of spectral fields and the constants bounding them."""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import GridMismatchError, ParameterError
from .grid import (
    FOURIER_NORM,
    SpectralTensorField,
    SpectralVectorField,
    Trajectory,
    physical_values,
    spectral_coeffs,
)
from .symbols import contract

PHI_SERIES_Z = 1e-2


@dataclass(frozen=True)
class BilinearConfig:
    """dealias: 2/3-rule truncation after products.
    quad_order: 1 (piecewise constant, left value) or 2 (piecewise linear)."""

    dealias: bool = True
    quad_order: int = 2

    def __post_init__(self):
        if self.quad_order not in (1, 2):
            raise ParameterError(f"quad_order must be 1 or 2, got {self.quad_order}")


ORACLE_CONFIG = BilinearConfig(dealias=False, quad_order=2)


@dataclass(frozen=True)
class EtaConstant:
    kappa: float
    eta_paper: float
    eta_effective: float

    @property
    def threshold_paper(self):
        return 1.0 / (4.0 * self.eta_paper)

    @property
    def threshold_effective(self):
        return 1.0 / (4.0 * self.eta_effective)


def eta_constant(kappa=1.0) -> EtaConstant:
    """eta = kappa pi^3 as stated, and the value carrying the (2 pi)^(-3/2)
    factor of the product rule under the unitary Fourier convention."""
    eta = kappa * np.pi**3
    return EtaConstant(float(kappa), float(eta), float(eta * FOURIER_NORM))


def _check_grids(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


# --- products -----------------------------------------------------------------


def product_coeffs(u, v, grid, dealias, symmetric=False):
    """Pseudospectral (u_j v_k)^ for raw arrays (3, n, n, n) -> (3, 3, n, n, n)."""
    pu = physical_values(u, grid)
    pv = pu if symmetric else physical_values(v, grid)
    if symmetric:
        out = np.empty((3, 3) + grid.shape, dtype=np.complex128)
        pairs = [(j, k) for j in range(3) for k in range(j, 3)]
        prods = np.stack([pu[j] * pu[k] for j, k in pairs])
        hat = spectral_coeffs(prods, grid)
        for (j, k), h in zip(pairs, hat):
            out[j, k] = h
            out[k, j] = h
    else:
        out = spectral_coeffs(pu[:, None] * pv[None, :], grid)
    if dealias:
        out *= grid.dealias_mask
    return out


def nonlinear_coeffs(u, v, grid, dealias, symmetric=False):
    """P^(xi) i xi . (u (x) v)^(xi) for raw arrays."""
    return contract(product_coeffs(u, v, grid, dealias, symmetric), grid)


def tensor_product_hat(
    u: SpectralVectorField, v: SpectralVectorField, cfg: BilinearConfig = BilinearConfig()
) -> SpectralTensorField:
    """(u_j v_k)^ = (2 pi)^(-3/2) (u^_j * v^_k) on the lattice, computed pseudospectrally."""
    _check_grids(u, v)
    return SpectralTensorField(u.grid, product_coeffs(u.coeffs, v.coeffs, u.grid, cfg.dealias))


def direct_tensor_product_hat(
    u: SpectralVectorField, v: SpectralVectorField, dealias=False
) -> SpectralTensorField:
    """Brute-force cyclic lattice convolution oracle, O(n^6).

    T^_jk(xi) = (2 pi)^(-3/2) delta_xi^3 sum_z u^_j(z) v^_k(xi - z).
    """
    _check_grids(u, v)
    grid = u.grid
    uc = np.where(grid.nyquist, 0.0, u.coeffs)
    vc = np.where(grid.nyquist, 0.0, v.coeffs)
    out = np.zeros((3, 3) + grid.shape, dtype=np.complex128)
    for idx in zip(*np.nonzero(np.any(uc != 0, axis=0))):
        shifted = np.roll(vc, shift=idx, axis=(1, 2, 3))
        out += uc[(slice(None),) + idx][:, None, None, None, None] * shifted[None]
    out *= FOURIER_NORM * grid.delta_xi**3
    out[..., 0, 0, 0] = 0.0
    out[..., grid.nyquist] = 0.0
    if dealias:
        out *= grid.dealias_mask
    return SpectralTensorField(grid, out)


# --- exponential quadrature -------------------------------------------------


def phi1(z):
    """(1 - exp(-z)) / z, stable for small z >= 0."""
    z = np.asarray(z, dtype=np.float64)
    small = z < PHI_SERIES_Z
    zs = np.where(small, 1.0, z)
    direct = -np.expm1(-zs) / zs
    series = 1 - z / 2 + z**2 / 6 - z**3 / 24 + z**4 / 120
    return np.where(small, series, direct)


def psi_left(z):
    """(1 - (1 + z) exp(-z)) / z^2: weight of the left node under linear interpolation."""
    z = np.asarray(z, dtype=np.float64)
    small = z < PHI_SERIES_Z
    zs = np.where(small, 1.0, z)
    direct = (-np.expm1(-zs) - zs * np.exp(-zs)) / zs**2
    series = 0.5 - z / 3 + z**2 / 8 - z**3 / 30 + z**4 / 144
    return np.where(small, series, direct)


def phi2(z):
    """(exp(-z) - 1 + z) / z^2, used by the ETD2 corrector."""
    z = np.asarray(z, dtype=np.float64)
    small = z < PHI_SERIES_Z
    zs = np.where(small, 1.0, z)
    direct = (np.expm1(-zs) + zs) / zs**2
    series = 0.5 - z / 6 + z**2 / 24 - z**3 / 120 + z**4 / 720
    return np.where(small, series, direct)


def interval_weights(h, xi2, order):
    """Exact integrals of exp(-(b - tau)|xi|^2) against the interpolation basis on [a, b].

    Returns (decay, w_left, w_right) with decay = exp(-h |xi|^2).
    """
    z = h * xi2
    decay = np.exp(-z)
    p1 = phi1(z)
    if order == 1:
        return decay, h * p1, np.zeros_like(p1)
    ps = psi_left(z)
    return decay, h * ps, h * (p1 - ps)


def duhamel_accumulate(knots, terms, xi2, order, until=None):
    """int_0^t exp(-(t - tau)|xi|^2) N(tau) dtau at every knot.

    ``terms`` is a callable m -> N(t_m) (raw array) so that nonlinear terms are
    evaluated lazily, one knot at a time.
    """
    last = len(knots) - 1 if until is None else until
    first = terms(0)
    out = np.zeros((last + 1,) + first.shape, dtype=np.complex128)
    prev = first
    for m in range(last):
        h = knots[m + 1] - knots[m]
        decay, wl, wr = interval_weights(h, xi2, order)
        nxt = terms(m + 1) if order == 2 or m + 1 < last else None
        incr = wl * prev if order == 1 else wl * prev + wr * nxt
        out[m + 1] = decay * out[m] + incr
        prev = nxt
    return out


def _check_trajectories(u_traj, v_traj):
    if u_traj.grid != v_traj.grid:
        raise GridMismatchError(f"grid mismatch: {u_traj.grid} vs {v_traj.grid}")
    if len(u_traj.knots) != len(v_traj.knots) or not np.allclose(u_traj.knots, v_traj.knots):
        raise GridMismatchError("trajectories do not share time knots")


def bilinear_coeffs(U, V, knots, grid, cfg, until=None):
    """B(u, v) at all knots (or up to index ``until``) for raw arrays (K, 3, n, n, n)."""
    symmetric = U is V

    def terms(m):
        return nonlinear_coeffs(U[m], V[m], grid, cfg.dealias, symmetric)

    return -duhamel_accumulate(knots, terms, grid.xi2, cfg.quad_order, until)


def bilinear_B_trajectory(
    u_traj: Trajectory, v_traj: Trajectory, cfg: BilinearConfig = BilinearConfig()
) -> Trajectory:
    """B(u, v)(t_m) at every knot."""
    _check_trajectories(u_traj, v_traj)
    U = u_traj.coeffs
    V = U if v_traj is u_traj else v_traj.coeffs
    return Trajectory(u_traj.grid, u_traj.knots, bilinear_coeffs(U, V, u_traj.knots, u_traj.grid, cfg))


def bilinear_B(
    u_traj: Trajectory, v_traj: Trajectory, t: float, cfg: BilinearConfig = BilinearConfig()
) -> SpectralVectorField:
    """B(u, v)(t) = -int_0^t S(t - tau) P div(u (x) v)(tau) dtau at a knot t."""
    _check_trajectories(u_traj, v_traj)
    m = u_traj.knot_index(t)
    U = u_traj.coeffs
    V = U if v_traj is u_traj else v_traj.coeffs
    out = bilinear_coeffs(U, V, u_traj.knots, u_traj.grid, cfg, until=m)
    return SpectralVectorField(u_traj.grid, out[m])


def bilinear_B_stationary(
    u: SpectralVectorField, v: SpectralVectorField, cfg: BilinearConfig = BilinearConfig()
) -> SpectralVectorField:
    """-|xi|^-2 P^(xi) i xi . (u (x) v)^(xi)."""
    _check_grids(u, v)
    grid = u.grid
    nl = nonlinear_coeffs(u.coeffs, v.coeffs, grid, cfg.dealias, u is v)
    return SpectralVectorField(grid, -grid.inv_xi2 * nl)


# --- |xi|^-2 * |xi|^-2 = pi^3 / |xi| ------------------------------------------


@dataclass(frozen=True)
class RieszCheck:
    xi: tuple
    lhs: float
    rhs: float
    rel_err: float
    tail_bound: float


def _log_kernel(s):
    return np.log(np.abs((1 + s) / (1 - s))) / s


def _radial_integral(S, n_quad):
    """int_0^S log|(1+s)/(1-s)| / s ds, split at the logarithmic singularity s = 1."""
    n = max(n_quad // 4, 16)
    x, w = roots_legendre(n)
    g = (x + 1) / 2
    total = 0.0
    upper = min(S, 1.0)
    # s = upper (1 - v^2): clusters nodes at s = 1
    s = upper * (1 - g**2)
    total += np.sum(w / 2 * _log_kernel(s) * upper * 2 * g)
    if S > 1:
        upper2 = min(S, 2.0)
        span = upper2 - 1.0
        s = 1 + span * g**2
        total += np.sum(w / 2 * _log_kernel(s) * span * 2 * g)
    if S > 2:
        m = max(n_quad - 2 * n, 16)
        x2, w2 = roots_legendre(m)
        lo, hi = np.log(2.0), np.log(S)
        y = lo + (hi - lo) * (x2 + 1) / 2
        s = np.exp(y)
        total += np.sum(w2 * (hi - lo) / 2 * _log_kernel(s) * s)
    return total


def riesz_convolution_check(xi_samples, R_max, n_quad):
    """Quadrature of int_{|z| < R_max} dz / (|xi - z|^2 |z|^2) against pi^3 / |xi|.

    After angular integration the integral equals
    (2 pi / |xi|) int_0^{R_max/|xi|} log|(1+s)/(1-s)| / s ds.
    The omitted tail is 2 pi / |xi| (2/S + 2/(9 S^3) + ...), S = R_max / |xi|.
    """
    out = []
    for xi in xi_samples:
        xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        r = float(np.linalg.norm(xi))
        if r == 0:
            raise ParameterError("riesz_convolution_check needs xi != 0")
        S = R_max / r
        lhs = 2 * np.pi / r * _radial_integral(S, n_quad)
        rhs = np.pi**3 / r
        tail = 2 * np.pi / r * (2 / S + 2 / (9 * S**3) + 2 / (25 * S**5) / (1 - 1 / S**2))
        out.append(RieszCheck(tuple(float(c) for c in xi), float(lhs), float(rhs), abs(lhs - rhs) / rhs, float(tail)))
    return out


def write_riesz_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["xi", "lhs", "rhs", "rel_err"])
        for row in rows:
            writer.writerow([" ".join(f"{c:.17g}" for c in row.xi), f"{row.lhs:.17g}", f"{row.rhs:.17g}", f"{row.rel_err:.17g}"])
