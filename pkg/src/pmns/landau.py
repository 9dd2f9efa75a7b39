"""Landau / Tian-Xin one-point singular stationary solutions.

For |c| > 1 and r = |x|, D = c r - x_1:

    u_1 = 2 (c r^2 - 2 x_1 r + c x_1^2) / (r D^2)
    u_j = 2 x_j (c x_1 - r) / (r D^2),  j = 2, 3
    p   = 4 (c x_1 - r) / (r D^2)

The u_1 numerator carries the factor 2 on the middle term.  In the sense of
distributions these fields are driven by the force (b(c) delta_0, 0, 0).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .errors import ParameterError, SingularPointError
from .grid import FrequencyGrid, SpectralVectorField, spectral_coeffs


@dataclass(frozen=True)
class LandauParams:
    c: float

    def __post_init__(self):
        if not np.isfinite(self.c) or abs(self.c) <= 1:
            raise ParameterError(f"Landau parameter needs |c| > 1, got {self.c}")
        object.__setattr__(self, "c", float(self.c))

    @property
    def b(self):
        return b_of_c(self.c)


@dataclass(frozen=True)
class LandauValue:
    u: np.ndarray
    p: float


def landau_fields(c, x):
    """Vectorised closed forms: x of shape (3, ...) -> (u (3, ...), p (...))."""
    x = np.asarray(x, dtype=np.float64)
    r = np.sqrt(np.sum(x * x, axis=0))
    D = c * r - x[0]
    num = c * x[0] - r
    p = 4 * num / (r * D * D)
    u = np.empty_like(x)
    u[0] = 2 * (c * r * r - 2 * x[0] * r + c * x[0] ** 2) / (r * D * D)
    u[1] = 2 * x[1] * num / (r * D * D)
    u[2] = 2 * x[2] * num / (r * D * D)
    return u, p


def landau_gradient(c, x):
    """Analytic gradient g[i, j] = d u_j / d x_i, shape (3, 3, ...).

    Uses u_j = p x_j / 2 + 2 delta_j1 / D.
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.sqrt(np.sum(x * x, axis=0))
    D = c * r - x[0]
    N = c * x[0] - r
    p = 4 * N / (r * D * D)
    dr = x / r
    dD = c * dr
    dD[0] = dD[0] - 1
    dN = -dr
    dN[0] = dN[0] + c
    dp = 4 * (dN / (r * D * D) - N * dr / (r * r * D * D) - 2 * N * dD / (r * D**3))
    g = 0.5 * dp[:, None] * x[None, :]
    for i in range(3):
        g[i, i] = g[i, i] + 0.5 * p
    g[:, 0] = g[:, 0] - 2 * dD / D**2
    return g


def landau_eval(params: LandauParams, x) -> LandauValue:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (3,):
        raise ParameterError("x must be a 3-vector")
    if not np.any(x):
        raise SingularPointError("Landau fields are singular at x = 0")
    u, p = landau_fields(params.c, x)
    return LandauValue(u, float(p))


# --- forcing amplitude ----------------------------------------------------------

_SERIES_TERMS = 14


def b_of_c(c: float) -> float:
    """b(c) = 4 pi (4c + 2c^2 log((c-1)/(c+1)) + 16c / (3(c^2 - 1))).

    For |c| >= 10 the cancelling terms are summed as the series
    4 pi sum_k (32k + 4) / (3(2k + 1)) c^-(2k-1).
    """
    c = float(c)
    if not np.isfinite(c) or abs(c) <= 1:
        raise ParameterError(f"b(c) needs |c| > 1, got {c}")
    x = 1.0 / c
    if abs(x) <= 0.1:
        k = np.arange(1, _SERIES_TERMS + 1)
        terms = (32 * k + 4) / (3 * (2 * k + 1)) * x ** (2 * k - 1)
        return float(4 * np.pi * np.sum(terms[::-1]))
    return float(4 * np.pi * (4 * c - 4 * c * c * np.arctanh(x) + 16 * c / (3 * (c * c - 1))))


def b_surface_integrand(c, s):
    d = c - s
    u1 = c + (c * c - 1) * (c / d**2 - 2 / d)
    return 2 * np.pi * 2 * (u1 * (1 + 2 * (c * c - 1) / d**2) - 2 / d)


def b_surface_quadrature(c: float, n_quad: int = 256) -> float:
    """Gauss-Legendre quadrature of the reduced unit-sphere flux integral over x_1 in [-1, 1]."""
    if abs(c) <= 1:
        raise ParameterError(f"needs |c| > 1, got {c}")
    if n_quad < 64:
        raise ParameterError("n_quad must be at least 64")
    s, w = roots_legendre(n_quad)
    return float(np.sum(w * b_surface_integrand(c, s)))


def c_of_b(b_target: float, branch: str = "positive") -> float:
    """Invert the strictly monotone map c -> b(c) on (1, inf) or (-inf, -1)."""
    if branch not in ("positive", "negative"):
        raise ParameterError("branch must be 'positive' or 'negative'")
    sign = 1.0 if branch == "positive" else -1.0
    target = sign * b_target
    if not np.isfinite(target) or target <= 0:
        raise ParameterError(f"b = {b_target} is outside the range of b on the {branch} branch")
    # b is odd, so solve b(c) = target on c > 1 and reflect.
    hi = 2.0
    while b_of_c(hi) > target:
        hi *= 2.0
        if hi > 1e300:
            raise ParameterError(f"b = {b_target} too small to invert")
    lo = 1.0 + 0.5
    while b_of_c(lo) < target:
        lo = 1.0 + (lo - 1.0) / 2.0
        if lo - 1.0 < 1e-15:
            raise ParameterError(f"b = {b_target} too large to invert")
    c = brentq(lambda t: b_of_c(t) - target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return sign * c


# --- weak formulation -------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """phi(x) = exp(1 - 1 / (1 - s^2)), s = |x - center| / radius < 1; phi(center) = 1."""

    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 1.0

    def value_and_gradient(self, x):
        x0 = np.asarray(self.center, dtype=np.float64).reshape((3,) + (1,) * (x.ndim - 1))
        d = x - x0
        s2 = np.sum(d * d, axis=0) / self.radius**2
        inside = s2 < 1
        ss = np.where(inside, s2, 0.5)
        phi = np.where(inside, np.exp(1 - 1 / (1 - ss)), 0.0)
        dphi = np.where(inside, -phi * 2 / (self.radius**2 * (1 - ss) ** 2), 0.0) * d
        return phi, dphi

    def value(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(3, 1)
        return float(self.value_and_gradient(x)[0][0])


@dataclass(frozen=True)
class WeakQuadrature:
    """Spherical-shell product rule around the origin (polar axis x_1).

    Gauss-Legendre in r on [rho, r_max] and in x_1 / r, trapezoid in azimuth;
    the excision radii are halved successively and Richardson-extrapolated
    assuming an error expansion in integer powers of rho.
    """

    n_r: int = 96
    n_mu: int = 96
    n_phi: int = 48
    rho0: float = 0.1
    levels: int = 3


@dataclass(frozen=True)
class WeakFormResult:
    momentum: np.ndarray
    divergence: float
    phi0: float
    rhos: tuple
    raw_momentum: np.ndarray = field(repr=False)


def _shell_pairings(c, bump, rho, quad):
    center = np.asarray(bump.center, dtype=np.float64)
    r_lo = max(rho, np.linalg.norm(center) - bump.radius)
    r_hi = np.linalg.norm(center) + bump.radius
    if r_hi <= r_lo:
        return np.zeros(3), 0.0
    xr, wr = roots_legendre(quad.n_r)
    r = r_lo + (r_hi - r_lo) * (xr + 1) / 2
    wr = wr * (r_hi - r_lo) / 2
    mu, wm = roots_legendre(quad.n_mu)
    az = np.arange(quad.n_phi) * 2 * np.pi / quad.n_phi
    R, M, A = np.meshgrid(r, mu, az, indexing="ij")
    S = np.sqrt(1 - M * M)
    X = np.array([R * M, R * S * np.cos(A), R * S * np.sin(A)])
    W = (wr * r * r)[:, None, None] * wm[None, :, None] * (2 * np.pi / quad.n_phi)
    u, p = landau_fields(c, X)
    g = landau_gradient(c, X)
    _, dphi = bump.value_and_gradient(X)
    u_dphi = np.sum(u * dphi, axis=0)
    mom = np.empty(3)
    for k in range(3):
        integrand = np.sum(g[:, k] * dphi, axis=0) - u[k] * u_dphi - p * dphi[k]
        mom[k] = np.sum(W * integrand)
    return mom, float(np.sum(W * u_dphi))


def _richardson(values, ratio=2.0):
    """Eliminate error terms rho^1, rho^2, ... from values at rho, rho/ratio, ..."""
    table = [np.asarray(v, dtype=np.float64) for v in values]
    power = 1
    while len(table) > 1:
        f = ratio**power
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
        power += 1
    return table[0]


def weak_form_residual(c: float, phi: Bump = Bump(), quad: WeakQuadrature = WeakQuadrature()) -> WeakFormResult:
    """Momentum pairings int (grad u_k . grad phi - u_k u . grad phi - p d_k phi) dx
    and the divergence pairing int u . grad phi dx.

    The ball |x| < rho is excised and the limit rho -> 0 is taken by Richardson
    extrapolation over rho0, rho0/2, ...
    """
    LandauParams(c)
    rhos = tuple(quad.rho0 / 2**i for i in range(quad.levels))
    moms, divs = [], []
    for rho in rhos:
        m, d = _shell_pairings(c, phi, rho, quad)
        moms.append(m)
        divs.append(d)
    momentum = _richardson(moms)
    divergence = float(_richardson(divs))
    phi0 = phi.value(np.zeros(3))
    return WeakFormResult(momentum, divergence, phi0, rhos, np.array(moms))


@dataclass(frozen=True)
class PointwiseResidual:
    momentum: np.ndarray
    divergence: float


def pointwise_residual(c: float, x, h: float) -> PointwiseResidual:
    """Central differences of -Lap u + (u . grad) u + grad p and div u at x != 0."""
    x = np.asarray(x, dtype=np.float64)
    if not np.any(x):
        raise SingularPointError("pointwise residual is undefined at x = 0")
    LandauParams(c)
    u0, _ = landau_fields(c, x)
    lap = np.zeros(3)
    adv = np.zeros(3)
    gp = np.zeros(3)
    div = 0.0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        up, pp = landau_fields(c, x + e)
        um, pm = landau_fields(c, x - e)
        lap += (up - 2 * u0 + um) / h**2
        adv += u0[i] * (up - um) / (2 * h)
        gp[i] = (pp - pm) / (2 * h)
        div += (up[i] - um[i]) / (2 * h)
    return PointwiseResidual(-lap + adv + gp, float(div))


# --- spectral surrogate -----------------------------------------------------


def landau_sample_spectral(params: LandauParams, grid: FrequencyGrid) -> SpectralVectorField:
    """Band-limited surrogate of the Landau velocity on ``grid``.

    The field is sampled on the dual spatial grid; at the origin node the value
    is replaced by the mean over the eight neighbouring cell centres
    (+-h/2, +-h/2, +-h/2).  The result is flagged approximate.
    """
    x = grid.x.copy()
    x[:, 0, 0, 0] = grid.spacing  # placeholder, overwritten below
    u, _ = landau_fields(params.c, x)
    h2 = grid.spacing / 2
    corners = np.array(np.meshgrid([-h2, h2], [-h2, h2], [-h2, h2], indexing="ij")).reshape(3, -1)
    u_corner, _ = landau_fields(params.c, corners)
    u[:, 0, 0, 0] = np.mean(u_corner, axis=1)
    return SpectralVectorField(grid, spectral_coeffs(u, grid), approximate=True)


def landau_report(c: float, n_quad: int = 256, quad: WeakQuadrature = WeakQuadrature()):
    """Verification summary for one Landau parameter."""
    b = b_of_c(c)
    bq = b_surface_quadrature(c, n_quad)
    weak = weak_form_residual(c, Bump(), quad)
    points = [(1.0, 0.5, -0.3), (-0.7, 0.2, 0.9), (0.3, -1.1, 0.4), (2.0, 1.0, 1.0), (-1.5, -0.5, 0.25)]
    hs = (4e-3, 2e-3, 1e-3)
    summary = []
    for pt in points:
        errs = [float(np.linalg.norm(pointwise_residual(c, pt, h).momentum)) for h in hs]
        order = float(np.log2(errs[-2] / errs[-1]))
        summary.append({"x": list(pt), "h": list(hs), "momentum_norm": errs, "order": order})
    return {
        "c": float(c),
        "b_closed_form": b,
        "b_quadrature": bq,
        "weak_residuals": {
            "momentum": [float(v) for v in weak.momentum],
            "divergence": weak.divergence,
            "phi0": weak.phi0,
            "b_phi0": b * weak.phi0,
        },
        "pointwise_residual_summary": summary,
    }
