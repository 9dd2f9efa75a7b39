"""PM^a norms, weighted trajectory seminorms and the L^q / Besov diagnostics.

The essential supremum becomes a lattice maximum over xi != 0; vector fields
use the componentwise maximum.  Discrete L^q norms use the rectangle rule on
the dual spatial grid.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .errors import ParameterError
from .grid import FrequencyGrid, SpectralVectorField, Trajectory, physical_values


@dataclass(frozen=True)
class PMNormReport:
    a: float
    value: float
    argmax_xi: tuple
    grid: FrequencyGrid

    def to_dict(self):
        return {
            "a": self.a,
            "value": self.value,
            "argmax_xi": list(self.argmax_xi),
            "grid": self.grid.to_dict(),
        }


@dataclass(frozen=True)
class TrajectorySeminorm:
    a: float
    value: float
    t_argmax: float


@dataclass(frozen=True)
class InterpolationCheck:
    lhs_lq: float
    rhs_bound: float
    beta: float
    constant: float


def _weight(grid, a):
    w = np.zeros(grid.shape)
    w[grid.active] = grid.xi_abs[grid.active] ** a
    return w


def pm_values(coeffs, grid, a):
    """PM^a norm of raw arrays (..., 3, n, n, n), reduced over the last 4 axes."""
    weighted = np.abs(coeffs) * _weight(grid, a)
    return np.max(weighted, axis=(-4, -3, -2, -1))


def _check_a(a):
    if not 0 <= a < 3:
        raise ParameterError(f"PM^a needs 0 <= a < 3, got {a}")


def pm_norm(f: SpectralVectorField, a: float) -> PMNormReport:
    """max over lattice xi != 0 and components of |xi|^a |f^_j(xi)|."""
    _check_a(a)
    weighted = np.max(np.abs(f.coeffs) * _weight(f.grid, a), axis=0)
    idx = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
    value = float(weighted[idx])
    argmax = tuple(float(f.grid.xi[j][idx]) for j in range(3))
    return PMNormReport(float(a), value, argmax, f.grid)


def trajectory_seminorm(traj: Trajectory, a: float) -> TrajectorySeminorm:
    """sup over stored knots t > 0 of t^(a/2 - 1) ||u(t)||_PM^a."""
    if not 2 <= a < 3:
        raise ParameterError(f"trajectory seminorm needs 2 <= a < 3, got {a}")
    pos = traj.knots > 0
    if not np.any(pos):
        raise ParameterError("trajectory has no samples with t > 0")
    t = traj.knots[pos]
    curve = t ** (a / 2 - 1) * pm_values(traj.coeffs[pos], traj.grid, a)
    i = int(np.argmax(curve))
    return TrajectorySeminorm(float(a), float(curve[i]), float(t[i]))


def lq_norm(values, grid, q):
    """Componentwise-max discrete L^q norm of physical values (3, n, n, n)."""
    if np.isinf(q):
        return float(np.max(np.abs(values)))
    h3 = grid.spacing**3
    per_component = (h3 * np.sum(np.abs(values) ** q, axis=(1, 2, 3))) ** (1.0 / q)
    return float(np.max(per_component))


def hausdorff_young_constant(q):
    """C with ||f||_q <= C ||f^||_p (1/p + 1/q = 1, q >= 2), unitary convention.

    Riesz-Thorin between ||f||_inf <= (2 pi)^(-3/2) ||f^||_1 and Plancherel.
    """
    if np.isinf(q):
        return (2 * np.pi) ** -1.5
    return (2 * np.pi) ** (-1.5 * (1 - 2 / q))


def interpolation_exponent(a, q):
    """(1 - 3/q) / (a - 2); the power carried by the PM^a norm in the bound."""
    return (1 - 3 / q) / (a - 2)


def interpolation_bound(norm2, norma, a, q):
    """Optimised two-piece Hausdorff-Young bound on ||v||_q.

    ||v^||_p^p <= A R^(3-2p) + B R^(3-ap) with A = 4 pi ||v||_2^p / (3 - 2p)
    and B = 4 pi ||v||_a^p / (ap - 3), minimised over R > 0.
    """
    if norm2 == 0.0 or norma == 0.0:
        return 0.0
    p = q / (q - 1)
    alpha, gam = 3 - 2 * p, a * p - 3
    A = 4 * np.pi * norm2**p / alpha
    B = 4 * np.pi * norma**p / gam
    R = (gam * B / (alpha * A)) ** (1 / (alpha + gam))
    best = A * R**alpha + B * R ** (-gam)
    return hausdorff_young_constant(q) * best ** (1 / p)


def _check_wedge(a, q):
    if not 2 < a < 3:
        raise ParameterError(f"interpolation needs 2 < a < 3, got a = {a}")
    if not 3 < q < 3 / (3 - a):
        raise ParameterError(f"interpolation needs 3 < q < {3 / (3 - a):.6g}, got q = {q}")


def interpolation_check(f: SpectralVectorField, a: float, q: float) -> InterpolationCheck:
    """Compare ||f||_L^q with C ||f||_PM2^(1-beta) ||f||_PMa^beta."""
    _check_wedge(a, q)
    beta = interpolation_exponent(a, q)
    lhs = lq_norm(physical_values(f.coeffs, f.grid), f.grid, q)
    n2 = float(pm_values(f.coeffs, f.grid, 2))
    na = float(pm_values(f.coeffs, f.grid, a))
    rhs = interpolation_bound(n2, na, a, q)
    const = rhs / (n2 ** (1 - beta) * na**beta) if rhs > 0 else interpolation_bound(1.0, 1.0, a, q)
    return InterpolationCheck(lhs, rhs, beta, const)


def besov_embedding_constant(p):
    """C(p) in sup_t t^((1-3/p)/2) ||S(t) u0||_p <= C(p) ||u0||_PM2, p in (3, inf].

    C(p) = C_HY * (int exp(-q|w|^2) |w|^(-2q) dw)^(1/q) with q the conjugate of p;
    the radial integral is 2 pi Gamma((3 - 2q)/2) q^(-(3 - 2q)/2).
    """
    if not p > 3:
        raise ParameterError(f"Besov embedding needs p > 3, got {p}")
    q = 1.0 if np.isinf(p) else p / (p - 1)
    s = (3 - 2 * q) / 2
    integral = 2 * np.pi * gamma(s) * q ** (-s)
    return hausdorff_young_constant(p) * integral ** (1 / q)


def besov_heat_norm(f: SpectralVectorField, p: float, t_samples) -> float:
    """max over samples of t^((1-3/p)/2) ||S(t) f||_L^p."""
    if not p > 3:
        raise ParameterError(f"besov_heat_norm needs p > 3, got {p}")
    t_samples = np.asarray(t_samples, dtype=np.float64)
    if t_samples.size == 0:
        raise ParameterError("t_samples must be non-empty")
    if np.any(t_samples <= 0):
        raise ParameterError("t_samples must be positive")
    alpha = 1 - 3 / p
    best = 0.0
    for t in t_samples:
        vals = physical_values(f.coeffs * np.exp(-t * f.grid.xi2), f.grid)
        best = max(best, t ** (alpha / 2) * lq_norm(vals, f.grid, p))
    return best
