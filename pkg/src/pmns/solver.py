"""Mild solutions by Picard iteration over whole stored trajectories.

The evolution problem is solved as the fixed point x = y + B(x, x) in the
space of knot-sampled trajectories with the sup-over-knots PM^2 distance; the
stationary problem uses the time-independent analogue.  An explicit ETD2
march serves as an independent cross-check.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .duhamel import (
    BilinearConfig,
    bilinear_coeffs,
    duhamel_accumulate,
    eta_constant,
    nonlinear_coeffs,
    phi1,
    phi2,
)
from .errors import (
    ConvergenceError,
    GridMismatchError,
    KnotError,
    ParameterError,
    SmallnessError,
    StepRejectedError,
)
from .grid import FOURIER_NORM, FrequencyGrid, SpectralVectorField, Trajectory, check_knots, dyadic_rescale, dyadic_support
from .norms import pm_norm, pm_values
from .symbols import project

DIVERGENCE_RTOL = 1e-12
BLOWUP_FACTOR = 1e6


# --- forces ----------------------------------------------------------------


@dataclass(frozen=True)
class ForceSpec:
    """One of: zero, dirac(amplitude), fixed_field(field), sampled(trajectory)."""

    variant: str = "zero"
    amplitude: Optional[tuple] = None
    field: Optional[SpectralVectorField] = None
    trajectory: Optional[Trajectory] = None

    def __post_init__(self):
        if self.variant not in ("zero", "dirac", "fixed_field", "sampled"):
            raise ParameterError(f"unknown force variant {self.variant!r}")
        if self.variant == "dirac":
            amp = np.asarray(self.amplitude, dtype=np.float64)
            if amp.shape != (3,) or not np.all(np.isfinite(amp)):
                raise ParameterError("dirac amplitude must be a finite 3-vector")
            object.__setattr__(self, "amplitude", tuple(float(v) for v in amp))
        if self.variant == "fixed_field" and self.field is None:
            raise ParameterError("fixed_field force needs a field")
        if self.variant == "sampled" and self.trajectory is None:
            raise ParameterError("sampled force needs a trajectory")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def dirac(cls, b):
        return cls("dirac", amplitude=tuple(b))

    @classmethod
    def fixed(cls, f: SpectralVectorField):
        return cls("fixed_field", field=f)

    @classmethod
    def sampled(cls, traj: Trajectory):
        return cls("sampled", trajectory=traj)

    @property
    def time_independent(self):
        return self.variant != "sampled"

    def spectrum(self, grid: FrequencyGrid):
        """F^ as a raw (3, n, n, n) array for time-independent forces."""
        if self.variant == "zero":
            return np.zeros((3,) + grid.shape, dtype=np.complex128)
        if self.variant == "dirac":
            amp = np.asarray(self.amplitude)[:, None, None, None]
            return np.where(grid.active, FOURIER_NORM * amp, 0.0).astype(np.complex128)
        if self.variant == "fixed_field":
            if self.field.grid != grid:
                raise GridMismatchError("force field lives on a different grid")
            return self.field.coeffs
        raise ParameterError("sampled force has no single spectrum")

    def samples(self, grid: FrequencyGrid, knots):
        """F^ at each knot, shape (K, 3, n, n, n)."""
        if self.variant == "sampled":
            tr = self.trajectory
            if tr.grid != grid:
                raise GridMismatchError("force trajectory lives on a different grid")
            if len(tr.knots) != len(knots) or not np.allclose(tr.knots, knots, rtol=1e-12, atol=0):
                raise KnotError("sampled force must share the solver knots")
            return tr.coeffs
        spec = self.spectrum(grid)
        return np.broadcast_to(spec, (len(knots),) + spec.shape)

    def pm_norm(self, grid: FrequencyGrid, knots=None, a=0.0):
        """sup over knots of ||F(t)||_PM^a (PM^0 by default)."""
        if self.variant == "sampled":
            return float(np.max(pm_values(self.samples(grid, knots), grid, a)))
        return float(pm_values(self.spectrum(grid), grid, a))

    def describe(self):
        out = {"variant": self.variant}
        if self.variant == "dirac":
            out["amplitude"] = list(self.amplitude)
        return out


# --- configuration and reports ---------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    eta: Optional[float] = None
    max_iter: int = 200
    tol: float = 1e-10
    bilinear: BilinearConfig = BilinearConfig()
    use_paper_eta: bool = False

    def __post_init__(self):
        if self.eta is None:
            const = eta_constant()
            eta = const.eta_paper if self.use_paper_eta else const.eta_effective
            object.__setattr__(self, "eta", float(eta))
        if not self.eta > 0:
            raise ParameterError("eta must be positive")
        if not 0 < self.epsilon < 1 / (4 * self.eta):
            raise ParameterError(
                f"epsilon must lie in (0, 1/(4 eta)) = (0, {1 / (4 * self.eta):.6g}), got {self.epsilon}"
            )
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")

    @property
    def contraction_bound(self):
        return 4 * self.eta * self.epsilon

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "eta": self.eta,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "dealias": self.bilinear.dealias,
            "quad_order": self.bilinear.quad_order,
            "use_paper_eta": self.use_paper_eta,
        }


@dataclass
class PicardReport:
    iterates: int
    final_residual: float
    ball_radius: float
    contraction_ratios: list
    converged: bool = True
    data_norm: float = 0.0
    distances: list = field(default_factory=list)

    def to_dict(self):
        return {
            "iterates": self.iterates,
            "final_residual": self.final_residual,
            "ball_radius": self.ball_radius,
            "contraction_ratios": list(self.contraction_ratios),
            "converged": self.converged,
            "data_norm": self.data_norm,
            "distances": list(self.distances),
        }


@dataclass(frozen=True)
class PicardResult:
    solution: Trajectory
    report: PicardReport
    y: Trajectory


@dataclass(frozen=True)
class StationaryResult:
    solution: SpectralVectorField
    report: PicardReport
    y: SpectralVectorField


# --- linear part -----------------------------------------------------------


def _divergence_free(u0: SpectralVectorField):
    div = np.abs(np.sum(u0.grid.xi * u0.coeffs, axis=0))
    scale = float(np.max(np.abs(u0.coeffs) * u0.grid.xi_abs)) if np.any(u0.coeffs) else 0.0
    if float(np.max(div)) > DIVERGENCE_RTOL * max(scale, 1e-300):
        warnings.warn("initial data is not divergence-free; applying the Leray projection", stacklevel=3)
        return project(u0.coeffs, u0.grid)
    return u0.coeffs


def assemble_y(u0: SpectralVectorField, F: ForceSpec, knots) -> Trajectory:
    """y(t) = S(t) u0 + int_0^t S(t - tau) P F(tau) dtau at every knot."""
    knots = check_knots(knots)
    grid = u0.grid
    c0 = _divergence_free(u0)
    t = knots[:, None, None, None, None]
    out = np.exp(-t * grid.xi2) * c0
    if F.variant == "zero":
        pass
    elif F.time_independent:
        pf = project(F.spectrum(grid), grid)
        # (1 - exp(-t|xi|^2)) / |xi|^2 = t phi1(t |xi|^2)
        out = out + t * phi1(t * grid.xi2) * pf
    else:
        pf = project(F.samples(grid, knots), grid)
        out = out + duhamel_accumulate(knots, lambda m: pf[m], grid.xi2, 2)
    out = np.where(grid.active, out, 0.0)
    return Trajectory(grid, knots, out)


def sup_pm2(coeffs, grid):
    """sup over knots of the PM^2 norm of raw (K, 3, n, n, n) data."""
    return float(np.max(pm_values(coeffs, grid, 2)))


def data_norm(u0: SpectralVectorField, F: ForceSpec, knots=None):
    return pm_norm(u0, 2).value + F.pm_norm(u0.grid, knots)


def _ratio_floor(scale):
    return 1e4 * np.finfo(float).eps * max(scale, 1e-300)


def _iterate(step, x, distance, norm_of, cfg, data, label):
    """Banach iteration x <- step(x) with diagnostics shared by both solvers."""
    distances, ratios = [], []
    scale = max(data, norm_of(x))
    for k in range(1, cfg.max_iter + 1):
        x_new = step(x)
        d = distance(x_new, x)
        distances.append(d)
        radius = norm_of(x_new)
        if not np.isfinite(d) or not np.isfinite(radius) or radius > BLOWUP_FACTOR * max(scale, 1e-300):
            report = PicardReport(k, d, radius, ratios, False, data, distances)
            raise ConvergenceError(f"{label} diverged after {k} iterations", report)
        if len(distances) > 1 and distances[-2] > _ratio_floor(scale):
            ratios.append(d / distances[-2])
        x = x_new
        if d < cfg.tol:
            return x, PicardReport(k, d, radius, ratios, True, data, distances)
    report = PicardReport(cfg.max_iter, distances[-1], norm_of(x), ratios, False, data, distances)
    raise ConvergenceError(f"{label} did not converge within {cfg.max_iter} iterations", report)


def picard_solve(
    u0: SpectralVectorField,
    F: ForceSpec,
    knots,
    cfg: SolverConfig,
    initial: Optional[Trajectory] = None,
    enforce_smallness: bool = True,
) -> PicardResult:
    """Fixed point of x = y + B(x, x) on the knot trajectory.

    The iteration starts from y unless ``initial`` is given and stops once the
    sup-over-knots PM^2 distance between successive iterates drops below tol.
    """
    knots = check_knots(knots)
    grid = u0.grid
    data = data_norm(u0, F, knots)
    if enforce_smallness and data > cfg.epsilon:
        raise SmallnessError(
            f"data norm {data:.6g} exceeds epsilon {cfg.epsilon:.6g} (1/(4 eta) = {1 / (4 * cfg.eta):.6g})",
            data,
            cfg.epsilon,
        )
    y = assemble_y(u0, F, knots)
    Y = y.coeffs
    if initial is not None:
        if initial.grid != grid or len(initial.knots) != len(knots) or not np.allclose(initial.knots, knots):
            raise GridMismatchError("initial iterate must share grid and knots")
        x0 = initial.coeffs
    else:
        x0 = Y

    def step(X):
        return Y + bilinear_coeffs(X, X, knots, grid, cfg.bilinear)

    def distance(a, b):
        return sup_pm2(a - b, grid)

    X, report = _iterate(step, x0, distance, lambda X: sup_pm2(X, grid), cfg, data, "Picard iteration")
    return PicardResult(Trajectory(grid, knots, X), report, y)


def mild_residual(solution: Trajectory, y: Trajectory, cfg: SolverConfig) -> float:
    """sup over knots of ||x - y - B(x, x)||_PM2."""
    X = solution.coeffs
    r = X - y.coeffs - bilinear_coeffs(X, X, solution.knots, solution.grid, cfg.bilinear)
    return sup_pm2(r, solution.grid)


def stationary_solve(
    F: ForceSpec,
    cfg: SolverConfig,
    grid: Optional[FrequencyGrid] = None,
    enforce_smallness: bool = True,
) -> StationaryResult:
    """Fixed point of u = y_inf + B_stationary(u, u) with y_inf^ = |xi|^-2 P^ F^."""
    if not F.time_independent:
        raise ParameterError("stationary_solve needs a time-independent force")
    if grid is None:
        if F.variant != "fixed_field":
            raise ParameterError("a grid is required for zero or dirac forces")
        grid = F.field.grid
    data = F.pm_norm(grid)
    if enforce_smallness and data >= cfg.epsilon:
        raise SmallnessError(f"force norm {data:.6g} is not below epsilon {cfg.epsilon:.6g}", data, cfg.epsilon)
    Y = grid.inv_xi2 * project(F.spectrum(grid), grid)

    def step(u):
        return Y - grid.inv_xi2 * nonlinear_coeffs(u, u, grid, cfg.bilinear.dealias, symmetric=True)

    def norm_of(u):
        return float(pm_values(u, grid, 2))

    u, report = _iterate(step, Y, lambda a, b: norm_of(a - b), norm_of, cfg, data, "stationary iteration")
    return StationaryResult(SpectralVectorField(grid, u), report, SpectralVectorField(grid, Y))


# --- self-similarity -------------------------------------------------------


@dataclass(frozen=True)
class SelfSimilarCheck:
    max_deviation: float
    per_time: list
    pm2_norms: list
    pm2_variation: float


def self_similar_check(u0: SpectralVectorField, traj: Trajectory, band: Optional[np.ndarray] = None) -> SelfSimilarCheck:
    """Compare u(t) with the dyadic rescaling 2 u(2x, 4t) on knot pairs (t, 4t).

    Deviations are relative PM^2 distances restricted to ``band`` (default:
    modes inside the dealiasing band where the rescaling is defined).
    """
    grid = traj.grid
    if u0.grid != grid:
        raise GridMismatchError("u0 and trajectory grids differ")
    if band is None:
        band = grid.dealias_mask & dyadic_support(grid, 2)
    w = np.where(band & grid.active, grid.xi2, 0.0)
    pairs = []
    for i, t in enumerate(traj.knots):
        if t <= 0:
            continue
        j = np.flatnonzero(np.isclose(traj.knots, 4 * t, rtol=1e-10, atol=0))
        if len(j):
            pairs.append((i, int(j[0])))
    if not pairs:
        raise KnotError("trajectory has no knot pairs (t, 4t)")
    per_time = []
    for i, j in pairs:
        ui = traj.coeffs[i]
        scaled = dyadic_rescale(traj.field(j), 2).coeffs
        dev = float(np.max(w * np.abs(scaled - ui)))
        ref = float(np.max(w * np.abs(ui)))
        per_time.append((float(traj.knots[i]), dev / ref if ref > 0 else 0.0))
    norms = [(float(t), float(v)) for t, v in zip(traj.knots, pm_values(traj.coeffs, grid, 2)) if t > 0]
    vals = np.array([v for _, v in norms])
    variation = float((vals.max() - vals.min()) / vals.max()) if vals.max() > 0 else 0.0
    return SelfSimilarCheck(max(d for _, d in per_time), per_time, norms, variation)


# --- ETD2 cross-check ------------------------------------------------------


def etd_cross_check(
    u0: SpectralVectorField,
    F: ForceSpec,
    knots,
    cfg: SolverConfig,
    substeps: int = 1,
    nonlinear: bool = True,
    error_budget: Optional[float] = None,
) -> Trajectory:
    """Second-order exponential time differencing (Cox-Matthews ETD2RK).

    Each knot interval is split into ``substeps`` equal steps.  The local
    error estimate is the PM^2 size of the corrector; a step is rejected with
    StepRejectedError when it exceeds ``error_budget`` (default epsilon).
    """
    knots = check_knots(knots)
    if not F.time_independent:
        raise ParameterError("the ETD cross-check supports time-independent forces only")
    if substeps < 1:
        raise ParameterError("substeps must be positive")
    budget = cfg.epsilon if error_budget is None else error_budget
    grid = u0.grid
    pf = project(F.spectrum(grid), grid)

    def N(u):
        out = pf
        if nonlinear:
            out = out - nonlinear_coeffs(u, u, grid, cfg.bilinear.dealias, symmetric=True)
        return out

    u = np.where(grid.active, _divergence_free(u0), 0.0)
    out = [u]
    for m in range(len(knots) - 1):
        h = (knots[m + 1] - knots[m]) / substeps
        z = h * grid.xi2
        decay, w1, w2 = np.exp(-z), h * phi1(z), h * phi2(z)
        for _ in range(substeps):
            nu = N(u)
            a = decay * u + w1 * nu
            corr = w2 * (N(a) - nu)
            est = float(pm_values(corr, grid, 2))
            if not est <= budget:
                raise StepRejectedError(f"local error estimate {est:.3g} exceeds budget {budget:.3g} at t = {knots[m]:.6g}")
            u = a + corr
        out.append(u)
    return Trajectory(grid, knots, np.stack(out))
