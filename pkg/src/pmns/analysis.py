"""Experiment drivers: asymptotic stability, regularization with L^q decay, and
the loss-of-smoothness scan along Landau data."""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConvergenceError, ParameterError
from .grid import FrequencyGrid, SpectralVectorField, check_knots, physical_values
from .landau import LandauParams, landau_sample_spectral
from .norms import (
    _check_wedge,
    interpolation_bound,
    interpolation_exponent,
    lq_norm,
    pm_norm,
    pm_values,
)
from .solver import ForceSpec, SolverConfig, picard_solve
from .symbols import project


# --- asymptotic stability --------------------------------------------------


@dataclass
class StabilityReport:
    times: list
    diff_pm2: list
    linear_part: list
    eventually_decreasing: bool
    decayed: bool
    final_over_initial: float
    diagnostic_bound: float
    inequality_violations: list = field(default_factory=list)

    def to_dict(self):
        return {
            "times": list(self.times),
            "diff_pm2": list(self.diff_pm2),
            "linear_part": list(self.linear_part),
            "eventually_decreasing": self.eventually_decreasing,
            "decayed": self.decayed,
            "final_over_initial": self.final_over_initial,
            "diagnostic_bound": self.diagnostic_bound,
            "inequality_violations": list(self.inequality_violations),
        }


def stability_diagnostic(eta, epsilon, delta=0.5):
    """4 epsilon eta (exp(-1) log(1/(1 - delta)) + 1), which the decay argument needs below 1."""
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    return 4 * epsilon * eta * (np.exp(-1) * np.log(1 / (1 - delta)) + 1)


def _eventually_decreasing(times, values):
    times, values = np.asarray(times), np.asarray(values)
    last = values[times >= times[-1] / 10]
    if len(last) < 2:
        return bool(values[-1] <= values[0])
    slack = 1e-12 * max(float(np.max(values)), 1e-300)
    return bool(np.all(np.diff(last) <= slack))


def stability_experiment(
    u0: SpectralVectorField,
    v0: SpectralVectorField,
    F: ForceSpec,
    G: ForceSpec,
    knots,
    cfg: SolverConfig,
    delta: float = 0.5,
) -> StabilityReport:
    """Solve from (u0, F) and (v0, G) and compare the solutions knot by knot."""
    knots = check_knots(knots)
    ru = picard_solve(u0, F, knots, cfg)
    rv = picard_solve(v0, G, knots, cfg)
    grid = u0.grid
    diff = pm_values(ru.solution.coeffs - rv.solution.coeffs, grid, 2)
    lin = pm_values(ru.y.coeffs - rv.y.coeffs, grid, 2)
    factor = 1 / (1 - 4 * cfg.eta * cfg.epsilon)
    violations = [float(t) for t, d, l in zip(knots, diff, lin) if d > l * factor + cfg.tol]
    first = float(diff[0])
    ratio = float(diff[-1] / first) if first > 0 else 0.0
    return StabilityReport(
        times=[float(t) for t in knots],
        diff_pm2=[float(v) for v in diff],
        linear_part=[float(v) for v in lin],
        eventually_decreasing=_eventually_decreasing(knots, diff),
        decayed=bool(first == 0.0 or ratio < 0.1),
        final_over_initial=ratio,
        diagnostic_bound=float(stability_diagnostic(cfg.eta, cfg.epsilon, delta)),
        inequality_violations=violations,
    )


# --- regularization --------------------------------------------------------


@dataclass
class RegularizationReport:
    a: float
    times: list
    weighted_norm_curve: list
    sup_value: float
    bounded: bool
    q: Optional[float] = None
    lq_curve: list = field(default_factory=list)
    lq_bound: Optional[float] = None
    force_weighted_norm: float = 0.0

    def to_dict(self):
        return {
            "a": self.a,
            "times": list(self.times),
            "weighted_norm_curve": list(self.weighted_norm_curve),
            "sup_value": self.sup_value,
            "bounded": self.bounded,
            "q": self.q,
            "lq_curve": list(self.lq_curve),
            "lq_bound": self.lq_bound,
            "force_weighted_norm": self.force_weighted_norm,
        }


def force_weighted_norm(F: ForceSpec, a, grid, knots):
    """sup over t > 0 of t^(a/2 - 1) ||F(t)||_PM^(a-2).

    A nonzero time-independent force makes this infinite for a > 2.
    """
    if F.variant == "zero":
        return 0.0
    if F.time_independent:
        norm = F.pm_norm(grid, a=a - 2)
        if a == 2 or norm == 0.0:
            return norm
        return float("inf")
    knots = np.asarray(knots)
    pos = knots > 0
    vals = pm_values(F.samples(grid, knots)[pos], grid, a - 2)
    return float(np.max(knots[pos] ** (a / 2 - 1) * vals))


def regularization_experiment(
    u0: SpectralVectorField,
    F: ForceSpec,
    a: float,
    q: Optional[float],
    knots,
    cfg: SolverConfig,
    rtol: float = 0.05,
) -> RegularizationReport:
    """Weighted PM^a curve t^(a/2-1) ||u(t)||_PM^a and, for a > 2, the L^q curve
    t^((1-3/q)/2) ||u(t)||_q with its interpolation bound."""
    if not 2 <= a < 3:
        raise ParameterError(f"a must lie in [2, 3), got {a}")
    if q is not None:
        _check_wedge(a, q)
    knots = check_knots(knots)
    grid = u0.grid
    fw = force_weighted_norm(F, a, grid, knots)
    if not np.isfinite(fw):
        raise ParameterError(f"force is not admissible for a = {a}: sup t^(a/2-1)||F||_PM^(a-2) is infinite")
    res = picard_solve(u0, F, knots, cfg)
    pos = knots > 0
    t = knots[pos]
    X = res.solution.coeffs[pos]
    curve = t ** (a / 2 - 1) * pm_values(X, grid, a)
    sup_value = float(np.max(curve))
    report = RegularizationReport(
        a=float(a),
        times=[float(v) for v in t],
        weighted_norm_curve=[float(v) for v in curve],
        sup_value=sup_value,
        bounded=bool(sup_value <= 2 * cfg.epsilon * (1 + rtol)),
        force_weighted_norm=fw,
    )
    if q is not None:
        alpha = (1 - 3 / q) / 2
        lq = np.array([lq_norm(physical_values(x, grid), grid, q) for x in X])
        report.q = float(q)
        report.lq_curve = [float(v) for v in t**alpha * lq]
        sup2 = float(np.max(pm_values(X, grid, 2)))
        report.lq_bound = float(interpolation_bound(sup2, sup_value, a, q))
    return report


# --- loss of smoothness ------------------------------------------------------


@dataclass
class ScanRecord:
    epsilon: float
    converged: bool
    ball_radius: float
    residual: float
    iterates: int
    data_norm: float
    ratios: list = field(default_factory=list)

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "converged": self.converged,
            "ball_radius": self.ball_radius,
            "residual": self.residual,
            "iterates": self.iterates,
            "data_norm": self.data_norm,
            "ratios": list(self.ratios),
        }


def loss_of_smoothness_scan(c: float, epsilons, grid: FrequencyGrid, cfg: SolverConfig, knots=None):
    """Picard runs from eps * (projected Landau sample) with F = 0, one per eps.

    Smallness is not enforced; failures to converge are recorded, not raised.
    """
    eps_list = [float(e) for e in epsilons]
    if any(e < 0 for e in eps_list) or any(b < a for a, b in zip(eps_list, eps_list[1:])):
        raise ParameterError("epsilons must be non-negative and sorted increasing")
    if knots is None:
        knots = np.concatenate([[0.0], np.logspace(-3, 1, 25)])
    base = landau_sample_spectral(LandauParams(c), grid)
    base = SpectralVectorField(grid, project(base.coeffs, grid), approximate=True)
    records = []
    for eps in eps_list:
        u0 = base * eps
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = picard_solve(u0, ForceSpec.zero(), knots, cfg, enforce_smallness=False)
            rep = res.report
        except ConvergenceError as err:
            rep = err.report
        records.append(
            ScanRecord(eps, rep.converged, rep.ball_radius, rep.final_residual, rep.iterates, rep.data_norm, rep.contraction_ratios)
        )
    return records


def scan_threshold(c: float, grid: FrequencyGrid, eta: float):
    """The eps below which eps ||u_Landau||_PM2 < 1/(4 eta) on this lattice."""
    base = landau_sample_spectral(LandauParams(c), grid)
    norm = pm_norm(SpectralVectorField(grid, project(base.coeffs, grid)), 2).value
    return 1 / (4 * eta * norm), norm


def scan_anomalies(records):
    """Epsilons that converged although a smaller epsilon had failed."""
    out, failed = [], False
    for rec in records:
        if rec.converged and failed:
            out.append(rec.epsilon)
        failed = failed or not rec.converged
    return out
