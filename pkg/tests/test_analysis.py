import numpy as np
import pytest

from pmns.analysis import (
    ScanRecord,
    force_weighted_norm,
    loss_of_smoothness_scan,
    regularization_experiment,
    scan_anomalies,
    scan_threshold,
    stability_diagnostic,
    stability_experiment,
)
from pmns.errors import ParameterError
from pmns.fields import random_solenoidal
from pmns.grid import FrequencyGrid, geometric_knots
from pmns.solver import ForceSpec, SolverConfig

from conftest import EPS, ETA

KNOTS = geometric_knots(1e-2, 10, 5)


@pytest.fixture
def cfg():
    return SolverConfig(epsilon=EPS, tol=1e-11)


def test_diagnostic_value():
    assert stability_diagnostic(ETA, EPS) == pytest.approx(0.5 * (np.exp(-1) * np.log(2) + 1))
    with pytest.raises(ParameterError):
        stability_diagnostic(ETA, EPS, 1.0)


def test_identical_data_zero_difference(grid8, cfg):
    u0 = random_solenoidal(grid8, 0.5 * EPS, 0)
    rep = stability_experiment(u0, u0, ForceSpec.zero(), ForceSpec.zero(), KNOTS, cfg)
    assert max(rep.diff_pm2) == 0.0 and rep.decayed and not rep.inequality_violations


def test_high_mode_difference_decays(cfg):
    g = FrequencyGrid(16, 0.02)
    knots = geometric_knots(1.0, 1e3, 8)
    u0 = random_solenoidal(g, 0.4 * EPS, 0)
    dv = random_solenoidal(g, 0.02, 5, g.xi_abs >= 4 * g.delta_xi)
    F = ForceSpec.dirac((0.2, 0.0, 0.0))
    rep = stability_experiment(u0, u0 + dv, F, F, knots, cfg)
    assert rep.decayed and rep.final_over_initial < 1e-2
    assert rep.eventually_decreasing
    assert not rep.inequality_violations


def test_homogeneous_difference_does_not_decay(cfg):
    from pmns.fields import homogeneous_field

    g = FrequencyGrid(16, 0.02)
    knots = geometric_knots(1.0, 1e3, 8)
    u0 = homogeneous_field(g, (1, 0, 0), 0.3 * EPS)
    v0 = homogeneous_field(g, (0, 1, 0), 0.3 * EPS)
    rep = stability_experiment(u0, v0, ForceSpec.zero(), ForceSpec.zero(), knots, cfg)
    assert rep.final_over_initial > 0.3
    assert not rep.inequality_violations


@pytest.mark.parametrize("a,q", [(2.0, None), (2.25, 3.5), (2.5, 4.0), (2.75, 4.0)])
def test_regularization_bounded(grid16, cfg, a, q):
    u0 = random_solenoidal(grid16, 0.5 * EPS, 3)
    rep = regularization_experiment(u0, ForceSpec.zero(), a, q, KNOTS, cfg)
    assert rep.bounded and rep.sup_value <= 2 * EPS
    if q is not None:
        assert max(rep.lq_curve) <= rep.lq_bound * (1 + 1e-9)


def test_regularization_linear_scaling(grid16):
    cfg = SolverConfig(epsilon=EPS, tol=1e-13)
    u0 = random_solenoidal(grid16, 1e-4, 3)
    r1 = regularization_experiment(u0, ForceSpec.zero(), 2.5, None, KNOTS, cfg)
    r2 = regularization_experiment(u0 * 2, ForceSpec.zero(), 2.5, None, KNOTS, cfg)
    assert r2.sup_value / r1.sup_value == pytest.approx(2.0, rel=1e-3)


def test_dirac_inadmissible_above_two(grid8, cfg):
    F = ForceSpec.dirac((0.1, 0, 0))
    assert np.isfinite(force_weighted_norm(F, 2.0, grid8, KNOTS))
    assert force_weighted_norm(F, 2.5, grid8, KNOTS) == np.inf
    with pytest.raises(ParameterError):
        regularization_experiment(random_solenoidal(grid8, 0.01, 0), F, 2.5, None, KNOTS, cfg)


def test_regularization_parameter_checks(grid8, cfg):
    u0 = random_solenoidal(grid8, 0.01, 0)
    with pytest.raises(ParameterError):
        regularization_experiment(u0, ForceSpec.zero(), 3.0, None, KNOTS, cfg)
    with pytest.raises(ParameterError, match="3 < q"):
        regularization_experiment(u0, ForceSpec.zero(), 2.5, 2.0, KNOTS, cfg)


def test_scan_monotone(cfg):
    g = FrequencyGrid(8, 1.0)
    thr, norm = scan_threshold(2.0, g, ETA)
    assert thr * norm * 4 * ETA == pytest.approx(1.0)
    eps = [0.0, 0.5 * thr, 2 * thr, 1e4 * thr]
    recs = loss_of_smoothness_scan(2.0, eps, g, SolverConfig(epsilon=EPS, max_iter=60))
    assert recs[0].converged and recs[0].ball_radius == 0.0
    assert recs[1].converged and recs[2].converged
    assert not recs[-1].converged
    assert scan_anomalies(recs) == []
    with pytest.raises(ParameterError):
        loss_of_smoothness_scan(2.0, [1.0, 0.5], g, cfg)


def test_anomalies():
    rec = lambda e, ok: ScanRecord(e, ok, 0.0, 0.0, 1, 0.0)
    assert scan_anomalies([rec(1, True), rec(2, False), rec(3, True)]) == [3]
    assert scan_anomalies([rec(1, True), rec(2, True)]) == []
