import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmns.duhamel import (
    ORACLE_CONFIG,
    BilinearConfig,
    bilinear_B,
    bilinear_B_stationary,
    bilinear_B_trajectory,
    direct_tensor_product_hat,
    eta_constant,
    phi1,
    phi2,
    psi_left,
    riesz_convolution_check,
    tensor_product_hat,
    write_riesz_csv,
)
from pmns.errors import GridMismatchError, KnotError, ParameterError
from pmns.fields import homogeneous_field, random_solenoidal, single_mode
from pmns.grid import FOURIER_NORM, FrequencyGrid, SpectralVectorField, Trajectory, geometric_knots
from pmns.norms import pm_values
from pmns.symbols import contract, heat_apply

XI_A, AMP_A = (1, 1, 0), (1.0, -1.0, 0.5j)
XI_B, AMP_B = (0, 1, 2), (0.3, 0.4, -0.2)


def test_eta_constants():
    e = eta_constant()
    assert e.eta_paper == pytest.approx(31.00628, abs=1e-5)
    assert e.eta_effective == pytest.approx(e.eta_paper * (2 * np.pi) ** -1.5, rel=1e-15)
    assert e.threshold_effective == pytest.approx(0.12699, abs=1e-5)


def test_phi_functions_match_direct_formulas():
    z = np.array([1e-8, 1e-4, 9e-3, 1.1e-2, 0.5, 3.0, 40.0, 1e4])
    np.testing.assert_allclose(phi1(z), -np.expm1(-z) / z, rtol=1e-10)
    np.testing.assert_allclose(psi_left(z[3:]), (1 - (1 + z[3:]) * np.exp(-z[3:])) / z[3:] ** 2, rtol=1e-12)
    np.testing.assert_allclose(phi2(z[3:]), (np.exp(-z[3:]) - 1 + z[3:]) / z[3:] ** 2, rtol=1e-12)
    assert phi1(np.array(0.0)) == 1.0 and psi_left(np.array(0.0)) == 0.5 and phi2(np.array(0.0)) == 0.5


def test_pseudospectral_matches_direct_convolution(grid8):
    u = random_solenoidal(grid8, 1.0, 1)
    v = random_solenoidal(grid8, 1.0, 2)
    a = tensor_product_hat(u, v, ORACLE_CONFIG).coeffs
    b = direct_tensor_product_hat(u, v).coeffs
    assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))


def test_two_mode_product_support(grid8):
    u = single_mode(grid8, XI_A, AMP_A)
    v = single_mode(grid8, XI_B, AMP_B)
    T = tensor_product_hat(u, v, ORACLE_CONFIG).coeffs
    scale = FOURIER_NORM * grid8.delta_xi**3
    expected = np.zeros_like(T)
    a, b = np.array(AMP_A), np.array(AMP_B)
    for sa, ca in ((1, a), (-1, a.conj())):
        for sb, cb in ((1, b), (-1, b.conj())):
            k = tuple((sa * np.array(XI_A) + sb * np.array(XI_B)) % grid8.n)
            expected[(slice(None), slice(None)) + k] += scale * np.outer(ca, cb)
    np.testing.assert_allclose(T, expected, atol=1e-15)


def test_zero_factor_gives_zero(grid8):
    u = random_solenoidal(grid8, 1.0, 0)
    z = SpectralVectorField.zeros(grid8)
    assert not np.any(tensor_product_hat(u, z).coeffs)
    knots = [0.0, 0.5, 1.0]
    assert not np.any(bilinear_B(Trajectory.constant(u, knots), Trajectory.constant(z, knots), 1.0).coeffs)


def test_grid_and_knot_errors(grid8):
    u = SpectralVectorField.zeros(grid8)
    w = SpectralVectorField.zeros(FrequencyGrid(8, 2.0))
    with pytest.raises(GridMismatchError):
        tensor_product_hat(u, w)
    tr = Trajectory.constant(u, [0.0, 1.0])
    with pytest.raises(KnotError):
        bilinear_B(tr, tr, 0.5)
    with pytest.raises(GridMismatchError):
        bilinear_B(tr, Trajectory.constant(u, [0.0, 2.0]), 1.0)
    with pytest.raises(ParameterError):
        BilinearConfig(quad_order=3)


def _closed_form(grid, t):
    """B(u, v)(t) for u, v heat flows of two single modes.

    Every product mode decays like exp(-mu tau) with mu = |xi_a|^2 + |xi_b|^2, so
    -int_0^t exp(-(t - tau) lam) exp(-mu tau) dtau = -(exp(-mu t) - exp(-lam t)) / (lam - mu).
    """
    u = single_mode(grid, XI_A, AMP_A)
    v = single_mode(grid, XI_B, AMP_B)
    T0 = direct_tensor_product_hat(u, v).coeffs
    lam = grid.xi2
    mu = float(np.sum(np.square(XI_A)) + np.sum(np.square(XI_B))) * grid.delta_xi**2
    d = lam - mu
    safe = np.where(np.abs(d) > 1e-12, d, 1.0)
    factor = np.where(np.abs(d) > 1e-12, (np.exp(-mu * t) - np.exp(-lam * t)) / safe, t * np.exp(-lam * t))
    return -factor * contract(T0, grid), u, v


def _heat_traj(f, knots):
    return Trajectory.from_fields(knots, [heat_apply(f, t) for t in knots])


def test_constant_single_mode_one_interval(grid8):
    u = single_mode(grid8, XI_A, AMP_A)
    v = single_mode(grid8, XI_B, AMP_B)
    t = 0.7
    knots = [0.0, t]
    B = bilinear_B(Trajectory.constant(u, knots), Trajectory.constant(v, knots), t, ORACLE_CONFIG).coeffs
    T0 = direct_tensor_product_hat(u, v).coeffs
    expected = -t * phi1(t * grid8.xi2) * contract(T0, grid8)
    np.testing.assert_allclose(B, expected, atol=1e-15)


@pytest.mark.parametrize("order, factor", [(1, 2.0), (2, 4.0)])
def test_quadrature_convergence(grid8, order, factor):
    t = 1.0
    exact, u, v = _closed_form(grid8, t)
    cfg = BilinearConfig(dealias=False, quad_order=order)
    errs = []
    for K in (4, 8, 16, 32):
        knots = np.linspace(0, t, K + 1)
        B = bilinear_B(_heat_traj(u, knots), _heat_traj(v, knots), t, cfg).coeffs
        errs.append(np.max(np.abs(B - exact)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios >= factor * 0.95)
    assert errs[-1] < 0.15 * np.max(np.abs(exact))


@settings(max_examples=10, deadline=None)
@given(alpha=st.floats(-3, 3), seed=st.integers(0, 50))
def test_bilinearity(alpha, seed):
    g = FrequencyGrid(8, 1.0)
    knots = [0.0, 0.1, 0.3]
    U = _heat_traj(random_solenoidal(g, 1.0, seed), knots)
    W = _heat_traj(random_solenoidal(g, 1.0, seed + 1), knots)
    V = _heat_traj(random_solenoidal(g, 1.0, seed + 2), knots)
    aU = Trajectory(g, U.knots, alpha * U.coeffs)
    UW = Trajectory(g, U.knots, U.coeffs + W.coeffs)
    B = lambda a, b: bilinear_B_trajectory(a, b).coeffs
    scale = np.max(np.abs(B(U, V))) + 1e-300
    assert np.max(np.abs(B(aU, V) - alpha * B(U, V))) <= 1e-12 * scale * max(1, abs(alpha))
    assert np.max(np.abs(B(UW, V) - B(U, V) - B(W, V))) <= 1e-12 * (scale + np.max(np.abs(B(W, V))))


def test_output_is_divergence_free(grid16):
    knots = geometric_knots(1e-2, 1.0, 4)
    U = _heat_traj(random_solenoidal(grid16, 1.0, 0), knots)
    B = bilinear_B_trajectory(U, U)
    div = np.abs(np.sum(grid16.xi * B.coeffs[:, :, None].squeeze(2), axis=1))
    assert np.max(div) <= 1e-12 * np.max(np.abs(B.coeffs)) * grid16.cutoff
    S = bilinear_B_stationary(U.field(1), U.field(2))
    assert np.max(np.abs(S.divergence())) <= 1e-12 * np.max(np.abs(S.coeffs)) * grid16.cutoff


def test_stationary_is_long_time_limit(grid8):
    u = random_solenoidal(grid8, 1.0, 3)
    v = random_solenoidal(grid8, 1.0, 4)
    knots = geometric_knots(1e-3, 100.0, 4)
    B = bilinear_B(Trajectory.constant(u, knots), Trajectory.constant(v, knots), 100.0, ORACLE_CONFIG).coeffs
    S = bilinear_B_stationary(u, v, ORACLE_CONFIG).coeffs
    assert np.max(np.abs(B - S)) <= 1e-12 * np.max(np.abs(S))
    assert not np.any(bilinear_B_stationary(u * 0, v).coeffs)


@pytest.mark.parametrize("seed", range(3))
def test_bilinear_bound_with_effective_eta(grid16, seed):
    eta = eta_constant().eta_effective
    knots = geometric_knots(1e-3, 10, 4)
    u = random_solenoidal(grid16, 1.0, seed)
    v = homogeneous_field(grid16, (0, 1, 0), 1.0)
    B = bilinear_B_trajectory(Trajectory.constant(u, knots), Trajectory.constant(v, knots), ORACLE_CONFIG)
    assert float(np.max(pm_values(B.coeffs, grid16, 2))) <= eta * 1.0 * 1.0 * (1 + 1e-6)


def test_riesz_constant_and_scaling():
    rows = riesz_convolution_check([(1.0, 0.0, 0.0), (2.0, 0.0, 0.0)], 1e3, 10_000)
    assert rows[0].rhs == pytest.approx(np.pi**3)
    assert rows[0].rel_err < 0.01
    assert rows[1].lhs == pytest.approx(rows[0].lhs / 2, rel=0.01)
    # the truncated integral misses at most the tail bound
    assert rows[0].rhs - rows[0].lhs <= rows[0].tail_bound * 1.01


def test_riesz_error_decreases_with_radius():
    errs = [riesz_convolution_check([(0.0, 1.0, 0.0)], R, 10_000)[0].rel_err for R in (1e2, 1e3, 1e4)]
    assert errs[0] > errs[1] > errs[2]


def test_riesz_csv(tmp_path):
    rows = riesz_convolution_check([(1.0, 0.0, 0.0)], 1e2, 2000)
    path = tmp_path / "riesz.csv"
    write_riesz_csv(path, rows)
    with open(path) as fh:
        data = list(csv.reader(fh))
    assert data[0] == ["xi", "lhs", "rhs", "rel_err"]
    assert float(data[1][2]) == pytest.approx(np.pi**3)
