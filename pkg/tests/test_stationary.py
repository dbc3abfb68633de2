"""Fixed points, critical currents and the pinned-phase boundary."""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import washboard as wb
from conftest import GROUND_STATE_HALF

SQRT2 = math.sqrt(2.0)
PI = math.pi

I_C = 2 * (SQRT2 - 1)
X_C = math.acos(2 * SQRT2 - 3) / SQRT2
Z_C = -2 * math.asin(math.sqrt((2 - SQRT2) / 2))


def test_closed_form_constants():
    assert_allclose(wb.CRITICAL_CURRENT_HALF, I_C, rtol=0, atol=0)
    assert_allclose(wb.CRITICAL_X_HALF, X_C, rtol=0, atol=0)
    assert_allclose(wb.CRITICAL_Z_HALF, Z_C, rtol=0, atol=0)


def test_halfcell_residual_matches_gradient(half_cell):
    pot = wb.build_potential(half_cell, i_x=0.4, i_y=0.15)
    rng = np.random.default_rng(6)
    for x in rng.uniform(-3, 3, size=(25, 3)):
        assert_allclose(wb.halfcell_stationarity_residual(x, 0.4, 0.15),
                        pot.gradient(x), atol=1e-12)


def test_find_fixed_point_tilted_minimum(half_cell):
    pot = wb.build_potential(half_cell, i_x=0.4)
    fp = wb.find_fixed_point(pot, x0=(0.3, 0.0, -1.4))
    assert_allclose(fp.x, (0.41495555, 0.0, -1.52713094), atol=1e-6)
    assert fp.is_minimum
    assert fp.residual < 1e-10
    # the landing point really is stationary under the closed-form drift too
    assert np.max(np.abs(wb.halfcell_stationarity_residual(fp.x, 0.4))) < 1e-9


def test_no_convergence_past_depinning(junction_cell):
    # above the single-junction critical current there is nothing to find
    pot = wb.build_potential(junction_cell, i_x=2.0)
    with pytest.raises(wb.NoConvergence):
        wb.find_fixed_point(pot, x0=[0.5], max_iter=40)


@pytest.mark.parametrize("eigs, expected", [
    ((0.5, 1.0, 2.0), "minimum"),
    ((-0.5, -1.0, -2.0), "maximum"),
    ((-0.5, 1.0, 2.0), "saddle"),
    ((1e-9, 1.0, 2.0), "degenerate"),
])
def test_classify_hessian(eigs, expected):
    assert wb.classify_hessian(np.array(eigs)) == expected


def test_ground_state_half(half_potential):
    gs = wb.find_ground_state(half_potential)
    assert gs.is_minimum
    assert_allclose(half_potential.energy(gs.x), -2 * SQRT2, atol=1e-8)
    # the untilted ground state puts every junction phase at pi/4 (mod 2 pi)
    phases = half_potential.phases(gs.x)
    assert_allclose(np.cos(phases), math.cos(PI / 4), atol=1e-7)
    assert_allclose(np.sin(phases), math.sin(PI / 4), atol=1e-7)


def test_ground_state_third(third_potential):
    gs = wb.find_ground_state(third_potential, resolution=21)
    assert gs.is_minimum
    assert gs.residual < 1e-10
    # the flux constraints cap the cosine sum at 4 for this cell
    assert_allclose(third_potential.energy(gs.x), -4.0, atol=1e-8)


def test_critical_current_closed_forms():
    res = wb.critical_current_uniaxial()
    assert_allclose(res.i_c, I_C, rtol=0, atol=0)
    assert res.max_deviation < 1e-8
    # I(x) evaluated at the critical coordinate reproduces the threshold
    assert_allclose(wb.uniaxial_current_relation(X_C), I_C, atol=1e-14)


def test_critical_point_is_marginal(half_cell):
    pot = wb.build_potential(half_cell, i_x=I_C)
    h = pot.hessian(np.array([X_C, 0.0, Z_C]))
    lam = np.linalg.eigvalsh(h)
    assert abs(lam[0]) < 1e-4          # soft mode at depinning
    assert lam[1] > 0.1                # the rest stay stiff


def test_current_relation_interior():
    # below threshold the relation maps a stationary x back to its drive
    pot = wb.build_potential(wb.builtin_cell("1/2"), i_x=0.4)
    fp = wb.find_fixed_point(pot, x0=(0.3, 0.0, -1.4))
    assert_allclose(wb.uniaxial_current_relation(fp.x[0]), 0.4, atol=1e-10)


def test_biaxial_relation_symmetric_drive():
    # at r = 1 the fully symmetric drive peaks at x = pi / (2 sqrt 2) with i = 1
    assert_allclose(wb.biaxial_current_relation(PI / (2 * SQRT2), 1.0), 1.0,
                    atol=1e-14)
    assert_allclose(wb.biaxial_current_relation(0.7, 0.0),
                    wb.uniaxial_current_relation(0.7), atol=0)


def test_companion_report(half_cell):
    i_x = 0.45
    pot = wb.build_potential(half_cell, i_x=i_x)
    fp = wb.find_fixed_point(pot, x0=(0.4, 0.0, -1.5))
    rep = wb.companion_report(fp.x, i_x, 0.0)
    assert abs(rep["tan_half_z"]) < 1e-10
    assert abs(rep["sin_double_angle"]) < 1e-10
    # the ratio identity is not satisfied by the actual stationary branch
    assert abs(rep["sin_ratio"]) > 0.05


def test_depinning_cubic_double_root():
    """At the uniaxial threshold the cubic in cos(sqrt(2) x) has a double
    root, so both the polynomial and its derivative vanish there."""
    coeffs = wb.depinning_cubic(I_C, 0.0)
    y = math.cos(SQRT2 * X_C)
    assert_allclose(np.polyval(coeffs, y), 0.0, atol=1e-12)
    assert_allclose(np.polyval(np.polyder(coeffs), y), 0.0, atol=1e-12)


@pytest.mark.parametrize("i, r, pinned", [
    (0.5, 0.0, True),
    (0.82, 0.0, True),
    (0.84, 0.0, False),
    (0.84, 0.5, True),
    (0.86, 0.5, False),
    (0.99, 1.0, True),
    (1.01, 1.0, False),
])
def test_discriminant_sign(i, r, pinned):
    disc = wb.depinning_discriminant(i, r)
    assert (disc > 0) == pinned


def test_boundary_current_anchors():
    assert_allclose(wb.boundary_current_discriminant(0.0), I_C, atol=1e-9)
    assert_allclose(wb.boundary_current_discriminant(1.0), 1.0, atol=1e-9)


def test_root_branch_lost():
    with pytest.raises(wb.RootBranchLost):
        wb.boundary_current_discriminant(0.5, bracket=(1.05, 1.2))


def test_pinned_boundary_coarse():
    curve = wb.pinned_boundary(r_values=np.linspace(0, 1, 11))
    assert_allclose(curve.i_disc[0], I_C, atol=1e-6)
    assert_allclose(curve.i_disc[-1], 1.0, atol=1e-6)
    assert curve.monotone_increasing
    assert curve.max_residual < 2e-3


def test_boundary_matches_max_of_current_relation():
    """The discriminant boundary equals the maximum of the biaxial
    current-displacement relation over x."""
    from scipy.optimize import minimize_scalar
    for r in (0.2, 0.6, 0.9):
        res = minimize_scalar(lambda x: -wb.biaxial_current_relation(x, r),
                              bounds=(0.05, PI / SQRT2 - 0.05),
                              method="bounded",
                              options={"xatol": 1e-12})
        assert_allclose(wb.boundary_current_discriminant(r), -res.fun,
                        atol=1e-6)


def test_energy_barrier(half_potential):
    pot = half_potential.with_params(i_x=0.4)
    fp = wb.find_fixed_point(pot, x0=(0.3, 0.0, -1.4))
    barrier = wb.energy_barrier(pot, fp.x, fp.x)
    assert barrier == 0.0
