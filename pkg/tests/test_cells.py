"""Unit-cell catalog, validation, and the plain-text cell format."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

import washboard as wb
from washboard.cells import dumps_cell, loads_cell, parse_number, phase_map_y


@pytest.mark.parametrize("key", ["1/2", "1/3", "single_junction"])
def test_builtin_passes_validation(key):
    cell = wb.builtin_cell(key)
    report = wb.validate_cell(cell)
    assert report.ok, report.summary()


@pytest.mark.parametrize("spec, name", [
    ("1/2", "half"),
    (Fraction(1, 2), "half"),
    ((1, 2), "half"),
    ((2, 4), "half"),          # reduced before lookup
    (" 1/3 ", "third"),
])
def test_builtin_lookup_variants(spec, name):
    assert wb.builtin_cell(spec).name == name


def test_unsupported_frustration():
    with pytest.raises(wb.UnsupportedFrustration):
        wb.builtin_cell("2/5")


def test_dimension_bookkeeping(half_cell, third_cell):
    # one variable more than the denominator, two phases per junction pair
    assert (half_cell.n_vars, half_cell.n_phases) == (3, 4)
    assert (third_cell.n_vars, third_cell.n_phases) == (6 // 2 + 1, 6)
    assert half_cell.frustration == Fraction(1, 2)


def test_arrays_are_frozen(half_cell):
    with pytest.raises(ValueError):
        half_cell.omega[0, 0] = 5.0
    with pytest.raises(ValueError):
        half_cell.phi_dy[0, 0] = 5.0


def test_flux_identities_hold_at_random_points(third_cell):
    """Plaquette constraints are affine invariants of the phase map."""
    rng = np.random.default_rng(11)
    pm = phase_map_y(third_cell)
    for _ in range(25):
        phases = pm(rng.uniform(-9, 9, third_cell.n_vars))
        for ident in third_cell.flux_identities:
            assert abs(np.dot(ident.weights, phases) - ident.constant) < 1e-12


def test_validation_catches_broken_flux(half_cell):
    bad = wb.FrustrationCell(
        name="broken", f_num=1, f_den=2,
        omega=half_cell.omega, phi_dy=half_cell.phi_dy,
        phase_offsets_y=np.zeros(4),      # offsets no longer sum to pi
        flux_identities=half_cell.flux_identities,
        drive_index_y=1)
    report = wb.validate_cell(bad)
    assert not report.ok
    failed = [name for name, ok, _ in report.checks if not ok]
    assert failed == ["flux identities"]


def test_validation_catches_bad_entries(half_cell):
    omega = half_cell.omega.copy()
    omega[0, 0] = 2.0
    bad = wb.FrustrationCell(name="bad", f_num=1, f_den=2, omega=omega,
                             phi_dy=half_cell.phi_dy,
                             phase_offsets_y=half_cell.phase_offsets_y,
                             flux_identities=half_cell.flux_identities)
    report = wb.validate_cell(bad)
    assert not report.ok
    assert any(name == "incidence entries" and not ok
               for name, ok, _ in report.checks)


def test_constructor_rejects_shape_mismatch(half_cell):
    with pytest.raises(wb.ValidationError):
        wb.FrustrationCell(name="x", f_num=1, f_den=2,
                           omega=half_cell.omega,
                           phi_dy=half_cell.phi_dy[:, :3],
                           phase_offsets_y=half_cell.phase_offsets_y)
    with pytest.raises(wb.ValidationError) as err:
        wb.FrustrationCell(name="x", f_num=1, f_den=2,
                           omega=half_cell.omega,
                           phi_dy=half_cell.phi_dy,
                           phase_offsets_y=np.zeros(5))
    assert err.value.key == "phase_offsets_y"


def test_axis_index(half_cell, third_cell):
    assert half_cell.axis_index("z") == 2
    assert half_cell.axis_index(1) == 1
    assert half_cell.axis_index("x2") == 1      # generic names resolve too
    assert third_cell.axis_index("x4") == 3
    with pytest.raises(wb.ValidationError):
        half_cell.axis_index("w")
    with pytest.raises(wb.DimensionMismatch):
        half_cell.axis_index(3)


def test_phase_map_y_matches_manual(half_cell):
    y = np.array([0.3, -0.7, 1.1])
    expected = half_cell.phase_offsets_y + y @ half_cell.phi_dy
    assert_allclose(phase_map_y(half_cell)(y), expected, rtol=0, atol=0)


# ---------------- plain-text format ----------------

@pytest.mark.parametrize("token, value", [
    ("1/2", 0.5),
    ("pi/3", math.pi / 3),
    ("sqrt(2)", math.sqrt(2)),
    ("-2*pi/3", -2 * math.pi / 3),
    ("0.25", 0.25),
    ("1e-3", 1e-3),
])
def test_parse_number(token, value):
    assert parse_number(token) == pytest.approx(value, rel=0, abs=0)


@pytest.mark.parametrize("token", ["", "import os", "x", "pi)+(", "__x__", "1;2"])
def test_parse_number_rejects(token):
    with pytest.raises(wb.ParseError):
        parse_number(token, line=4)


def test_parse_number_error_location():
    with pytest.raises(wb.ParseError) as err:
        parse_number("fish", line=7, column=3)
    assert err.value.line == 7 and err.value.column == 3
    assert "7" in str(err.value)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_parse_number_round_trips_17g(x):
    assert parse_number(format(x, ".17g")) == x


@pytest.mark.parametrize("key", ["1/2", "1/3", "single_junction"])
def test_cell_file_round_trip(key, tmp_path):
    cell = wb.builtin_cell(key)
    path = tmp_path / "cell.txt"
    wb.save_cell(cell, path)
    loaded = wb.load_cell(path)
    assert loaded.name == cell.name
    assert (loaded.f_num, loaded.f_den) == (cell.f_num, cell.f_den)
    assert_array_equal(loaded.omega, cell.omega)
    assert_array_equal(loaded.phi_dy, cell.phi_dy)
    assert_array_equal(loaded.phase_offsets_y, cell.phase_offsets_y)
    assert_array_equal(loaded.noise_incidence, cell.noise_incidence)
    assert_array_equal(loaded.canonical_transform, cell.canonical_transform)
    assert loaded.flux_identities == cell.flux_identities
    assert loaded.labels == cell.labels
    assert loaded.drive_index_y == cell.drive_index_y
    assert loaded.sin_coeff == cell.sin_coeff
    assert wb.validate_cell(loaded).ok


def test_loads_reports_line_numbers():
    text = "f: 1/2\nomega:\n1 0 nope 0\n"
    with pytest.raises(wb.ParseError) as err:
        loads_cell(text)
    assert err.value.line == 3


def test_loads_rejects_unknown_key():
    with pytest.raises(wb.ParseError) as err:
        loads_cell("f: 1/2\nbanana: 3\n")
    assert err.value.line == 2


def test_loads_requires_core_matrices():
    with pytest.raises(wb.ParseError, match="omega"):
        loads_cell("f: 1/2\nphase_offsets_y: 0 0 0 0\n")


def test_loads_flux_identity_syntax():
    with pytest.raises(wb.ParseError, match="flux_identity"):
        loads_cell("flux_identity: 1 1 1 1 pi\n")


def test_dumps_uses_expression_free_decimals(half_cell):
    text = dumps_cell(half_cell)
    assert "sqrt" not in text and "pi" not in text
    # every numeric token must survive a parse round trip
    reparsed = loads_cell(text)
    assert_array_equal(reparsed.phase_offsets_y, half_cell.phase_offsets_y)
