"""Unit-cell incidence data for frustrated junction arrays.

A cell bundles everything the rest of the package needs to build equations of
motion for one magnetic unit cell: which gauge-invariant phases enter which
variable's equation (``omega``), how the phases respond to the variables
(``phi_dy``), the constant phase offsets of the reference state, the plaquette
flux constraints, where the bias currents enter, and the noise-channel
incidence. Built-in cells cover frustration 1/2 and 1/3 plus a single-junction
sanity cell; custom cells load from a plain-text file.

Conventions: angles in radians, currents in units of the junction critical
current, one equation per cell variable y_j of the form

    g_j = sin_coeff * [ sum_k omega_jk sin Phi_k - I_x delta_{j,jx} - I_y delta_{j,jy} ]
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, ParseError, UnsupportedFrustration, ValidationError

__all__ = [
    "AffineMap",
    "FluxIdentity",
    "FrustrationCell",
    "ValidationReport",
    "builtin_cell",
    "builtin_names",
    "load_cell",
    "loads_cell",
    "parse_number",
    "phase_map_y",
    "save_cell",
    "validate_cell",
]


@dataclass(frozen=True)
class AffineMap:
    """Affine map v -> offsets + matrix @ v."""

    matrix: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=float)
        b = np.ascontiguousarray(self.offsets, dtype=float)
        m.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offsets", b)

    @property
    def n_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_out(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        return self.offsets + v @ self.matrix.T


class FluxIdentity(NamedTuple):
    """Linear plaquette constraint: weights . Phi == constant for every y."""

    weights: tuple
    constant: float


@dataclass(frozen=True)
class FrustrationCell:
    """Immutable incidence data of one unit cell.

    ``omega`` and ``phi_dy`` are (n_vars, n_phases); ``phi_dy[j, k]`` is the
    derivative of phase k with respect to variable j. ``noise_incidence`` maps
    independent unit-strength noise channels onto the variable equations.
    """

    name: str
    f_num: int
    f_den: int
    omega: np.ndarray
    phi_dy: np.ndarray
    phase_offsets_y: np.ndarray
    flux_identities: tuple = ()
    drive_index_x: int = 0
    drive_index_y: int | None = None
    sin_coeff: float = 0.5
    noise_incidence: np.ndarray | None = None
    canonical_transform: np.ndarray | None = None
    labels: tuple = ()
    axis_labels: tuple = ()

    def __post_init__(self):
        omega = np.ascontiguousarray(self.omega, dtype=float)
        phi_dy = np.ascontiguousarray(self.phi_dy, dtype=float)
        offs = np.ascontiguousarray(self.phase_offsets_y, dtype=float)
        if omega.ndim != 2:
            raise ValidationError("omega must be a matrix", key="omega")
        n_vars, n_phases = omega.shape
        if phi_dy.shape != (n_vars, n_phases):
            raise ValidationError(
                f"phi_dy shape {phi_dy.shape} != omega shape {omega.shape}",
                key="phi_dy")
        if offs.shape != (n_phases,):
            raise ValidationError(
                f"phase_offsets_y must have {n_phases} entries", key="phase_offsets_y")
        noise = self.noise_incidence
        noise = np.zeros((n_vars, 0)) if noise is None else np.ascontiguousarray(noise, dtype=float)
        if noise.ndim != 2 or noise.shape[0] != n_vars:
            raise ValidationError(
                f"noise_incidence must have {n_vars} rows", key="noise_incidence")
        can = self.canonical_transform
        if can is not None:
            can = np.ascontiguousarray(can, dtype=float)
            if can.shape != (n_vars, n_vars):
                raise ValidationError(
                    f"canonical_transform must be {n_vars}x{n_vars}",
                    key="canonical_transform")
            can.flags.writeable = False
        labels = tuple(self.labels) or tuple(f"Phi{k + 1}" for k in range(n_phases))
        axes = tuple(self.axis_labels) or tuple(f"x{i + 1}" for i in range(n_vars))
        if len(labels) != n_phases:
            raise ValidationError(f"need {n_phases} phase labels", key="labels")
        if len(axes) != n_vars:
            raise ValidationError(f"need {n_vars} axis labels", key="axis_labels")
        for j in (self.drive_index_x, self.drive_index_y):
            if j is not None and not 0 <= j < n_vars:
                raise ValidationError(f"drive index {j} out of range", key="drive_index")
        idents = tuple(
            FluxIdentity(tuple(float(w) for w in ident[0]), float(ident[1]))
            for ident in self.flux_identities)
        for ident in idents:
            if len(ident.weights) != n_phases:
                raise ValidationError(
                    f"flux identity needs {n_phases} weights", key="flux_identity")
        for arr in (omega, phi_dy, offs, noise):
            arr.flags.writeable = False
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "phi_dy", phi_dy)
        object.__setattr__(self, "phase_offsets_y", offs)
        object.__setattr__(self, "noise_incidence", noise)
        object.__setattr__(self, "canonical_transform", can)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "axis_labels", axes)
        object.__setattr__(self, "flux_identities", idents)

    @property
    def n_vars(self) -> int:
        return self.omega.shape[0]

    @property
    def n_phases(self) -> int:
        return self.omega.shape[1]

    @property
    def frustration(self) -> Fraction:
        return Fraction(self.f_num, self.f_den)

    def axis_index(self, axis) -> int:
        """Resolve an axis given by index, label, or generic name x1..xn."""
        if isinstance(axis, (int, np.integer)):
            i = int(axis)
            if not 0 <= i < self.n_vars:
                raise DimensionMismatch(
                    f"axis index {i} out of range for {self.n_vars} variables")
            return i
        name = str(axis)
        if name in self.axis_labels:
            return self.axis_labels.index(name)
        m = re.fullmatch(r"x(\d+)", name)
        if m and 1 <= int(m.group(1)) <= self.n_vars:
            return int(m.group(1)) - 1
        raise ValidationError(
            f"unknown axis {name!r}; have {list(self.axis_labels)}", key="axis")


def phase_map_y(cell: FrustrationCell) -> AffineMap:
    """Affine map y -> Phi in the original (per-junction) variables."""
    return AffineMap(cell.phi_dy.T, cell.phase_offsets_y)


# ------------------------------------------------------------------
# built-in cells
# ------------------------------------------------------------------

def _half_cell() -> FrustrationCell:
    s2 = math.sqrt(2.0)
    half = 0.5
    return FrustrationCell(
        name="half",
        f_num=1, f_den=2,
        omega=[[-1, 0, 1, 0],
               [0, -1, 0, 1],
               [1, -1, 1, -1]],
        phi_dy=[[-1, 0, 1, 0],
                [0, -1, 0, 1],
                [half, -half, half, -half]],
        phase_offsets_y=[math.pi / 2, 0.0, math.pi / 2, 0.0],
        flux_identities=(((1, 1, 1, 1), math.pi),),
        drive_index_x=0,
        drive_index_y=1,
        sin_coeff=0.5,
        noise_incidence=[[half, half, 0, 0, 0, 0, 0, 0],
                         [0, 0, half, half, 0, 0, 0, 0],
                         [0, 0, 0, 0, half, half, half, half]],
        canonical_transform=[[s2, 0, 0], [0, s2, 0], [0, 0, 1]],
        labels=("alpha", "beta", "gamma", "kappa"),
        axis_labels=("x", "y", "z"),
    )


def _third_cell() -> FrustrationCell:
    s3 = math.sqrt(3.0)
    t = 1.0 / 3.0
    pi3 = math.pi / 3
    return FrustrationCell(
        name="third",
        f_num=1, f_den=3,
        omega=[[-1, 0, 0, 1, 0, -1],
               [0, 1, -1, 0, 1, 0],
               [-1, 1, 0, 0, -1, 1],
               [1, -1, -1, 1, 0, 0]],
        phi_dy=[[-2 * t, 0, 0, 2 * t, 0, -2 * t],
                [0, 2 * t, -2 * t, 0, 2 * t, 0],
                [-t, t, -t, t, -2 * t, 2 * t],
                [t, -t, -2 * t, 2 * t, -t, t]],
        phase_offsets_y=[pi3, pi3, pi3, pi3, 0.0, 0.0],
        flux_identities=(((0, 0, 1, 1, 1, 1), 2 * pi3),
                         ((1, 1, 0, 0, -1, -1), 2 * pi3)),
        drive_index_x=0,
        drive_index_y=1,
        sin_coeff=0.5,
        noise_incidence=[[.5, .5, .5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                         [0, 0, 0, .5, .5, .5, 0, 0, 0, 0, 0, 0, 0, 0],
                         [0, 0, 0, 0, 0, 0, .5, .5, .5, .5, 0, 0, 0, 0],
                         [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, .5, .5, .5, .5]],
        canonical_transform=[[2 / s3, 0, 0, 0],
                             [0, 2 / s3, 0, 0],
                             [0, 0, 1, 1],
                             [0, 0, 1 / s3, -1 / s3]],
        labels=("alpha", "beta", "beta0", "gamma", "lambda", "delta"),
        axis_labels=("x1", "x2", "x3", "x4"),
    )


def _single_junction() -> FrustrationCell:
    return FrustrationCell(
        name="single_junction",
        f_num=0, f_den=1,
        omega=[[1.0]],
        phi_dy=[[1.0]],
        phase_offsets_y=[0.0],
        flux_identities=(),
        drive_index_x=0,
        drive_index_y=None,
        sin_coeff=1.0,
        noise_incidence=[[1.0]],
        canonical_transform=[[1.0]],
        labels=("phase",),
        axis_labels=("x",),
    )


_CATALOG = {"1/2": _half_cell, "1/3": _third_cell, "single_junction": _single_junction}


def builtin_names() -> tuple:
    return tuple(_CATALOG)


def builtin_cell(f) -> FrustrationCell:
    """Return a built-in cell for frustration ``f``.

    Accepts the strings "1/2", "1/3", "single_junction", a Fraction, or a
    (numerator, denominator) pair. Anything else raises UnsupportedFrustration.
    """
    key = f
    if isinstance(f, Fraction):
        key = f"{f.numerator}/{f.denominator}"
    elif isinstance(f, (tuple, list)) and len(f) == 2:
        frac = Fraction(int(f[0]), int(f[1]))
        key = f"{frac.numerator}/{frac.denominator}"
    elif isinstance(f, str):
        key = f.strip()
    if key in _CATALOG:
        return _CATALOG[key]()
    raise UnsupportedFrustration(
        f"no built-in cell for frustration {f!r}; available: {', '.join(_CATALOG)}")


# ------------------------------------------------------------------
# validation
# ------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the structural checks on a cell."""

    cell_name: str
    checks: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def summary(self) -> str:
        lines = [f"cell {self.cell_name}: {'OK' if self.ok else 'FAILED'}"]
        for name, passed, detail in self.checks:
            lines.append(f"  [{'pass' if passed else 'FAIL'}] {name}: {detail}")
        return "\n".join(lines)


def validate_cell(cell: FrustrationCell, n_points: int = 100, seed: int = 0,
                  flux_tol: float = 1e-12, cond_limit: float = 1e12) -> ValidationReport:
    """Run structural sanity checks; returns a report instead of raising.

    Checks: dimension bookkeeping against the frustration denominator,
    incidence entries in {-1, 0, 1}, invertibility of omega.omega^T, and the
    plaquette flux identities at ``n_points`` random y configurations.
    A sign flip in omega alone passes here (the identities do not involve
    omega); the transform stage catches it through the target-matrix checks.
    """
    checks = []
    n_vars, n_phases = cell.omega.shape
    if cell.f_den >= 2:
        dim_ok = n_vars == cell.f_den + 1 and n_phases == 2 * cell.f_den
        detail = f"n_vars={n_vars} (want {cell.f_den + 1}), n_phases={n_phases} (want {2 * cell.f_den})"
    else:
        dim_ok = True
        detail = f"n_vars={n_vars}, n_phases={n_phases} (unfrustrated: no constraint)"
    checks.append(("dimensions", dim_ok, detail))

    entries_ok = bool(np.isin(cell.omega, (-1.0, 0.0, 1.0)).all())
    checks.append(("incidence entries", entries_ok, "omega entries in {-1,0,1}"
                   if entries_ok else "omega has entries outside {-1,0,1}"))

    gram = cell.omega @ cell.omega.T
    cond = float(np.linalg.cond(gram))
    gram_ok = np.isfinite(cond) and cond < cond_limit
    checks.append(("incidence gram invertible", gram_ok, f"cond={cond:.3g}"))

    rng = np.random.default_rng(seed)
    worst = 0.0
    pm = phase_map_y(cell)
    for _ in range(n_points):
        y = rng.uniform(-4 * np.pi, 4 * np.pi, n_vars)
        phases = pm(y)
        for ident in cell.flux_identities:
            worst = max(worst, abs(float(np.dot(ident.weights, phases)) - ident.constant))
    flux_ok = worst < flux_tol
    checks.append(("flux identities", flux_ok,
                   f"worst residual {worst:.3e} over {n_points} points"))

    return ValidationReport(cell_name=cell.name, checks=tuple(checks))


# ------------------------------------------------------------------
# plain-text cell files
# ------------------------------------------------------------------
#
# Format: one statement per line. Scalar keys use  "key: value"; matrix keys
# use a bare "key:" line followed by one row per line; "flux_identity:" lines
# hold weights, "=", and the constant. Blank lines and "#" comments are
# ignored. Numbers may be decimal literals or expressions built from
# rationals, pi, and sqrt(), e.g. "1/2", "pi/3", "sqrt(2)", "-2*pi/3".

_NUMBER_RE = re.compile(r"^[0-9eE pitqrs()+\-*/.]*$")
_NUMBER_NAMES = {"pi": math.pi, "sqrt": math.sqrt}

_SCALAR_KEYS = {"name", "f", "sin_coeff", "drive_index_x", "drive_index_y"}
_LIST_KEYS = {"labels", "axis_labels", "phase_offsets_y"}
_MATRIX_KEYS = {"omega", "phi_dy", "noise_incidence", "canonical_D"}


def parse_number(token: str, line: int | None = None, column: int | None = None) -> float:
    """Evaluate a numeric token: decimal, rational, or pi/sqrt expression."""
    token = token.strip()
    if not token or not _NUMBER_RE.match(token):
        raise ParseError(f"bad numeric token {token!r}", line=line, column=column)
    try:
        return float(eval(token, {"__builtins__": {}}, _NUMBER_NAMES))
    except Exception:
        raise ParseError(f"bad numeric token {token!r}", line=line, column=column) from None


def _parse_row(text: str, line: int) -> list:
    return [parse_number(tok, line=line) for tok in text.split()]


def loads_cell(text: str) -> FrustrationCell:
    """Parse a cell definition from its plain-text form."""
    scalars: dict = {}
    lists: dict = {}
    matrices: dict = {}
    idents: list = []
    current_matrix = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            current_matrix = None
            continue
        if ":" in stripped:
            key, _, value = stripped.partition(":")
            key = key.strip()
            value = value.strip()
            if key in _MATRIX_KEYS:
                if value:
                    raise ParseError(f"matrix key {key!r} takes rows on following lines",
                                     line=lineno)
                current_matrix = matrices.setdefault(key, [])
                continue
            current_matrix = None
            if key == "flux_identity":
                lhs, eq, rhs = value.partition("=")
                if not eq:
                    raise ParseError("flux_identity needs 'weights = constant'", line=lineno)
                idents.append((_parse_row(lhs, lineno), parse_number(rhs, line=lineno)))
            elif key in _LIST_KEYS:
                lists[key] = value.split() if key != "phase_offsets_y" else _parse_row(value, lineno)
            elif key in _SCALAR_KEYS:
                scalars[key] = (value, lineno)
            else:
                raise ParseError(f"unknown key {key!r}", line=lineno,
                                 column=raw.index(key) + 1)
        elif current_matrix is not None:
            current_matrix.append(_parse_row(stripped, lineno))
        else:
            raise ParseError(f"unexpected line {stripped.strip()!r}", line=lineno)

    for key in ("omega", "phi_dy"):
        if key not in matrices:
            raise ParseError(f"missing required matrix {key!r}")
    if "phase_offsets_y" not in lists:
        raise ParseError("missing required key 'phase_offsets_y'")

    def scalar(key, default=None):
        if key not in scalars:
            return default
        return scalars[key][0]

    f_text = scalar("f", "0")
    if f_text == "single_junction":
        f_num, f_den = 0, 1
    else:
        try:
            frac = Fraction(f_text)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad frustration {f_text!r}", line=scalars["f"][1]) from None
        f_num, f_den = frac.numerator, frac.denominator

    def int_scalar(key, default):
        raw = scalar(key)
        if raw is None:
            return default
        if raw == "none":
            return None
        try:
            return int(raw)
        except ValueError:
            raise ParseError(f"bad integer for {key!r}: {raw!r}",
                             line=scalars[key][1]) from None

    return FrustrationCell(
        name=scalar("name", "custom"),
        f_num=f_num,
        f_den=f_den,
        omega=np.array(matrices["omega"], dtype=float),
        phi_dy=np.array(matrices["phi_dy"], dtype=float),
        phase_offsets_y=np.array(lists["phase_offsets_y"], dtype=float),
        flux_identities=tuple(idents),
        drive_index_x=int_scalar("drive_index_x", 0),
        drive_index_y=int_scalar("drive_index_y", None),
        sin_coeff=parse_number(scalar("sin_coeff", "1/2")),
        noise_incidence=np.array(matrices["noise_incidence"], dtype=float)
        if "noise_incidence" in matrices else None,
        canonical_transform=np.array(matrices["canonical_D"], dtype=float)
        if "canonical_D" in matrices else None,
        labels=tuple(lists.get("labels", ())),
        axis_labels=tuple(lists.get("axis_labels", ())),
    )


def load_cell(path) -> FrustrationCell:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_cell(fh.read())


def _fmt(x: float) -> str:
    return format(x, ".17g")


def dumps_cell(cell: FrustrationCell) -> str:
    """Serialize a cell to the plain-text format (numbers as decimals)."""
    out = [f"name: {cell.name}"]
    out.append("f: single_junction" if cell.name == "single_junction" and cell.f_num == 0
               else f"f: {cell.f_num}/{cell.f_den}")
    out.append(f"sin_coeff: {_fmt(cell.sin_coeff)}")
    out.append(f"drive_index_x: {cell.drive_index_x}")
    out.append(f"drive_index_y: {'none' if cell.drive_index_y is None else cell.drive_index_y}")
    out.append("labels: " + " ".join(cell.labels))
    out.append("axis_labels: " + " ".join(cell.axis_labels))
    out.append("phase_offsets_y: " + " ".join(_fmt(v) for v in cell.phase_offsets_y))
    for ident in cell.flux_identities:
        out.append("flux_identity: " + " ".join(_fmt(w) for w in ident.weights)
                   + " = " + _fmt(ident.constant))

    def block(key, mat):
        out.append("")
        out.append(f"{key}:")
        for row in np.atleast_2d(mat):
            out.append(" ".join(_fmt(v) for v in row))

    block("omega", cell.omega)
    block("phi_dy", cell.phi_dy)
    if cell.noise_incidence.shape[1]:
        block("noise_incidence", cell.noise_incidence)
    if cell.canonical_transform is not None:
        block("canonical_D", cell.canonical_transform)
    return "\n".join(out) + "\n"


def save_cell(cell: FrustrationCell, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_cell(cell))
