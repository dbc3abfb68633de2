"""Tilted multidimensional washboard potential of a driven cell.

After the symmetrizing substitution x = D y the deterministic dynamics is a
gradient flow in

    U(x) = - sum_k cos Phi_k(x) - g . x,
    Phi(x) = offsets + Phi_dx^T x,
    g = sin_coeff * (I_x D[:, jx] + I_y D[:, jy]),

so fixed points, barriers and curvature all live in one scalar function. The
cosine part is periodic along each axis with the period vector found here by
a minimal-multiple search; the tilt makes the full U quasiperiodic:
U(x + a_j e_j) = U(x) - g_j a_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cells import AffineMap, FrustrationCell
from .errors import BadSliceSpec, DimensionMismatch, InvalidConfig
from .transform import Transform, derive_transform, phase_map_x

__all__ = [
    "ReducedPotential",
    "SliceGrid",
    "TiltedPotential",
    "build_potential",
    "fd_check",
    "periodicity_check",
    "reduced_embedding_check",
    "reduced_potential_y0",
    "slice_grid",
    "tilt_decompose",
]


@dataclass(frozen=True)
class TiltedPotential:
    """Energy / gradient / Hessian of one cell under fixed bias and noise."""

    cell: FrustrationCell
    transform: Transform
    phase_map: AffineMap
    tilt: np.ndarray
    period: np.ndarray
    noise_cov: np.ndarray
    currents: tuple
    omega_noise: float

    def __post_init__(self):
        for name in ("tilt", "period", "noise_cov"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.cell.n_vars

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.n_vars:
            raise DimensionMismatch(
                f"expected trailing dimension {self.n_vars}, got shape {x.shape}")
        return x

    def phases(self, x) -> np.ndarray:
        """Gauge-invariant phases at x; broadcasts over leading axes."""
        return self.phase_map(self._check(x))

    def energy(self, x):
        x = self._check(x)
        phi = self.phase_map(x)
        return -np.cos(phi).sum(axis=-1) - x @ self.tilt

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        phi = self.phase_map(x)
        return np.sin(phi) @ self.phase_map.matrix - self.tilt

    def hessian(self, x) -> np.ndarray:
        x = self._check(x)
        a = self.phase_map.matrix.T          # (n_vars, n_phases)
        cos_phi = np.cos(self.phase_map(x))
        return np.einsum("jk,...k,lk->...jl", a, cos_phi, a)

    def with_params(self, i_x=None, i_y=None, omega_noise=None,
                    isotropic_noise=False) -> "TiltedPotential":
        """Rebuild with some drive/noise parameters replaced."""
        old_ix, old_iy = self.currents
        return build_potential(
            self.cell, self.transform,
            i_x=old_ix if i_x is None else i_x,
            i_y=old_iy if i_y is None else i_y,
            omega_noise=self.omega_noise if omega_noise is None else omega_noise,
            isotropic_noise=isotropic_noise)


def _axis_period(row: np.ndarray, n_max: int = 64, tol: float = 1e-9) -> float:
    """Smallest t > 0 with t * row in 2.pi.Z elementwise, or nan."""
    nz = row[np.abs(row) > 1e-14]
    if nz.size == 0:
        return math.nan
    vmax = float(np.abs(nz).max())
    for n in range(1, n_max + 1):
        t = 2.0 * math.pi * n / vmax
        m = t * nz / (2.0 * math.pi)
        if np.abs(m - np.round(m)).max() < tol:
            return t
    return math.nan


def build_potential(cell: FrustrationCell, transform: Transform | None = None,
                    i_x: float = 0.0, i_y: float = 0.0, omega_noise: float = 0.0,
                    isotropic_noise: bool = False) -> TiltedPotential:
    """Assemble the tilted potential for a cell at given bias currents.

    ``omega_noise`` is the thermal noise strength sqrt(2 k_B T / E_J); the
    stored covariance is its square times the cell's noise-channel image in x
    (or the identity with ``isotropic_noise``). A transverse bias on a cell
    with no transverse drive point raises InvalidConfig.
    """
    if transform is None:
        transform = derive_transform(cell)
    pm = phase_map_x(cell, transform)

    d = transform.D
    tilt = cell.sin_coeff * i_x * d[:, cell.drive_index_x]
    if i_y:
        if cell.drive_index_y is None:
            raise InvalidConfig(
                f"cell {cell.name!r} has no transverse drive index but i_y={i_y}")
        tilt = tilt + cell.sin_coeff * i_y * d[:, cell.drive_index_y]
    else:
        tilt = tilt.copy()

    a = pm.matrix.T                              # phase response, (n_vars, n_phases)
    period = np.array([_axis_period(a[j]) for j in range(cell.n_vars)])

    n = cell.n_vars
    if isotropic_noise or cell.noise_incidence.shape[1] == 0:
        base = np.eye(n)
    else:
        b_x = d @ cell.noise_incidence
        base = b_x @ b_x.T
    noise_cov = float(omega_noise) ** 2 * base

    return TiltedPotential(cell=cell, transform=transform, phase_map=pm,
                           tilt=tilt, period=period, noise_cov=noise_cov,
                           currents=(float(i_x), float(i_y)),
                           omega_noise=float(omega_noise))


def tilt_decompose(potential: TiltedPotential) -> tuple:
    """Recover (i_x, i_y) from the tilt vector (least squares)."""
    cell = potential.cell
    d = potential.transform.D
    cols = [cell.sin_coeff * d[:, cell.drive_index_x]]
    if cell.drive_index_y is not None:
        cols.append(cell.sin_coeff * d[:, cell.drive_index_y])
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), potential.tilt, rcond=None)
    i_x = float(coef[0])
    i_y = float(coef[1]) if len(coef) > 1 else 0.0
    return i_x, i_y


# ------------------------------------------------------------------
# two-variable reduced form of the frustration-1/2 uniaxial problem
# ------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedPotential:
    """Two-variable reduction of the f=1/2 cell with uniaxial drive.

    On the invariant plane y = 0 the three-variable potential collapses to

        u(xi, eta) = -cos(xi/sqrt2) cos(eta) - sin(xi/sqrt2) + (i_x/2) eta

    with U_full(x, 0, z) = 2 u(xi, eta) under the embedding below.

    The reduction stays evaluable for any drive, but above the depinning
    current the running trajectories it predicts are incompatible with the
    full phase flow: the y = 0 plane is only attracting while the phase is
    pinned, so treat above-threshold results as the unstable section they
    are.
    """

    i_x: float

    def energy(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        s2 = math.sqrt(2.0)
        return (-np.cos(xi / s2) * np.cos(eta) - np.sin(xi / s2)
                + 0.5 * self.i_x * eta)

    @staticmethod
    def embed(xi, eta) -> np.ndarray:
        """Map reduced coordinates to the full (x, y, z) point, y = 0."""
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        s2 = math.sqrt(2.0)
        return np.stack([-s2 * eta, np.zeros(np.broadcast(xi, eta).shape),
                         s2 * xi - math.pi], axis=-1)

    @staticmethod
    def project(x) -> tuple:
        """Inverse of :meth:`embed` on the y = 0 plane: returns (xi, eta)."""
        x = np.asarray(x, dtype=float)
        s2 = math.sqrt(2.0)
        return (x[..., 2] + math.pi) / s2, -x[..., 0] / s2


def reduced_potential_y0(i_x: float) -> ReducedPotential:
    return ReducedPotential(i_x=float(i_x))


# ------------------------------------------------------------------
# consistency checks
# ------------------------------------------------------------------

def fd_check(potential: TiltedPotential, n_points: int = 8, seed: int = 3,
             h_grad: float = 1e-6, h_hess: float = 1e-5) -> dict:
    """Central-difference check of gradient and Hessian at random points.

    Returns {"grad_rel_max": ..., "hess_abs_max": ...}: the worst relative
    gradient error (scaled by 1 + |grad|) and worst absolute Hessian error.
    """
    n = potential.n_vars
    rng = np.random.default_rng(seed)
    grad_rel = hess_abs = 0.0
    eye = np.eye(n)
    for _ in range(n_points):
        x = rng.uniform(-2 * np.pi, 2 * np.pi, n)
        g = potential.gradient(x)
        g_fd = np.array([(potential.energy(x + h_grad * eye[j])
                          - potential.energy(x - h_grad * eye[j]))
                         / (2 * h_grad) for j in range(n)])
        grad_rel = max(grad_rel,
                       float((np.abs(g_fd - g) / (1.0 + np.abs(g))).max()))
        h = potential.hessian(x)
        h_fd = np.stack([(potential.gradient(x + h_hess * eye[j])
                          - potential.gradient(x - h_hess * eye[j]))
                         / (2 * h_hess) for j in range(n)], axis=1)
        hess_abs = max(hess_abs, float(np.abs(h_fd - h).max()))
    return {"grad_rel_max": grad_rel, "hess_abs_max": hess_abs}


def periodicity_check(potential: TiltedPotential, n_points: int = 20,
                      seed: int = 5) -> float:
    """Worst residual of U(x + a_j e_j) = U(x) - g_j a_j over random x.

    Exercises the stored period vector together with the quasiperiodic tilt
    identity; finite only along axes with a finite period.
    """
    n = potential.n_vars
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        x = rng.uniform(-2 * np.pi, 2 * np.pi, n)
        u0 = potential.energy(x)
        for j in range(n):
            a = potential.period[j]
            if not math.isfinite(a):
                continue
            shifted = x.copy()
            shifted[j] += a
            worst = max(worst, abs(float(potential.energy(shifted) - u0
                                         + potential.tilt[j] * a)))
    return worst


def reduced_embedding_check(i_x: float = 0.3, n_points: int = 50,
                            seed: int = 9) -> float:
    """Worst |U_full(embed(xi, eta)) - 2 u_red(xi, eta)| over random points.

    Builds the frustration-1/2 potential at uniaxial drive ``i_x`` and
    compares it against the two-variable reduction on its invariant plane.
    """
    from .cells import builtin_cell
    p = build_potential(builtin_cell("1/2"), i_x=i_x)
    red = reduced_potential_y0(i_x)
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-2 * np.pi, 2 * np.pi, n_points)
    eta = rng.uniform(-2 * np.pi, 2 * np.pi, n_points)
    full = p.energy(ReducedPotential.embed(xi, eta))
    return float(np.abs(full - 2.0 * red.energy(xi, eta)).max())


# ------------------------------------------------------------------
# evaluation grids for plotting / scanning
# ------------------------------------------------------------------

@dataclass(frozen=True)
class SliceGrid:
    """Energies of a potential on a 1-D or 2-D axis-aligned grid."""

    axes: tuple
    coords: tuple
    values: np.ndarray
    fixed: dict

    @property
    def ndim(self) -> int:
        return len(self.axes)


def slice_grid(potential: TiltedPotential, axes, ranges, resolution,
               fixed: dict | None = None) -> SliceGrid:
    """Evaluate U on a grid over one or two axes, other variables held fixed.

    ``axes`` are axis labels or indices; ``ranges`` one (lo, hi) pair per
    axis; ``resolution`` a point count per axis (scalar or per-axis).
    Variables not listed and not in ``fixed`` are held at 0.
    """
    cell = potential.cell
    axes = tuple(axes) if not isinstance(axes, (str, int)) else (axes,)
    if not 1 <= len(axes) <= 2:
        raise BadSliceSpec(f"need 1 or 2 axes, got {len(axes)}")
    try:
        idx = [cell.axis_index(ax) for ax in axes]
    except Exception as exc:
        raise BadSliceSpec(str(exc)) from None
    if len(set(idx)) != len(idx):
        raise BadSliceSpec(f"duplicate axes in {axes!r}")

    ranges = np.atleast_2d(np.asarray(ranges, dtype=float))
    if ranges.shape != (len(axes), 2):
        raise BadSliceSpec(f"need one (lo, hi) pair per axis, got shape {ranges.shape}")
    if not (ranges[:, 1] > ranges[:, 0]).all():
        raise BadSliceSpec("each range needs hi > lo")

    res = np.broadcast_to(np.asarray(resolution, dtype=int), (len(axes),))
    if (res < 2).any():
        raise BadSliceSpec("resolution must be at least 2 points per axis")

    base = np.zeros(cell.n_vars)
    for key, val in (fixed or {}).items():
        try:
            j = cell.axis_index(key)
        except Exception as exc:
            raise BadSliceSpec(str(exc)) from None
        if j in idx:
            raise BadSliceSpec(f"axis {key!r} is both swept and fixed")
        base[j] = float(val)

    coords = tuple(np.linspace(lo, hi, n) for (lo, hi), n in zip(ranges, res))
    mesh = np.meshgrid(*coords, indexing="ij")
    pts = np.broadcast_to(base, mesh[0].shape + (cell.n_vars,)).copy()
    for j, m in zip(idx, mesh):
        pts[..., j] = m
    values = potential.energy(pts)

    names = tuple(cell.axis_labels[j] for j in idx)
    fixed_out = {cell.axis_labels[j]: float(base[j])
                 for j in range(cell.n_vars) if j not in idx}
    return SliceGrid(axes=names, coords=coords, values=values, fixed=fixed_out)
