"""Linear change of variables that turns the cell drift into a gradient flow.

In the raw per-junction variables y the deterministic drift

    F_j(y) = -sin_coeff * sum_k omega_jk sin Phi_k(y)

is not a gradient: its Jacobian is visibly asymmetric. A linear substitution
x = D y fixes this whenever D^T D = 2 S with

    S = (1/(2 sin_coeff)) * phi_dy . omega^T . (omega omega^T)^{-1},

because then the force coefficient matrix sin_coeff * D omega coincides with
the phase response Phi_dx = D^{-T} phi_dy, and the drift in x becomes
-grad U for the tilted washboard potential built in :mod:`washboard.potential`.
S itself must come out symmetric; an asymmetric result means the incidence
data is inconsistent and no such D exists.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import AffineMap, FrustrationCell
from .errors import (AsymmetricTarget, CanonicalMismatch, NotPositiveDefinite,
                     SingularIncidence)

__all__ = [
    "ExactnessReport",
    "Transform",
    "compute_target",
    "derive_transform",
    "factor_transform",
    "phase_map_x",
    "verify_exactness",
]


@dataclass(frozen=True)
class Transform:
    """Invertible substitution x = D y."""

    D: np.ndarray
    D_inv: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        for name in ("D", "D_inv", "target"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.D.shape[0]

    def to_x(self, y):
        y = np.asarray(y, dtype=float)
        return y @ self.D.T

    def to_y(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.D_inv.T


def compute_target(cell: FrustrationCell, cond_limit: float = 1e12,
                   symmetry_tol: float = 1e-12) -> np.ndarray:
    """Target matrix S with D^T D = 2 S, from the cell incidence data.

    Raises SingularIncidence when omega.omega^T is (numerically) singular and
    AsymmetricTarget when the computed S is not symmetric to ``symmetry_tol``
    relative to its largest entry.
    """
    omega, phi_dy = cell.omega, cell.phi_dy
    gram = omega @ omega.T
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularIncidence(
            f"omega.omega^T condition number {cond:.3g} exceeds {cond_limit:.3g}")
    s = phi_dy @ omega.T @ np.linalg.inv(gram) / (2.0 * cell.sin_coeff)
    scale = max(float(np.abs(s).max()), 1.0)
    asym = float(np.abs(s - s.T).max())
    if asym > symmetry_tol * scale:
        raise AsymmetricTarget(
            f"target matrix asymmetry {asym:.3e} (scale {scale:.3g}); "
            "no symmetrizing transform exists for this incidence data")
    return 0.5 * (s + s.T)


def factor_transform(target: np.ndarray, canonical: np.ndarray | None = None,
                     tol: float = 1e-10) -> Transform:
    """Factor D^T D = 2 S into a concrete transform.

    With ``canonical`` given, verify it satisfies the equation (within ``tol``,
    absolute, entrywise) and use it as-is; otherwise take the upper-triangular
    Cholesky factor. Any orthogonal rotation Q D of a valid D is equally
    valid -- downstream results never depend on the choice.
    """
    target = np.asarray(target, dtype=float)
    doubled = 2.0 * target
    if canonical is not None:
        d = np.asarray(canonical, dtype=float)
        resid = float(np.abs(d.T @ d - doubled).max())
        if resid > tol:
            raise CanonicalMismatch(
                f"canonical D fails D^T D = 2 S by {resid:.3e} (tol {tol:.1e})")
    else:
        try:
            lower = np.linalg.cholesky(doubled)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                "2 S is not positive definite; the incidence data admits no "
                "real invertible symmetrizing transform") from None
        d = lower.T
    return Transform(D=d, D_inv=np.linalg.inv(d), target=target)


def derive_transform(cell: FrustrationCell, use_canonical: bool = True,
                     cond_limit: float = 1e12) -> Transform:
    """compute_target + factor_transform, preferring the cell's canonical D."""
    target = compute_target(cell, cond_limit=cond_limit)
    canonical = cell.canonical_transform if use_canonical else None
    return factor_transform(target, canonical=canonical)


def phase_map_x(cell: FrustrationCell, transform: Transform) -> AffineMap:
    """Affine map x -> Phi; its matrix transpose is Phi_dx = D^{-T} phi_dy."""
    return AffineMap(cell.phi_dy.T @ transform.D_inv, cell.phase_offsets_y)


@dataclass(frozen=True)
class ExactnessReport:
    """Jacobian-symmetry evidence that the transformed drift is a gradient."""

    coefficient_mismatch: float
    x_asymmetry_max: float
    y_asymmetry_max: float
    n_points: int

    @property
    def exact(self) -> bool:
        return self.coefficient_mismatch < 1e-10 and self.x_asymmetry_max < 1e-10


def verify_exactness(cell: FrustrationCell, transform: Transform,
                     n_points: int = 20, seed: int = 1) -> ExactnessReport:
    """Probe drift Jacobians at random configurations.

    ``coefficient_mismatch`` compares sin_coeff * D omega against the phase
    response in x; ``x_asymmetry_max`` / ``y_asymmetry_max`` are the worst
    entrywise asymmetries of the drift Jacobian in the transformed and raw
    variables. For a correct transform the first two are at round-off while
    the raw asymmetry stays O(1).
    """
    c = cell.sin_coeff
    coeff = c * transform.D @ cell.omega
    a_x = transform.D_inv.T @ cell.phi_dy
    mismatch = float(np.abs(coeff - a_x).max())

    rng = np.random.default_rng(seed)
    pm_x = phase_map_x(cell, transform)
    worst_x = worst_y = 0.0
    for _ in range(n_points):
        x = rng.uniform(-2 * np.pi, 2 * np.pi, cell.n_vars)
        cos_x = np.cos(pm_x(x))
        jac_x = coeff @ np.diag(cos_x) @ a_x.T
        worst_x = max(worst_x, float(np.abs(jac_x - jac_x.T).max()))

        y = transform.to_y(x)
        cos_y = np.cos(cell.phase_offsets_y + y @ cell.phi_dy)
        jac_y = c * cell.omega @ np.diag(cos_y) @ cell.phi_dy.T
        worst_y = max(worst_y, float(np.abs(jac_y - jac_y.T).max()))

    return ExactnessReport(coefficient_mismatch=mismatch,
                           x_asymmetry_max=worst_x,
                           y_asymmetry_max=worst_y,
                           n_points=n_points)
