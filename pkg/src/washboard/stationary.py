"""Fixed points, critical currents, and the pinned-phase boundary.

Zero-velocity states of the overdamped flow are stationary points of the
tilted potential; this module locates them (damped Newton with an Armijo
line search on the squared gradient), classifies them by Hessian spectrum,
and derives the bias currents at which the pinned minima disappear.

For the frustration-1/2 cell with in-plane drive (i_x, i_y) = (I, R I) the
stationarity conditions reduce to closed trigonometric form, the uniaxial
critical current has an exact expression, and the depinning boundary in the
(R, I) plane is the discriminant locus of a cubic. Both analytic routes are
implemented together with a numerical continuation of the pinned minimum so
they can be cross-checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .cells import builtin_cell
from .errors import NoConvergence, RootBranchLost
from .potential import TiltedPotential, build_potential

__all__ = [
    "CriticalCurrentResult",
    "FixedPoint",
    "PinnedBoundaryCurve",
    "biaxial_current_relation",
    "boundary_current_discriminant",
    "classify_hessian",
    "companion_report",
    "critical_current_uniaxial",
    "depinning_cubic",
    "depinning_discriminant",
    "energy_barrier",
    "find_fixed_point",
    "find_ground_state",
    "halfcell_stationarity_residual",
    "pinned_boundary",
    "uniaxial_current_relation",
]

_SQRT2 = math.sqrt(2.0)

# exact uniaxial critical values for the frustration-1/2 cell
CRITICAL_CURRENT_HALF = 2.0 * (_SQRT2 - 1.0)            # == sqrt(12 - 8 sqrt 2)
CRITICAL_X_HALF = math.acos(2.0 * _SQRT2 - 3.0) / _SQRT2
CRITICAL_Z_HALF = -2.0 * math.asin(math.sqrt((2.0 - _SQRT2) / 2.0))


# ------------------------------------------------------------------
# fixed points
# ------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPoint:
    """A stationary point of the tilted potential."""

    x: np.ndarray
    classification: str
    eigenvalues: np.ndarray
    residual: float
    iterations: int = 0

    def __post_init__(self):
        for name in ("x", "eigenvalues"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def is_minimum(self) -> bool:
        return self.classification == "minimum"


def classify_hessian(eigenvalues, degenerate_tol: float = 1e-6) -> str:
    """minimum / maximum / saddle / degenerate from the Hessian spectrum."""
    eig = np.asarray(eigenvalues, dtype=float)
    if np.abs(eig).min() < degenerate_tol:
        return "degenerate"
    if (eig > 0).all():
        return "minimum"
    if (eig < 0).all():
        return "maximum"
    return "saddle"


def find_fixed_point(potential: TiltedPotential, x0, tol: float = 1e-10,
                     max_iter: int = 200) -> FixedPoint:
    """Damped Newton iteration for grad U = 0 starting at ``x0``.

    The step is the Newton direction (least-squares direction when the
    Hessian is singular), backtracked with an Armijo condition on the merit
    0.5 |grad U|^2 until the infinity norm of the gradient drops below
    ``tol``. Raises NoConvergence when the iteration stalls or runs out.
    """
    c1 = 1e-4
    x = np.array(x0, dtype=float)
    grad = potential.gradient(x)
    for it in range(1, max_iter + 1):
        if np.abs(grad).max() < tol:
            break
        hess = potential.hessian(x)
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
        merit = 0.5 * float(grad @ grad)
        t = 1.0
        while True:
            trial = x + t * step
            grad_t = potential.gradient(trial)
            if 0.5 * float(grad_t @ grad_t) <= merit * (1.0 - 2.0 * c1 * t):
                x, grad = trial, grad_t
                break
            t *= 0.5
            if t < 1e-8:
                raise NoConvergence(
                    f"line search stalled at iteration {it}, "
                    f"|grad|={math.sqrt(2.0 * merit):.3e}")
    else:
        if np.abs(grad).max() >= tol:
            raise NoConvergence(
                f"no fixed point within {max_iter} iterations from {np.asarray(x0)}")
        it = max_iter
    eig = np.linalg.eigvalsh(potential.hessian(x))
    return FixedPoint(x=x, classification=classify_hessian(eig),
                      eigenvalues=eig, residual=float(np.abs(grad).max()),
                      iterations=it)


def find_ground_state(potential: TiltedPotential, resolution: int = 41,
                      tol: float = 1e-10) -> FixedPoint:
    """Global minimum over one period box: dense grid scan plus Newton polish.

    The scan covers [-a_j/2, a_j/2) per axis with ``resolution`` points
    (aperiodic axes fall back to a 4.pi window); the best grid point seeds
    :func:`find_fixed_point`. With a tilt the result is the periodic local
    minimum, since the full potential is unbounded below along the tilt.
    """
    n = potential.n_vars
    spans = np.where(np.isfinite(potential.period), potential.period, 4.0 * np.pi)
    axes = [np.linspace(-0.5 * a, 0.5 * a, resolution, endpoint=False)
            for a in spans]

    if n == 1:
        pts = axes[0][:, None]
        u = potential.energy(pts)
        best = pts[int(np.argmin(u))]
    else:
        rest = np.meshgrid(*axes[1:], indexing="ij")
        tail = np.stack([r.ravel() for r in rest], axis=-1)
        block = np.empty((tail.shape[0], n))
        block[:, 1:] = tail
        best, best_u = None, np.inf
        for v0 in axes[0]:
            block[:, 0] = v0
            u = potential.energy(block)
            i = int(np.argmin(u))
            if u[i] < best_u:
                best_u = float(u[i])
                best = block[i].copy()

    fp = find_fixed_point(potential, best, tol=tol)
    if fp.classification != "minimum":
        # the argmin landed on a ridge between basins; nudge and retry
        fp = find_fixed_point(potential, best + 1e-3, tol=tol)
    return fp


def energy_barrier(potential: TiltedPotential, a, b) -> float:
    """U(b) - U(a); e.g. saddle minus minimum for an escape barrier."""
    return float(potential.energy(b) - potential.energy(a))


# ------------------------------------------------------------------
# closed-form stationarity for the frustration-1/2 cell
# ------------------------------------------------------------------

def halfcell_stationarity_residual(x, i_x: float = 0.0, i_y: float = 0.0) -> np.ndarray:
    """Gradient of the frustration-1/2 potential in closed trigonometric form.

    Vanishes exactly at stationary points; agrees with the matrix-built
    gradient to round-off and serves as an independent check of it.
    """
    x = np.asarray(x, dtype=float)
    xv, yv, zv = x[..., 0], x[..., 1], x[..., 2]
    rx = -_SQRT2 * np.sin(xv / _SQRT2) * np.sin(zv / 2.0) - i_x / _SQRT2
    ry = _SQRT2 * np.sin(yv / _SQRT2) * np.cos(zv / 2.0) - i_y / _SQRT2
    rz = (np.cos(xv / _SQRT2) * np.cos(zv / 2.0)
          + np.cos(yv / _SQRT2) * np.sin(zv / 2.0))
    return np.stack([rx, ry, rz], axis=-1)


def companion_report(x, i_x: float, i_y: float) -> dict:
    """Residuals of three candidate relations among stationary coordinates.

    Keys: ``tan_half_z`` for tan(z/2) = -cos(x/sqrt2)/cos(y/sqrt2),
    ``sin_double_angle`` for sin(sqrt2 y) = (i_y/i_x) sin(sqrt2 x), and
    ``sin_ratio`` for the sometimes-quoted sin(x/sqrt2)/sin(y/sqrt2) =
    (i_y/i_x)^2, which does NOT hold at stationary points (kept here so the
    failure is measurable rather than silent).
    """
    x = np.asarray(x, dtype=float)
    xv, yv, zv = float(x[0]), float(x[1]), float(x[2])
    ratio = i_y / i_x if i_x else math.nan
    rep = {}
    rep["tan_half_z"] = abs(math.tan(zv / 2.0)
                            + math.cos(xv / _SQRT2) / math.cos(yv / _SQRT2))
    rep["sin_double_angle"] = abs(math.sin(_SQRT2 * yv) - ratio * math.sin(_SQRT2 * xv))
    denom = math.sin(yv / _SQRT2)
    rep["sin_ratio"] = (abs(math.sin(xv / _SQRT2) / denom - ratio ** 2)
                        if abs(denom) > 1e-12 else math.inf)
    return rep


def uniaxial_current_relation(xv) -> np.ndarray:
    """Longitudinal current sustaining a stationary point at coordinate x.

    Uniaxial drive (i_y = 0): the stationary branch through the ground state
    satisfies I(x) = sin(sqrt2 x) / sqrt(1 + cos^2(x/sqrt2)).
    """
    return biaxial_current_relation(xv, 0.0)


def biaxial_current_relation(xv, r: float) -> np.ndarray:
    """I(x; R) for biaxial drive with current ratio R = i_y/i_x.

    Stationary-branch relation: the transverse coordinate obeys
    sin(sqrt2 y) = R sin(sqrt2 x) and z follows from the tan(z/2) relation,
    leaving a single equation for the drive amplitude.
    """
    xv = np.asarray(xv, dtype=float)
    s = np.sin(_SQRT2 * xv)
    inner = np.sqrt(1.0 - (r * s) ** 2)
    return s / np.sqrt(0.5 * (1.0 + inner) + np.cos(xv / _SQRT2) ** 2)


@dataclass(frozen=True)
class CriticalCurrentResult:
    """Uniaxial depinning threshold: closed form next to a numeric check."""

    i_c: float
    x: float
    z: float
    i_c_numeric: float
    x_numeric: float
    z_numeric: float

    @property
    def max_deviation(self) -> float:
        return max(abs(self.i_c - self.i_c_numeric),
                   abs(self.x - self.x_numeric),
                   abs(self.z - self.z_numeric))


def critical_current_uniaxial() -> CriticalCurrentResult:
    """Depinning current of the frustration-1/2 cell under uniaxial drive.

    Closed forms: I_c = 2 (sqrt2 - 1), x_c = arccos(2 sqrt2 - 3)/sqrt2, and
    z_c = -2 arcsin(sqrt((2 - sqrt2)/2)). The numeric values maximize
    :func:`uniaxial_current_relation` over one branch.
    """
    res = minimize_scalar(lambda v: -uniaxial_current_relation(v),
                          bounds=(0.05, math.pi / _SQRT2 - 0.05),
                          method="bounded", options={"xatol": 1e-12})
    x_num = float(res.x)
    z_num = 2.0 * math.atan(-math.cos(x_num / _SQRT2))
    return CriticalCurrentResult(
        i_c=CRITICAL_CURRENT_HALF, x=CRITICAL_X_HALF, z=CRITICAL_Z_HALF,
        i_c_numeric=float(-res.fun), x_numeric=x_num, z_numeric=z_num)


# ------------------------------------------------------------------
# pinned-phase boundary in the (R, I) plane
# ------------------------------------------------------------------

def depinning_cubic(i: float, r: float) -> np.ndarray:
    """Monic cubic in Y = cos(sqrt2 x) whose real-root structure marks depinning."""
    p = i * i - 1.0
    q = (i * i - 1.0) + 0.25 * i ** 4 * (1.0 - r * r)
    c0 = (i * i - 1.0) ** 2 - 0.25 * i ** 4 * (1.0 - r * r)
    return np.array([1.0, p, q, c0])


def depinning_discriminant(i, r: float):
    """Discriminant of :func:`depinning_cubic`; positive while pinned.

    Three distinct real roots (positive discriminant) leave a stationary
    branch with a minimum; the sign change is the depinning boundary.
    """
    i = np.asarray(i, dtype=float)
    p = i * i - 1.0
    q = p + 0.25 * i ** 4 * (1.0 - r * r)
    c0 = p * p - 0.25 * i ** 4 * (1.0 - r * r)
    return (18.0 * p * q * c0 - 4.0 * p ** 3 * c0
            + p * p * q * q - 4.0 * q ** 3 - 27.0 * c0 * c0)


def _bisect_sign_change(fn, lo: float, hi: float, tol: float,
                        what: str) -> float:
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise RootBranchLost(
            f"{what}: no sign change in [{lo:.6g}, {hi:.6g}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def boundary_current_discriminant(r: float, bracket=(0.5, 1.2),
                                  tol: float = 1e-10) -> float:
    """Boundary current at ratio ``r`` from the discriminant sign change."""
    return _bisect_sign_change(lambda i: float(depinning_discriminant(i, r)),
                               bracket[0], bracket[1], tol,
                               f"discriminant at r={r:.4g}")


class _MinimumTracker:
    """Continuation of the pinned minimum of the full three-variable potential."""

    def __init__(self):
        self._cell = builtin_cell("1/2")
        self._march = (0.2, 0.35, 0.5, 0.65, 0.8)

    def _potential(self, i: float, r: float) -> TiltedPotential:
        return build_potential(self._cell, i_x=i, i_y=r * i)

    def seed(self, i: float, r: float) -> np.ndarray:
        """Minimum at (i, r) reached by marching up from the untilted ground state."""
        x = np.array([0.0, 0.0, -math.pi / 2.0])
        for step in [s for s in self._march if s < i - 1e-12] + [i]:
            x = find_fixed_point(self._potential(step, r), x).x
        return x

    def minimum_exists(self, i: float, r: float, seed: np.ndarray) -> tuple:
        """(pinned?, refined seed). Jumping off the branch counts as depinned."""
        p = self._potential(i, r)
        try:
            fp = find_fixed_point(p, seed, max_iter=100)
        except NoConvergence:
            return False, seed
        if fp.classification != "minimum":
            return False, seed
        span = np.where(np.isfinite(p.period), p.period, 4.0 * np.pi)
        if (np.abs(fp.x - seed) > 0.5 * span).any():
            return False, seed
        return True, fp.x


def pinned_boundary(r_values=None, bisect_tol: float = 1e-10,
                    cross_validate: bool = True, cont_tol: float = 1e-6,
                    warm_width: float = 0.05) -> "PinnedBoundaryCurve":
    """Depinning boundary I(R) for the frustration-1/2 cell, 0 <= R <= 1.

    The primary curve comes from the cubic discriminant (bisection to
    ``bisect_tol``). With ``cross_validate`` a second, independent curve is
    computed by numerical continuation of the full potential's pinned
    minimum, marching R downward from 1 and re-bracketing each boundary
    around the previous one (expanding the bracket when the sign change
    escapes it). ``residual`` holds the pointwise gap, NaN when skipped.
    """
    if r_values is None:
        r_values = np.linspace(0.0, 1.0, 101)
    r_values = np.asarray(r_values, dtype=float)
    i_disc = np.array([boundary_current_discriminant(r, tol=bisect_tol)
                       for r in r_values])

    i_cont = np.full(r_values.shape, np.nan)
    if cross_validate:
        tracker = _MinimumTracker()
        order = np.argsort(r_values)[::-1]          # march R = 1 -> 0
        prev = None
        for k in order:
            r = float(r_values[k])
            if prev is None:
                lo, hi = 0.5, 1.2
            else:
                lo, hi = prev - warm_width, prev + warm_width
            for attempt in range(8):
                try:
                    state = {"x": tracker.seed(lo, r)}

                    def pinned(i):
                        ok, refined = tracker.minimum_exists(i, r, state["x"])
                        if ok:
                            state["x"] = refined
                        return 1.0 if ok else -1.0

                    i_cont[k] = _bisect_sign_change(
                        pinned, lo, hi, cont_tol, f"continuation at r={r:.4g}")
                    break
                except (RootBranchLost, NoConvergence):
                    lo, hi = lo - warm_width, hi + warm_width
                    if attempt == 7:
                        raise
            prev = float(i_cont[k])

    residual = np.abs(i_disc - i_cont)
    return PinnedBoundaryCurve(r=r_values, i_disc=i_disc, i_cont=i_cont,
                               residual=residual)


@dataclass(frozen=True)
class PinnedBoundaryCurve:
    """Depinning boundary sampled on a grid of current ratios."""

    r: np.ndarray
    i_disc: np.ndarray
    i_cont: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        for name in ("r", "i_disc", "i_cont", "residual"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def max_residual(self) -> float:
        vals = self.residual[np.isfinite(self.residual)]
        return float(vals.max()) if vals.size else math.nan

    @property
    def monotone_increasing(self) -> bool:
        order = np.argsort(self.r)
        return bool((np.diff(self.i_disc[order]) > 0).all())
