"""Time evolution in the tilted washboard potential.

Three schemes share one entry point, :func:`simulate`:

* ``overdamped``   - Euler-Maruyama for x' = -grad U + noise,
* ``underdamped``  - stochastic Heun for beta_c x'' = -x' - grad U + noise,
* ``hamiltonian``  - velocity Verlet for beta_c x'' = -grad U (no noise),

with time in units of the single-junction relaxation time and the noise
strength omega = sqrt(2 k_B T / E_J) entering through the potential's noise
covariance. Runs that blow up numerically are retried with the step halved
(and counts doubled, so recorded frames keep their times) up to
``blowup_retries`` times.

Reproducibility: a run is determined by (seed, scheme, parameters, backend);
the same seed replays the identical noise stream.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .errors import (EmptyTrajectory, InvalidConfig, MissingVelocities,
                     NotPSD, NumericalBlowup)
from .potential import TiltedPotential

_SCHEMES = ("overdamped", "underdamped", "hamiltonian")

__all__ = [
    "SimulationConfig",
    "Trajectory",
    "energy_series",
    "mean_voltage",
    "noise_factor",
    "simulate",
]


@dataclass(frozen=True)
class SimulationConfig:
    """Validated parameters of one integration run.

    ``currents`` and ``omega_noise`` are optional overrides; None means
    "use whatever the potential was built with".
    """

    scheme: str
    n_steps: int
    dt: float = 1e-3
    beta_c: float = 0.0
    omega_noise: float | None = None
    currents: tuple | None = None
    seed: int | None = None
    record_stride: int = 1
    blowup_retries: int = 3

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise InvalidConfig(f"unknown scheme {self.scheme!r}; "
                                f"choose from {_SCHEMES}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidConfig(f"dt must be positive and finite, got {self.dt}")
        if self.n_steps < 1:
            raise InvalidConfig(f"n_steps must be >= 1, got {self.n_steps}")
        if self.record_stride < 1:
            raise InvalidConfig(f"record_stride must be >= 1, got {self.record_stride}")
        if self.n_steps % self.record_stride:
            raise InvalidConfig(
                f"n_steps ({self.n_steps}) must be a multiple of "
                f"record_stride ({self.record_stride})")
        if self.blowup_retries < 0:
            raise InvalidConfig("blowup_retries must be >= 0")
        if self.scheme == "overdamped":
            if self.beta_c:
                raise InvalidConfig("overdamped scheme has no inertia; "
                                    "beta_c must be 0")
        else:
            if not self.beta_c > 0:
                raise InvalidConfig(f"{self.scheme} scheme needs beta_c > 0")
        if self.scheme == "hamiltonian" and self.omega_noise:
            raise InvalidConfig("hamiltonian scheme is noiseless; "
                                "omega_noise must be 0 or unset")
        if self.currents is not None:
            cur = tuple(float(c) for c in self.currents)
            if len(cur) == 1:
                cur = (cur[0], 0.0)
            if len(cur) != 2:
                raise InvalidConfig("currents must be (i_x, i_y)")
            object.__setattr__(self, "currents", cur)
        if self.omega_noise is not None and self.omega_noise < 0:
            raise InvalidConfig("omega_noise must be >= 0")


@dataclass(frozen=True)
class Trajectory:
    """Recorded frames of one run; ``config`` holds the effective parameters
    (after any blowup retries rescaled dt / n_steps / record_stride)."""

    times: np.ndarray
    states: np.ndarray
    velocities: np.ndarray | None
    seed_used: int
    config: SimulationConfig
    energy: np.ndarray | None = None
    retries_used: int = 0

    def __post_init__(self):
        for name in ("times", "states", "velocities", "energy"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.ascontiguousarray(arr, dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_frames(self) -> int:
        return self.states.shape[0]

    @property
    def n_vars(self) -> int:
        return self.states.shape[1]


def noise_factor(cov: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Matrix L with L L^T equal to the (PSD) covariance ``cov``.

    Diagonal covariances factor entrywise; otherwise Cholesky, falling back
    to an eigendecomposition for semidefinite input. Raises NotPSD when the
    covariance has an eigenvalue below ``-tol``.
    """
    cov = np.asarray(cov, dtype=float)
    off = cov - np.diag(np.diag(cov))
    if not off.any():
        d = np.diag(cov)
        if (d < -tol).any():
            raise NotPSD(f"negative variance {d.min():.3e} on the diagonal")
        return np.diag(np.sqrt(np.clip(d, 0.0, None)))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        lam, vec = np.linalg.eigh(0.5 * (cov + cov.T))
        if lam.min() < -tol:
            raise NotPSD(f"covariance eigenvalue {lam.min():.3e} < 0") from None
        return vec @ np.diag(np.sqrt(np.clip(lam, 0.0, None)))


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy)


def simulate(potential: TiltedPotential, config: SimulationConfig,
             x0=None, v0=None, backend: str | None = None) -> Trajectory:
    """Integrate one trajectory; see the module docstring for the schemes.

    ``x0`` defaults to the origin; ``v0`` (velocity schemes only) to rest.
    Config overrides for currents / omega_noise rebuild the potential before
    stepping. On NumericalBlowup the run restarts from scratch with dt/2 and
    doubled counts, up to ``config.blowup_retries`` times.
    """
    if config.currents is not None or config.omega_noise is not None:
        i_x = i_y = None
        if config.currents is not None:
            i_x, i_y = config.currents
        potential = potential.with_params(i_x=i_x, i_y=i_y,
                                          omega_noise=config.omega_noise)
    omega = potential.omega_noise

    n = potential.n_vars
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise InvalidConfig(f"x0 must have shape ({n},), got {x0.shape}")
    if config.scheme == "overdamped":
        if v0 is not None:
            raise InvalidConfig("overdamped scheme takes no initial velocity")
    else:
        v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float)
        if v0.shape != (n,):
            raise InvalidConfig(f"v0 must have shape ({n},), got {v0.shape}")
    if config.scheme == "hamiltonian" and omega:
        raise InvalidConfig("hamiltonian scheme is noiseless but the "
                            f"potential carries omega_noise={omega}")

    noise_l = noise_factor(potential.noise_cov) if omega > 0 else None
    kernels = _backend.default_kernels() if backend is None else _backend.resolve(backend)
    a = np.ascontiguousarray(potential.phase_map.matrix.T)
    offsets = potential.phase_map.offsets
    tilt = potential.tilt
    seed_used = config.seed if config.seed is not None else _fresh_seed()

    dt, n_steps, stride = config.dt, config.n_steps, config.record_stride
    retries = 0
    while True:
        rng = np.random.default_rng(seed_used) if noise_l is not None else None
        try:
            if config.scheme == "overdamped":
                xs = kernels.overdamped(a, offsets, tilt, noise_l, x0, dt,
                                        n_steps, stride, rng)
                vs = None
            elif config.scheme == "underdamped":
                xs, vs = kernels.underdamped(a, offsets, tilt, noise_l,
                                             config.beta_c, x0, v0, dt,
                                             n_steps, stride, rng)
            else:
                xs, vs = kernels.hamiltonian(a, offsets, tilt, config.beta_c,
                                             x0, v0, dt, n_steps, stride)
            break
        except NumericalBlowup:
            if retries >= config.blowup_retries:
                raise
            retries += 1
            dt, n_steps, stride = dt / 2.0, n_steps * 2, stride * 2

    effective = dataclasses.replace(config, dt=dt, n_steps=n_steps,
                                    record_stride=stride, seed=seed_used)
    times = np.arange(xs.shape[0]) * (dt * stride)
    return Trajectory(times=times, states=xs, velocities=vs,
                      seed_used=seed_used, config=effective,
                      retries_used=retries)


def _window_start(n_frames: int, window: float) -> int:
    if not 0.0 < window <= 1.0:
        raise InvalidConfig(f"window must be in (0, 1], got {window}")
    return min(n_frames - 2, int(math.floor((1.0 - window) * (n_frames - 1))))


def mean_voltage(traj: Trajectory, window: float = 0.5) -> np.ndarray:
    """Time-averaged velocity over the trailing ``window`` fraction of a run.

    The junction voltage is proportional to the phase velocity, so this is
    the voltage observable. Velocity schemes average the stored velocities;
    the overdamped scheme uses end-to-end displacement over the window.
    """
    if traj.n_frames < 2:
        raise EmptyTrajectory("need at least two frames for a mean voltage")
    k = _window_start(traj.n_frames, window)
    if traj.velocities is not None:
        return traj.velocities[k:].mean(axis=0)
    dt_span = traj.times[-1] - traj.times[k]
    return (traj.states[-1] - traj.states[k]) / dt_span


def energy_series(potential: TiltedPotential, traj: Trajectory,
                  include_kinetic: bool | None = None) -> np.ndarray:
    """Energy at each recorded frame.

    ``include_kinetic`` None adds the kinetic term exactly when the
    trajectory carries velocities and the run had inertia; forcing it True
    without stored velocities raises MissingVelocities.
    """
    u = potential.energy(traj.states)
    beta_c = traj.config.beta_c
    if include_kinetic is None:
        include_kinetic = traj.velocities is not None and beta_c > 0
    if not include_kinetic:
        return u
    if traj.velocities is None:
        raise MissingVelocities("trajectory has no stored velocities")
    return u + 0.5 * beta_c * (traj.velocities ** 2).sum(axis=1)
