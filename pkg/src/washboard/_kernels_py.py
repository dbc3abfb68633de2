"""Pure-NumPy time-stepping kernels.

Reference implementations of the three integrators; the compiled module
``washboard._kernels`` exposes the same signatures and must stay
interchangeable (same noise consumption pattern, same recording layout).
Noise is pre-drawn from the caller's Generator in fixed batches of
``CHUNK`` steps so that both backends consume the stream identically.

All kernels record the initial state as frame 0 and then every
``record_stride``-th step, and raise NumericalBlowup as soon as any
coordinate leaves [-blowup_limit, blowup_limit] or stops being finite.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NumericalBlowup

CHUNK = 8192

__all__ = ["CHUNK", "hamiltonian", "overdamped", "underdamped"]


class _NoiseStream:
    """Standard-normal increments drawn in fixed-size batches."""

    def __init__(self, rng, n_vars: int):
        self.rng = rng
        self.n = n_vars
        self.batch = None
        self.pos = CHUNK

    def next(self) -> np.ndarray:
        if self.pos >= CHUNK:
            self.batch = self.rng.standard_normal((CHUNK, self.n))
            self.pos = 0
        row = self.batch[self.pos]
        self.pos += 1
        return row


def _check_state(x: np.ndarray, step: int, blowup_limit: float) -> None:
    # NaN compares false, so this also catches non-finite coordinates
    if not np.all(np.abs(x) < blowup_limit):
        raise NumericalBlowup(
            f"state left [-{blowup_limit:g}, {blowup_limit:g}] at step {step}",
            step=step)


def overdamped(a_matrix, offsets, tilt, noise_l, x0, dt, n_steps,
               record_stride, rng=None, blowup_limit=1e8):
    """Euler-Maruyama for dx = (tilt - A sin(offsets + A^T x)) dt + L dW."""
    a = np.asarray(a_matrix, dtype=float)
    at = a.T.copy()
    offsets = np.asarray(offsets, dtype=float)
    tilt = np.asarray(tilt, dtype=float)
    x = np.array(x0, dtype=float)
    n = x.size

    scaled_l = None
    stream = None
    if noise_l is not None:
        scaled_l = math.sqrt(dt) * np.asarray(noise_l, dtype=float)
        stream = _NoiseStream(rng, n)

    n_rec = n_steps // record_stride
    xs = np.empty((n_rec + 1, n))
    xs[0] = x
    for step in range(1, n_steps + 1):
        drift = tilt - np.sin(offsets + at @ x) @ a.T
        x = x + dt * drift
        if stream is not None:
            x = x + scaled_l @ stream.next()
        _check_state(x, step, blowup_limit)
        if step % record_stride == 0:
            xs[step // record_stride] = x
    return xs


def underdamped(a_matrix, offsets, tilt, noise_l, beta_c, x0, v0, dt, n_steps,
                record_stride, rng=None, blowup_limit=1e8):
    """Stochastic Heun for the inertial Langevin system.

    beta_c x'' = -x' - grad U + noise, split as x' = v,
    v' = (-v - grad U)/beta_c with the same noise increment (scaled by
    1/beta_c) applied in predictor and corrector.
    """
    a = np.asarray(a_matrix, dtype=float)
    at = a.T.copy()
    offsets = np.asarray(offsets, dtype=float)
    tilt = np.asarray(tilt, dtype=float)
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    n = x.size
    inv_b = 1.0 / beta_c

    scaled_l = None
    stream = None
    if noise_l is not None:
        scaled_l = math.sqrt(dt) * inv_b * np.asarray(noise_l, dtype=float)
        stream = _NoiseStream(rng, n)

    n_rec = n_steps // record_stride
    xs = np.empty((n_rec + 1, n))
    vs = np.empty((n_rec + 1, n))
    xs[0], vs[0] = x, v
    for step in range(1, n_steps + 1):
        kick = scaled_l @ stream.next() if stream is not None else 0.0
        grad1 = np.sin(offsets + at @ x) @ a.T - tilt
        f1v = (-v - grad1) * inv_b
        x_pred = x + dt * v
        v_pred = v + dt * f1v + kick
        grad2 = np.sin(offsets + at @ x_pred) @ a.T - tilt
        f2v = (-v_pred - grad2) * inv_b
        x = x + 0.5 * dt * (v + v_pred)
        v = v + 0.5 * dt * (f1v + f2v) + kick
        _check_state(x, step, blowup_limit)
        if step % record_stride == 0:
            xs[step // record_stride] = x
            vs[step // record_stride] = v
    return xs, vs


def hamiltonian(a_matrix, offsets, tilt, beta_c, x0, v0, dt, n_steps,
                record_stride, blowup_limit=1e8):
    """Velocity Verlet for the undamped, noiseless system with mass beta_c."""
    a = np.asarray(a_matrix, dtype=float)
    at = a.T.copy()
    offsets = np.asarray(offsets, dtype=float)
    tilt = np.asarray(tilt, dtype=float)
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    n = x.size
    half = 0.5 * dt / beta_c

    n_rec = n_steps // record_stride
    xs = np.empty((n_rec + 1, n))
    vs = np.empty((n_rec + 1, n))
    xs[0], vs[0] = x, v
    grad = np.sin(offsets + at @ x) @ a.T - tilt
    for step in range(1, n_steps + 1):
        v = v - half * grad
        x = x + dt * v
        grad = np.sin(offsets + at @ x) @ a.T - tilt
        v = v - half * grad
        _check_state(x, step, blowup_limit)
        if step % record_stride == 0:
            xs[step // record_stride] = x
            vs[step // record_stride] = v
    return xs, vs
