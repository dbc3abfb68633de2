# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-stepping kernels.

Drop-in replacement for :mod:`washboard._kernels_py`: same signatures, same
noise-batch consumption (full batches of CHUNK standard-normal steps drawn
from the caller's Generator), same recording layout, same blowup policy.
"""

from libc.math cimport fabs, sin, sqrt

import numpy as np

from .errors import NumericalBlowup

CHUNK = 8192


cdef inline void _gradient(const double[:, ::1] a, const double[::1] offsets,
                           const double[::1] tilt, const double[::1] x,
                           double[::1] out) noexcept:
    """out = A sin(offsets + A^T x) - tilt."""
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1]
    cdef Py_ssize_t j, k
    cdef double phi, s
    for j in range(n):
        out[j] = -tilt[j]
    for k in range(m):
        phi = offsets[k]
        for j in range(n):
            phi += a[j, k] * x[j]
        s = sin(phi)
        for j in range(n):
            out[j] += a[j, k] * s


cdef inline void _blowup_check(const double[::1] x, long step,
                               double blowup_limit):
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        if not (fabs(x[i]) < blowup_limit):
            raise NumericalBlowup(
                f"state left [-{blowup_limit:g}, {blowup_limit:g}] "
                f"at step {step}", step=step)


def overdamped(a_matrix, offsets, tilt, noise_l, x0, double dt, long n_steps,
               long record_stride, rng=None, double blowup_limit=1e8):
    """Euler-Maruyama for dx = (tilt - A sin(offsets + A^T x)) dt + L dW."""
    cdef const double[:, ::1] a = np.ascontiguousarray(a_matrix, dtype=np.float64)
    cdef const double[::1] offs = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(tilt, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef bint with_noise = noise_l is not None
    cdef double[:, ::1] lmat
    cdef double[:, ::1] chunk
    if with_noise:
        lmat = sqrt(dt) * np.ascontiguousarray(noise_l, dtype=np.float64)
        chunk = rng.standard_normal((CHUNK, n))
    cdef Py_ssize_t pos = 0
    cdef long n_rec = n_steps // record_stride
    xs = np.empty((n_rec + 1, n))
    cdef double[:, ::1] xs_mv = xs
    cdef double[::1] grad = np.empty(n)
    cdef long step
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        xs_mv[0, i] = x[i]
    for step in range(1, n_steps + 1):
        _gradient(a, offs, g, x, grad)
        for i in range(n):
            x[i] -= dt * grad[i]
        if with_noise:
            if pos >= CHUNK:
                chunk = rng.standard_normal((CHUNK, n))
                pos = 0
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += lmat[i, j] * chunk[pos, j]
                x[i] += acc
            pos += 1
        _blowup_check(x, step, blowup_limit)
        if step % record_stride == 0:
            for i in range(n):
                xs_mv[step // record_stride, i] = x[i]
    return xs


def underdamped(a_matrix, offsets, tilt, noise_l, double beta_c, x0, v0,
                double dt, long n_steps, long record_stride, rng=None,
                double blowup_limit=1e8):
    """Stochastic Heun for beta_c x'' = -x' - grad U + noise."""
    cdef const double[:, ::1] a = np.ascontiguousarray(a_matrix, dtype=np.float64)
    cdef const double[::1] offs = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(tilt, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] v = np.array(v0, dtype=np.float64)
    cdef double inv_b = 1.0 / beta_c
    cdef bint with_noise = noise_l is not None
    cdef double[:, ::1] lmat
    cdef double[:, ::1] chunk
    if with_noise:
        lmat = (sqrt(dt) * inv_b) * np.ascontiguousarray(noise_l, dtype=np.float64)
        chunk = rng.standard_normal((CHUNK, n))
    cdef Py_ssize_t pos = 0
    cdef long n_rec = n_steps // record_stride
    xs = np.empty((n_rec + 1, n))
    vs = np.empty((n_rec + 1, n))
    cdef double[:, ::1] xs_mv = xs
    cdef double[:, ::1] vs_mv = vs
    cdef double[::1] grad1 = np.empty(n)
    cdef double[::1] grad2 = np.empty(n)
    cdef double[::1] x_pred = np.empty(n)
    cdef double[::1] v_pred = np.empty(n)
    cdef double[::1] kick = np.zeros(n)
    cdef long step
    cdef Py_ssize_t i, j
    cdef double acc, f1v, f2v
    for i in range(n):
        xs_mv[0, i] = x[i]
        vs_mv[0, i] = v[i]
    for step in range(1, n_steps + 1):
        if with_noise:
            if pos >= CHUNK:
                chunk = rng.standard_normal((CHUNK, n))
                pos = 0
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += lmat[i, j] * chunk[pos, j]
                kick[i] = acc
            pos += 1
        _gradient(a, offs, g, x, grad1)
        for i in range(n):
            x_pred[i] = x[i] + dt * v[i]
            v_pred[i] = v[i] + dt * ((-v[i] - grad1[i]) * inv_b) + kick[i]
        _gradient(a, offs, g, x_pred, grad2)
        for i in range(n):
            f1v = (-v[i] - grad1[i]) * inv_b
            f2v = (-v_pred[i] - grad2[i]) * inv_b
            x[i] = x[i] + 0.5 * dt * (v[i] + v_pred[i])
            v[i] = v[i] + 0.5 * dt * (f1v + f2v) + kick[i]
        _blowup_check(x, step, blowup_limit)
        if step % record_stride == 0:
            for i in range(n):
                xs_mv[step // record_stride, i] = x[i]
                vs_mv[step // record_stride, i] = v[i]
    return xs, vs


def hamiltonian(a_matrix, offsets, tilt, double beta_c, x0, v0, double dt,
                long n_steps, long record_stride, double blowup_limit=1e8):
    """Velocity Verlet for the undamped, noiseless system with mass beta_c."""
    cdef const double[:, ::1] a = np.ascontiguousarray(a_matrix, dtype=np.float64)
    cdef const double[::1] offs = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(tilt, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] v = np.array(v0, dtype=np.float64)
    cdef double half = 0.5 * dt / beta_c
    cdef long n_rec = n_steps // record_stride
    xs = np.empty((n_rec + 1, n))
    vs = np.empty((n_rec + 1, n))
    cdef double[:, ::1] xs_mv = xs
    cdef double[:, ::1] vs_mv = vs
    cdef double[::1] grad = np.empty(n)
    cdef long step
    cdef Py_ssize_t i
    for i in range(n):
        xs_mv[0, i] = x[i]
        vs_mv[0, i] = v[i]
    _gradient(a, offs, g, x, grad)
    for step in range(1, n_steps + 1):
        for i in range(n):
            v[i] -= half * grad[i]
            x[i] += dt * v[i]
        _gradient(a, offs, g, x, grad)
        for i in range(n):
            v[i] -= half * grad[i]
        _blowup_check(x, step, blowup_limit)
        if step % record_stride == 0:
            for i in range(n):
                xs_mv[step // record_stride, i] = x[i]
                vs_mv[step // record_stride, i] = v[i]
    return xs, vs
