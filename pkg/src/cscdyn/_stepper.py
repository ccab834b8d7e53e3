"""Compiled RK4 inner loops for the non-local reaction-diffusion system.

The non-local birth terms need the quadrature integrals of u and v at every
stage, so each stage is a reduction pass followed by a pointwise pass.
Kernel evaluation clamps p at 0 before the power so roundoff-negative
densities cannot produce NaNs; `react = False` drops every reaction term
(the pure-diffusion conservation diagnostic).
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _kernel_value(p, sigma):
    pc = p if p > 0.0 else 0.0
    if sigma == 1.0:
        kk = 1.0 - pc
    elif sigma == 2.0:
        kk = 1.0 - pc * pc
    else:
        kk = 1.0 - pc**sigma
    return kk if kk > 0.0 else 0.0


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _rhs_1d(u, v, w, inv_h2, d, alpha, delta, sigma, react, out_u, out_v):
    n = u.shape[0]
    iu = 0.0
    iv = 0.0
    if react:
        for i in range(n):
            iu += w[i] * u[i]
            iv += w[i] * v[i]
    for i in range(n):
        im = i - 1 if i > 0 else 1
        ip = i + 1 if i < n - 1 else n - 2
        lu = (u[im] - 2.0 * u[i] + u[ip]) * inv_h2
        lv = (v[im] - 2.0 * v[i] + v[ip]) * inv_h2
        if react:
            kk = _kernel_value(u[i] + v[i], sigma)
            out_u[i] = d * lu + delta * kk * iu
            out_v[i] = lv + (1.0 - delta) * kk * iu - alpha * v[i] + kk * iv
        else:
            out_u[i] = d * lu
            out_v[i] = lv


@njit(cache=True, nogil=True, fastmath=True)
def rk4_1d(u, v, w, inv_h2, dt, n_steps, d, alpha, delta, sigma, react):
    """Advance (u, v) in place by n_steps RK4 steps of size dt."""
    n = u.shape[0]
    ku1 = np.empty(n); kv1 = np.empty(n)
    ku2 = np.empty(n); kv2 = np.empty(n)
    ku3 = np.empty(n); kv3 = np.empty(n)
    ku4 = np.empty(n); kv4 = np.empty(n)
    ut = np.empty(n); vt = np.empty(n)
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(n_steps):
        _rhs_1d(u, v, w, inv_h2, d, alpha, delta, sigma, react, ku1, kv1)
        for i in range(n):
            ut[i] = u[i] + half * ku1[i]
            vt[i] = v[i] + half * kv1[i]
        _rhs_1d(ut, vt, w, inv_h2, d, alpha, delta, sigma, react, ku2, kv2)
        for i in range(n):
            ut[i] = u[i] + half * ku2[i]
            vt[i] = v[i] + half * kv2[i]
        _rhs_1d(ut, vt, w, inv_h2, d, alpha, delta, sigma, react, ku3, kv3)
        for i in range(n):
            ut[i] = u[i] + dt * ku3[i]
            vt[i] = v[i] + dt * kv3[i]
        _rhs_1d(ut, vt, w, inv_h2, d, alpha, delta, sigma, react, ku4, kv4)
        for i in range(n):
            u[i] += sixth * (ku1[i] + 2.0 * (ku2[i] + ku3[i]) + ku4[i])
            v[i] += sixth * (kv1[i] + 2.0 * (kv2[i] + kv3[i]) + kv4[i])


@njit(cache=True, nogil=True, fastmath=True, inline="always")
def _rhs_2d(u, v, w, inv_h02, inv_h12, d, alpha, delta, sigma, react, out_u, out_v):
    n0, n1 = u.shape
    iu = 0.0
    iv = 0.0
    if react:
        for i in range(n0):
            for j in range(n1):
                iu += w[i, j] * u[i, j]
                iv += w[i, j] * v[i, j]
    for i in range(n0):
        im = i - 1 if i > 0 else 1
        ip = i + 1 if i < n0 - 1 else n0 - 2
        for j in range(n1):
            jm = j - 1 if j > 0 else 1
            jp = j + 1 if j < n1 - 1 else n1 - 2
            lu = ((u[im, j] - 2.0 * u[i, j] + u[ip, j]) * inv_h02
                  + (u[i, jm] - 2.0 * u[i, j] + u[i, jp]) * inv_h12)
            lv = ((v[im, j] - 2.0 * v[i, j] + v[ip, j]) * inv_h02
                  + (v[i, jm] - 2.0 * v[i, j] + v[i, jp]) * inv_h12)
            if react:
                kk = _kernel_value(u[i, j] + v[i, j], sigma)
                out_u[i, j] = d * lu + delta * kk * iu
                out_v[i, j] = lv + (1.0 - delta) * kk * iu - alpha * v[i, j] + kk * iv
            else:
                out_u[i, j] = d * lu
                out_v[i, j] = lv


@njit(cache=True, nogil=True, fastmath=True)
def rk4_2d(u, v, w, inv_h02, inv_h12, dt, n_steps, d, alpha, delta, sigma, react):
    n0, n1 = u.shape
    ku1 = np.empty((n0, n1)); kv1 = np.empty((n0, n1))
    ku2 = np.empty((n0, n1)); kv2 = np.empty((n0, n1))
    ku3 = np.empty((n0, n1)); kv3 = np.empty((n0, n1))
    ku4 = np.empty((n0, n1)); kv4 = np.empty((n0, n1))
    ut = np.empty((n0, n1)); vt = np.empty((n0, n1))
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(n_steps):
        _rhs_2d(u, v, w, inv_h02, inv_h12, d, alpha, delta, sigma, react, ku1, kv1)
        for i in range(n0):
            for j in range(n1):
                ut[i, j] = u[i, j] + half * ku1[i, j]
                vt[i, j] = v[i, j] + half * kv1[i, j]
        _rhs_2d(ut, vt, w, inv_h02, inv_h12, d, alpha, delta, sigma, react, ku2, kv2)
        for i in range(n0):
            for j in range(n1):
                ut[i, j] = u[i, j] + half * ku2[i, j]
                vt[i, j] = v[i, j] + half * kv2[i, j]
        _rhs_2d(ut, vt, w, inv_h02, inv_h12, d, alpha, delta, sigma, react, ku3, kv3)
        for i in range(n0):
            for j in range(n1):
                ut[i, j] = u[i, j] + dt * ku3[i, j]
                vt[i, j] = v[i, j] + dt * kv3[i, j]
        _rhs_2d(ut, vt, w, inv_h02, inv_h12, d, alpha, delta, sigma, react, ku4, kv4)
        for i in range(n0):
            for j in range(n1):
                u[i, j] += sixth * (ku1[i, j] + 2.0 * (ku2[i, j] + ku3[i, j]) + ku4[i, j])
                v[i, j] += sixth * (kv1[i, j] + 2.0 * (kv2[i, j] + kv3[i, j]) + kv4[i, j])
