"""Compiled right-hand side and fixed-step RK4 loops for the mean-field equations.

States are ``(n, 3)`` float arrays. In collective mode ``n == 1`` and the
anisotropy field uses the vector's own direction with the full coupling; in
per-site mode each site sees the mean direction of its chain neighbours,
weighted 1/2 per neighbour, so edge sites get ``V/2`` automatically.

Status codes returned by the loops: 0 ok, 1 zero-magnitude vector,
2 non-finite state, 3 step budget exhausted.
"""

import numba
import numpy as np

OK = 0
ZERO_NORM = 1
NON_FINITE = 2
BUDGET = 3


@numba.njit(cache=True)
def rhs(M, b, v, g, gamma, alpha, ll_mode, per_site, out):
    n = M.shape[0]
    norms = np.empty(n)
    unit = np.empty((n, 3))
    for j in range(n):
        r = np.sqrt(M[j, 0] ** 2 + M[j, 1] ** 2 + M[j, 2] ** 2)
        if r == 0.0:
            return ZERO_NORM
        norms[j] = r
        for a in range(3):
            unit[j, a] = M[j, a] / r
    beff = np.empty(3)
    gj = np.empty(3)
    for j in range(n):
        for a in range(3):
            if per_site:
                acc = 0.0
                if j > 0:
                    acc += 0.5 * unit[j - 1, a]
                if j < n - 1:
                    acc += 0.5 * unit[j + 1, a]
            else:
                acc = unit[j, a]
            beff[a] = b[a] + v[a] * acc
        if ll_mode:
            for a in range(3):
                gj[a] = 2.0 * alpha * beff[a]
        else:
            for a in range(3):
                gj[a] = g[a]
        mx = M[j, 0]
        my = M[j, 1]
        mz = M[j, 2]
        lx = -gj[2] * mx * mz - gj[1] * mx * my + gj[0] * (my * my + mz * mz)
        ly = -gj[2] * my * mz - gj[0] * mx * my + gj[1] * (mx * mx + mz * mz)
        lz = -gj[1] * my * mz - gj[0] * mx * mz + gj[2] * (mx * mx + my * my)
        h = 0.5 / norms[j]
        out[j, 0] = mz * beff[1] - my * beff[2] + h * lx - 0.5 * gamma * mx
        out[j, 1] = mx * beff[2] - mz * beff[0] + h * ly - 0.5 * gamma * my
        out[j, 2] = my * beff[0] - mx * beff[1] + h * lz - gamma * (mz + 1.0)
    return OK


@numba.njit(cache=True)
def _rk4_step(M, dt, b, v, g, gamma, alpha, ll_mode, per_site, k1, k2, k3, k4, tmp):
    # k1 must already hold rhs(M)
    n = M.shape[0]
    for j in range(n):
        for a in range(3):
            tmp[j, a] = M[j, a] + 0.5 * dt * k1[j, a]
    s = rhs(tmp, b, v, g, gamma, alpha, ll_mode, per_site, k2)
    if s != OK:
        return s
    for j in range(n):
        for a in range(3):
            tmp[j, a] = M[j, a] + 0.5 * dt * k2[j, a]
    s = rhs(tmp, b, v, g, gamma, alpha, ll_mode, per_site, k3)
    if s != OK:
        return s
    for j in range(n):
        for a in range(3):
            tmp[j, a] = M[j, a] + dt * k3[j, a]
    s = rhs(tmp, b, v, g, gamma, alpha, ll_mode, per_site, k4)
    if s != OK:
        return s
    for j in range(n):
        for a in range(3):
            M[j, a] += dt / 6.0 * (k1[j, a] + 2.0 * k2[j, a] + 2.0 * k3[j, a] + k4[j, a])
            if not np.isfinite(M[j, a]):
                return NON_FINITE
    return OK


@numba.njit(cache=True)
def integrate(M, dt, n_steps, sample_every, b, v, g, gamma, alpha, ll_mode, per_site, samples):
    """Advance ``M`` in place, writing every ``sample_every``-th state to ``samples``.

    Returns ``(status, n_samples_written)``.
    """
    n = M.shape[0]
    k1 = np.empty((n, 3))
    k2 = np.empty((n, 3))
    k3 = np.empty((n, 3))
    k4 = np.empty((n, 3))
    tmp = np.empty((n, 3))
    samples[0] = M
    written = 1
    for step in range(1, n_steps + 1):
        s = rhs(M, b, v, g, gamma, alpha, ll_mode, per_site, k1)
        if s != OK:
            return s, written
        s = _rk4_step(M, dt, b, v, g, gamma, alpha, ll_mode, per_site, k1, k2, k3, k4, tmp)
        if s != OK:
            return s, written
        if step % sample_every == 0:
            samples[written] = M
            written += 1
    return OK, written


@numba.njit(cache=True)
def run_to_steady(M, dt, max_steps, check_every, tol, consecutive, b, v, g, gamma, alpha, ll_mode, per_site):
    """Integrate until max-norm of dM/dt stays below ``tol`` for ``consecutive`` checks.

    Returns ``(status, steps_taken, last_residual)``; ``M`` is updated in place.
    """
    n = M.shape[0]
    k1 = np.empty((n, 3))
    k2 = np.empty((n, 3))
    k3 = np.empty((n, 3))
    k4 = np.empty((n, 3))
    tmp = np.empty((n, 3))
    streak = 0
    residual = np.inf
    for step in range(max_steps + 1):
        s = rhs(M, b, v, g, gamma, alpha, ll_mode, per_site, k1)
        if s != OK:
            return s, step, residual
        if step % check_every == 0:
            residual = np.max(np.abs(k1))
            if residual < tol:
                streak += 1
                if streak >= consecutive:
                    return OK, step, residual
            else:
                streak = 0
        if step == max_steps:
            break
        s = _rk4_step(M, dt, b, v, g, gamma, alpha, ll_mode, per_site, k1, k2, k3, k4, tmp)
        if s != OK:
            return s, step, residual
    return BUDGET, max_steps, residual
