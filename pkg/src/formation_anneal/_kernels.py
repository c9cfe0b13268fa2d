"""Compiled inner loops for time stepping.

Every arithmetic path used by both the Euler and Euler-Maruyama steps goes
through the same helpers, so the noiseless stochastic step reproduces the
Euler step bit for bit.  fastmath stays off to keep results reproducible.
"""

import math

import numba
import numpy as np

EPS_COINCIDE = 1e-12
GUARD = 1e12

OK = 0
CONVERGED = 1
DIVERGED = 2

EULER = 0
RK4 = 1
EULER_MARUYAMA = 2


@numba.njit(cache=True)
def drift_into(pos, tgt, edges, out):
    out[:, :] = 0.0
    n = pos.shape[1]
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        dot = 0.0
        sq = 0.0
        for k in range(n):
            ar = pos[j, k] - pos[i, k]
            dot += (tgt[j, k] - tgt[i, k]) * ar
            sq += ar * ar
        if math.sqrt(sq) > EPS_COINCIDE:
            u = dot / sq - 1.0
            for k in range(n):
                push = u * (pos[i, k] - pos[j, k])
                out[i, k] += push
                out[j, k] -= push


@numba.njit(cache=True)
def _norm(x):
    s = 0.0
    for i in range(x.shape[0]):
        for k in range(x.shape[1]):
            s += x[i, k] * x[i, k]
    return math.sqrt(s)


@numba.njit(cache=True)
def _healthy(x):
    for i in range(x.shape[0]):
        for k in range(x.shape[1]):
            v = x[i, k]
            if not math.isfinite(v) or abs(v) > GUARD:
                return False
    return True


@numba.njit(cache=True)
def euler_into(pos, dt, d, out):
    # d holds the drift at pos
    for i in range(pos.shape[0]):
        for k in range(pos.shape[1]):
            out[i, k] = pos[i, k] + dt * d[i, k]


@numba.njit(cache=True)
def rk4_into(pos, tgt, edges, dt, k1, out, k2, k3, k4, tmp):
    # k1 holds the drift at pos
    h = 0.5 * dt
    for i in range(pos.shape[0]):
        for k in range(pos.shape[1]):
            tmp[i, k] = pos[i, k] + h * k1[i, k]
    drift_into(tmp, tgt, edges, k2)
    for i in range(pos.shape[0]):
        for k in range(pos.shape[1]):
            tmp[i, k] = pos[i, k] + h * k2[i, k]
    drift_into(tmp, tgt, edges, k3)
    for i in range(pos.shape[0]):
        for k in range(pos.shape[1]):
            tmp[i, k] = pos[i, k] + dt * k3[i, k]
    drift_into(tmp, tgt, edges, k4)
    w = dt / 6.0
    for i in range(pos.shape[0]):
        for k in range(pos.shape[1]):
            out[i, k] = pos[i, k] + w * (k1[i, k] + 2.0 * k2[i, k] + 2.0 * k3[i, k] + k4[i, k])


@numba.njit(cache=True)
def noise_into(pos, edges, t, dt, c1, c2, xi, kick, out):
    """Add the per-edge Wiener increments to ``out`` (coefficients taken at ``pos``)."""
    n = pos.shape[1]
    amp = c1 * math.exp(-c2 * t)
    if amp == 0.0:
        return
    sdt = math.sqrt(dt)
    kick[:, :] = 0.0
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        sq = 0.0
        for k in range(n):
            r = pos[i, k] - pos[j, k]
            sq += r * r
        sep = math.sqrt(sq)
        if sep > EPS_COINCIDE:
            lam = amp / sep
            for k in range(n):
                push = lam * sdt * xi[e] * (pos[i, k] - pos[j, k])
                kick[i, k] += push
                kick[j, k] -= push
    for i in range(pos.shape[0]):
        for k in range(n):
            out[i, k] += kick[i, k]


@numba.njit(cache=True)
def advance(pos, tgt, edges, scheme, t0, dt, step0, n_steps, xi, c1, c2,
            record_every, rec_pos, rec_step, rec_count, stop_tol):
    """Take up to ``n_steps`` steps in place, starting at global step ``step0``.

    Global step ``k`` starts at time ``t0 + k * dt``.
    States at global steps divisible by ``record_every`` are appended to
    ``rec_pos``/``rec_step`` from index ``rec_count``.  Returns
    ``(status, last_step, rec_count)`` where ``last_step`` is the global
    step index of the final state in ``pos``.  With ``stop_tol >= 0``, stops
    as soon as the drift norm drops to ``stop_tol``; on divergence the state
    is left at the last healthy step and ``last_step`` is the step that blew up.
    """
    d = np.empty_like(pos)
    out = np.empty_like(pos)
    k2 = np.empty_like(pos)
    k3 = np.empty_like(pos)
    k4 = np.empty_like(pos)
    tmp = np.empty_like(pos)
    for s in range(n_steps):
        step = step0 + s
        drift_into(pos, tgt, edges, d)
        if stop_tol >= 0.0 and _norm(d) <= stop_tol:
            return CONVERGED, step, rec_count
        if scheme == RK4:
            rk4_into(pos, tgt, edges, dt, d, out, k2, k3, k4, tmp)
        else:
            euler_into(pos, dt, d, out)
            if scheme == EULER_MARUYAMA:
                noise_into(pos, edges, t0 + step * dt, dt, c1, c2, xi[s], tmp, out)
        if not _healthy(out):
            return DIVERGED, step + 1, rec_count
        pos[:, :] = out
        if (step + 1) % record_every == 0:
            rec_pos[rec_count, :, :] = pos
            rec_step[rec_count] = step + 1
            rec_count += 1
    return OK, step0 + n_steps, rec_count
