"""Deterministic and annealed time integration of the formation flow."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from . import _kernels as K
from .core import (
    EPS_CENTROID,
    EPS_COINCIDE,
    ConfigLike,
    Configuration,
    ConfigurationError,
    _pair,
    edge_gain,
)
from .topology import Graph

Scheme = Literal["deterministic-rk4", "deterministic-euler", "stochastic-euler-maruyama"]
SCHEMES: dict[str, int] = {
    "deterministic-euler": K.EULER,
    "deterministic-rk4": K.RK4,
    "stochastic-euler-maruyama": K.EULER_MARUYAMA,
}

# steps of noise drawn per RNG call; does not affect the stream
_CHUNK = 65536


class IntegrationError(RuntimeError):
    """The state became non-finite or left the ``|x| <= 1e12`` box."""

    def __init__(self, message: str, time: float, trajectory: "Trajectory | None" = None):
        super().__init__(f"{message} at t={time!r}")
        self.time = time
        self.trajectory = trajectory


@dataclass(frozen=True)
class AnnealingSchedule:
    """Noise gain ``c1 * exp(-c2 t)``; ``c1 = 0`` switches the noise off."""

    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        for name in ("c1", "c2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class IntegratorParams:
    dt: float = 1e-3
    t_end: float = 10.0
    record_every: int = 1
    scheme: Scheme = "deterministic-rk4"

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be >= 0, got {self.t_end!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be an integer >= 1, got {self.record_every!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {sorted(SCHEMES)}")
        self.n_steps  # validates t_end / dt

    @property
    def n_steps(self) -> int:
        n = round(self.t_end / self.dt)
        if abs(n * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"t_end={self.t_end!r} is not a whole number of dt={self.dt!r} steps")
        return int(n)

    @property
    def stochastic(self) -> bool:
        return self.scheme == "stochastic-euler-maruyama"


@dataclass
class Trajectory:
    """Recorded snapshots of one run.

    ``lyapunov_values``, ``centroids`` and ``edge_gains`` are recomputed
    from each snapshot with the library functions.
    """

    graph: Graph
    target: NDArray[np.float64]
    times: NDArray[np.float64]
    configurations: NDArray[np.float64]
    lyapunov_values: NDArray[np.float64] = field(init=False)
    centroids: NDArray[np.float64] = field(init=False)
    edge_gains: NDArray[np.float64] = field(init=False)
    stop_reason: str = "t_end"

    def __post_init__(self):
        c = self.configurations
        self.lyapunov_values = np.sum((c - self.target) ** 2, axis=(1, 2))
        self.centroids = c.mean(axis=1)
        idx = self.graph.edge_index()
        i, j = idx[:, 0], idx[:, 1]
        b_rel = self.target[j] - self.target[i]
        self.edge_gains = np.asarray(edge_gain(b_rel, c[:, j] - c[:, i])).reshape(len(c), len(idx))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> Configuration:
        return Configuration(self.configurations[-1])

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


def noise_amplitude(t: float, separation: float, sched: AnnealingSchedule) -> float:
    """``lambda_ij(t) = c1 exp(-c2 t) / |a_i - a_j|``, zero for coincident agents."""
    if separation < 0:
        raise ValueError(f"separation must be >= 0, got {separation!r}")
    if separation <= EPS_COINCIDE:
        return 0.0
    return sched.c1 * math.exp(-sched.c2 * t) / separation


def _prepare(g: Graph, p: ConfigLike, q: ConfigLike):
    a, b = _pair(p, q, g)
    return np.array(a, dtype=np.float64, order="C"), np.ascontiguousarray(b), g.edge_index()


def _single_step(g, p, q, scheme, t, dt, c1, c2, xi):
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    pos, tgt, edges = _prepare(g, p, q)
    rec = np.empty((1,) + pos.shape)
    status, _, _ = K.advance(
        pos, tgt, edges, scheme, float(t), float(dt), 0, 1, xi, float(c1), float(c2),
        2, rec, np.empty(1, dtype=np.int64), 0, -1.0,
    )
    if status == K.DIVERGED:
        raise IntegrationError("non-finite or unbounded state", t + dt)
    return Configuration(pos)


def step_deterministic(g: Graph, p: ConfigLike, q: ConfigLike, dt: float,
                       scheme: Scheme = "deterministic-rk4", t: float = 0.0) -> Configuration:
    """One explicit Euler or RK4 step of the drift field (``t`` is for error reports only)."""
    if scheme == "stochastic-euler-maruyama" or scheme not in SCHEMES:
        raise ValueError(f"not a deterministic scheme: {scheme!r}")
    return _single_step(g, p, q, SCHEMES[scheme], t, dt, 0.0, 0.0, np.zeros((1, max(g.n_edges, 1))))


def step_stochastic(g: Graph, p: ConfigLike, q: ConfigLike, t: float, dt: float,
                    sched: AnnealingSchedule, noise_draws) -> Configuration:
    """One Euler-Maruyama step.

    ``noise_draws`` holds one standard normal per edge in lexicographic edge
    order; both endpoints of an edge use the same draw with opposite signs.
    """
    xi = np.asarray(noise_draws, dtype=np.float64).reshape(-1)
    if xi.shape != (g.n_edges,):
        raise ConfigurationError(f"expected {g.n_edges} noise draws, got {xi.size}")
    buf = np.zeros((1, max(g.n_edges, 1)))
    buf[0, : g.n_edges] = xi
    return _single_step(g, p, q, K.EULER_MARUYAMA, t, dt, sched.c1, sched.c2, buf)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; noise is drawn step by step, one value per edge in edge order."""
    return np.random.Generator(np.random.Philox(seed))


def integrate(g: Graph, p0: ConfigLike, q: ConfigLike, params: IntegratorParams,
              sched: AnnealingSchedule | None = None, seed: int = 0,
              stop_tol: float | None = None) -> Trajectory:
    """Integrate from ``t = 0`` to ``params.t_end`` and record snapshots.

    Snapshots are kept every ``params.record_every`` steps plus the final
    state.  Deterministic schemes ignore ``sched`` and ``seed``.  With
    ``stop_tol``, the run ends early once the drift norm is at most
    ``stop_tol`` (``stop_reason == "converged"``).
    """
    sched = sched or AnnealingSchedule()
    pos, tgt, edges = _prepare(g, p0, q)
    if np.linalg.norm(pos.sum(axis=0)) > EPS_CENTROID:
        raise ConfigurationError("initial configuration must have centroid zero")
    scheme = SCHEMES[params.scheme]
    n_total = params.n_steps
    every = int(params.record_every)
    rec_pos = np.empty((n_total // every + 2,) + pos.shape)
    rec_step = np.empty(n_total // every + 2, dtype=np.int64)
    rec_pos[0] = pos
    rec_step[0] = 0
    count = 1
    n_edges = g.n_edges
    rng = make_rng(seed) if params.stochastic else None
    xi = np.zeros((1, max(n_edges, 1)))
    tol = -1.0 if stop_tol is None else float(stop_tol)

    status, last = K.OK, 0
    done = 0
    while done < n_total:
        chunk = min(_CHUNK, n_total - done)
        if rng is not None:
            xi = np.zeros((chunk, max(n_edges, 1)))
            xi[:, :n_edges] = rng.standard_normal((chunk, n_edges))
        status, last, count = K.advance(
            pos, tgt, edges, scheme, 0.0, float(params.dt), done, chunk, xi,
            float(sched.c1), float(sched.c2), every, rec_pos, rec_step, count, tol,
        )
        if status != K.OK:
            break
        done += chunk

    reason = "t_end"
    if status == K.CONVERGED:
        reason = "converged"
    elif status == K.OK:
        last = n_total
        if stop_tol is not None:
            d = np.empty_like(pos)
            K.drift_into(pos, tgt, edges, d)
            if np.linalg.norm(d) <= stop_tol:
                reason = "converged"
    final_step = last - 1 if status == K.DIVERGED else last
    if rec_step[count - 1] != final_step:
        rec_pos[count] = pos
        rec_step[count] = final_step
        count += 1
    traj = Trajectory(g, tgt, rec_step[:count] * params.dt, rec_pos[:count].copy(), stop_reason=reason)
    if status == K.DIVERGED:
        traj.stop_reason = "diverged"
        raise IntegrationError("non-finite or unbounded state", last * params.dt, traj)
    return traj
