"""Configuration geometry, the embedding-aware control law and its Lyapunov function."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .topology import Edge, Graph

EPS_COINCIDE = 1e-12
EPS_CENTROID = 1e-9


class ConfigurationError(ValueError):
    """Shape or size mismatch between configurations, graphs or vectors."""


@dataclass(frozen=True, eq=False)
class Configuration:
    """``N`` points in ``R^n`` stored as a read-only ``(N, n)`` float array.

    ``projected`` records whether the points were explicitly shifted to
    centroid zero by :func:`project_to_centroid_zero`.
    """

    points: NDArray[np.float64]
    projected: bool = False

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ConfigurationError(f"points must be a 2-d (N, n) array, got shape {pts.shape}")
        if pts.shape[0] < 2 or pts.shape[1] < 1:
            raise ConfigurationError(f"need N >= 2 points of dimension n >= 1, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_agents(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def is_centered(self, tol: float = EPS_CENTROID) -> bool:
        return bool(np.linalg.norm(self.points.sum(axis=0)) <= tol)

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"Configuration({self.points.tolist()!r})"


ConfigLike = Union[Configuration, ArrayLike]


def as_points(c: ConfigLike) -> NDArray[np.float64]:
    """Coerce a configuration-like value to a float ``(N, n)`` array."""
    if isinstance(c, Configuration):
        return c.points
    pts = np.asarray(c, dtype=np.float64)
    if pts.ndim != 2:
        raise ConfigurationError(f"expected an (N, n) array of points, got shape {pts.shape}")
    return pts


def _pair(p: ConfigLike, q: ConfigLike, g: Graph | None = None):
    a, b = as_points(p), as_points(q)
    if a.shape != b.shape:
        raise ConfigurationError(f"configuration shapes differ: {a.shape} vs {b.shape}")
    if g is not None and a.shape[0] != g.n_vertices:
        raise ConfigurationError(
            f"graph has {g.n_vertices} vertices but configuration has {a.shape[0]} points"
        )
    return a, b


def centroid(c: ConfigLike) -> NDArray[np.float64]:
    return as_points(c).mean(axis=0)


def project_to_centroid_zero(c: ConfigLike) -> Configuration:
    pts = as_points(c)
    return Configuration(pts - pts.mean(axis=0), projected=True)


def edge_gain(b_rel: ArrayLike, a_rel: ArrayLike) -> float | NDArray[np.float64]:
    """Gain ``u_ij`` from the target offset ``b_j - b_i`` and measured offset ``a_j - a_i``.

    Only relative vectors enter, so an agent needs nothing beyond what it
    can sense from its neighbour.  Coincident agents (``|a_rel| <= 1e-12``)
    get gain 0.  Leading axes broadcast, so a stack of ``(E, n)`` offsets
    yields ``E`` gains.
    """
    b_rel = np.asarray(b_rel, dtype=np.float64)
    a_rel = np.asarray(a_rel, dtype=np.float64)
    if b_rel.shape[-1:] != a_rel.shape[-1:]:
        raise ConfigurationError(
            f"relative vectors differ in dimension: {b_rel.shape[-1:]} vs {a_rel.shape[-1:]}"
        )
    sq = np.sum(a_rel * a_rel, axis=-1)
    dot = np.sum(b_rel * a_rel, axis=-1)
    far = np.sqrt(sq) > EPS_COINCIDE
    gain = np.where(far, dot / np.where(far, sq, 1.0) - 1.0, 0.0)
    return float(gain) if gain.ndim == 0 else gain


@dataclass(frozen=True)
class EdgeGain:
    edge: Edge
    value: float


def edge_gains(g: Graph, p: ConfigLike, q: ConfigLike) -> NDArray[np.float64]:
    """Gains for every edge of ``g`` in lexicographic edge order, as an array."""
    a, b = _pair(p, q, g)
    if g.n_edges == 0:
        return np.zeros(0)
    idx = g.edge_index()
    i, j = idx[:, 0], idx[:, 1]
    return edge_gain(b[j] - b[i], a[j] - a[i])


def all_edge_gains(g: Graph, p: ConfigLike, q: ConfigLike) -> list[EdgeGain]:
    return [EdgeGain(e, float(u)) for e, u in zip(g.edges, edge_gains(g, p, q))]


def drift(g: Graph, p: ConfigLike, q: ConfigLike) -> NDArray[np.float64]:
    """Velocity field: agent ``i`` moves along ``sum_j u_ij (a_i - a_j)``."""
    a, _ = _pair(p, q, g)
    out = np.zeros_like(a)
    if g.n_edges == 0:
        return out
    idx = g.edge_index()
    i, j = idx[:, 0], idx[:, 1]
    push = edge_gains(g, p, q)[:, None] * (a[i] - a[j])
    np.add.at(out, i, push)
    np.add.at(out, j, -push)
    return out


def lyapunov(p: ConfigLike, q: ConfigLike) -> float:
    """Squared configuration-space distance ``sum_i |a_i - b_i|^2``."""
    a, b = _pair(p, q)
    return float(np.sum((a - b) ** 2))


def dissipation(g: Graph, p: ConfigLike, q: ConfigLike) -> float:
    """Time derivative of :func:`lyapunov` along :func:`drift`.

    Equals ``-2 * sum_edges u_ij^2 |a_i - a_j|^2``; the factor 2 comes from
    differentiating the squared norm.
    """
    a, _ = _pair(p, q, g)
    if g.n_edges == 0:
        return 0.0
    idx = g.edge_index()
    rel = a[idx[:, 1]] - a[idx[:, 0]]
    u = edge_gains(g, p, q)
    return float(-2.0 * np.sum(u**2 * np.sum(rel * rel, axis=-1)))
