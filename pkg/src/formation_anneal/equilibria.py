"""Equilibria of the formation flow, with the product-of-spheres structure on trees."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import (
    EPS_COINCIDE,
    ConfigLike,
    Configuration,
    ConfigurationError,
    EdgeGain,
    _pair,
    all_edge_gains,
    as_points,
    drift,
    edge_gain,
    project_to_centroid_zero,
)
from .topology import Edge, Graph, GraphError

DEFAULT_TOL = 1e-8
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    """Unit direction attached to a tree edge, oriented ``(parent, child)``."""

    edge: tuple[int, int]
    direction: NDArray[np.float64]

    def __post_init__(self):
        d = np.array(self.direction, dtype=np.float64).reshape(-1)
        if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
            raise ValueError(f"direction for edge {self.edge} is not a unit vector (|d| = {np.linalg.norm(d)!r})")
        d.setflags(write=False)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "edge", (int(self.edge[0]), int(self.edge[1])))


@dataclass(frozen=True)
class EquilibriumReport:
    is_equilibrium: bool
    drift_norm: float
    per_edge_gains: list[EdgeGain]
    tree_condition_holds: bool | None = None
    # edges whose two targets coincide; the sphere for such an edge is a point
    degenerate_edges: tuple[Edge, ...] = ()

    @property
    def max_abs_gain(self) -> float:
        return max((abs(g.value) for g in self.per_edge_gains), default=0.0)


def check_equilibrium(g: Graph, p: ConfigLike, q: ConfigLike, tol: float = DEFAULT_TOL) -> EquilibriumReport:
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    _, b = _pair(p, q, g)
    norm = float(np.linalg.norm(drift(g, p, q)))
    gains = all_edge_gains(g, p, q)
    tree_ok = None
    if g.is_tree():
        tree_ok = all(abs(x.value) <= tol for x in gains)
    degenerate = tuple(
        (i, j) for i, j in g.edges if np.linalg.norm(b[j - 1] - b[i - 1]) <= EPS_COINCIDE
    )
    return EquilibriumReport(norm <= tol, norm, gains, tree_ok, degenerate)


def _two_agent_target(q: ConfigLike) -> NDArray[np.float64]:
    b = as_points(q)
    if b.shape[0] != 2:
        raise ConfigurationError(f"expected a 2-agent target, got {b.shape[0]} agents")
    return b[0] - b[1]


def two_agent_sphere(q: ConfigLike) -> tuple[NDArray[np.float64], float]:
    """Sphere of admissible offsets ``v = a_1 - a_2`` at equilibrium for two agents.

    The set ``{v : <b_1 - b_2, v> = |v|^2}`` is the sphere centred at
    ``(b_1 - b_2)/2`` with radius ``|b_1 - b_2|/2``.
    """
    d = _two_agent_target(q)
    return d / 2.0, float(np.linalg.norm(d)) / 2.0


Position = Literal["inside", "on", "outside"]


def classify_relative_position(q: ConfigLike, v: ArrayLike, tol: float = 1e-9) -> Position:
    """Locate ``v`` relative to the two-agent equilibrium sphere.

    Uses the sign of ``<b_1 - b_2, v> - |v|^2``; values within
    ``tol * max(1, |b_1 - b_2|^2)`` of zero count as on the sphere.
    """
    d = _two_agent_target(q)
    v = np.asarray(v, dtype=np.float64)
    f = float(d @ v - v @ v)
    band = tol * max(1.0, float(d @ d))
    if f > band:
        return "inside"
    if f < -band:
        return "outside"
    return "on"


def classify_by_distance(q: ConfigLike, v: ArrayLike, tol: float = 1e-9) -> Position:
    """Same classification, from ``|v - center|^2`` against ``radius^2``."""
    center, radius = two_agent_sphere(q)
    v = np.asarray(v, dtype=np.float64)
    f = radius**2 - float(np.sum((v - center) ** 2))
    band = tol * max(1.0, 4.0 * radius**2)
    if f > band:
        return "inside"
    if f < -band:
        return "outside"
    return "on"


def construction_edges(g: Graph) -> list[tuple[int, int]]:
    """Tree edges as ``(parent, child)`` in the order a tree is built from its root."""
    return [
        (e[0] if e[1] == leaf else e[1], leaf) for leaf, e in reversed(g.leaf_order())
    ]


def sample_tree_equilibrium(g: Graph, q: ConfigLike, coords: Sequence[SpherePoint]) -> Configuration:
    """Equilibrium of a tree picked by one unit direction per edge.

    Each child sits at ``a_parent + c + r s`` where ``c`` and ``r`` are the
    centre and radius of the two-agent sphere for the edge's target offset
    and ``s`` is the supplied direction.  That makes every edge gain vanish.
    ``coords`` must follow :func:`construction_edges`; the result is shifted
    to centroid zero.
    """
    if not g.is_tree():
        raise GraphError("sample_tree_equilibrium requires a tree")
    b = as_points(q)
    if b.shape[0] != g.n_vertices:
        raise ConfigurationError(f"target has {b.shape[0]} points, graph has {g.n_vertices} vertices")
    order = construction_edges(g)
    if len(coords) != len(order):
        raise ConfigurationError(f"expected {len(order)} sphere coordinates, got {len(coords)}")
    n = b.shape[1]
    a = np.zeros_like(b)
    for (parent, child), sp in zip(order, coords):
        if sp.edge != (parent, child):
            raise ConfigurationError(f"coordinate for edge {sp.edge} supplied where ({parent}, {child}) was expected")
        if sp.direction.shape != (n,):
            raise ConfigurationError(f"direction for edge {sp.edge} has dimension {sp.direction.size}, expected {n}")
        d = b[child - 1] - b[parent - 1]
        norm = np.linalg.norm(d)
        # r * (d_hat + s) is exactly zero at the antipodal direction
        v = 0.5 * norm * (d / norm + sp.direction) if norm > 0 else np.zeros(n)
        a[child - 1] = a[parent - 1] + v
    return project_to_centroid_zero(a)


def random_sphere_coords(g: Graph, n: int, rng: np.random.Generator) -> list[SpherePoint]:
    """Uniform directions on ``S^{n-1}`` for every construction edge of a tree."""
    coords = []
    for e in construction_edges(g):
        while True:
            x = rng.standard_normal(n)
            norm = np.linalg.norm(x)
            if norm > 1e-8:
                break
        coords.append(SpherePoint(e, x / norm))
    return coords


def target_coords(g: Graph, q: ConfigLike, sign: float = 1.0) -> list[SpherePoint]:
    """Directions along (``sign=1``) or against (``sign=-1``) each target offset.

    The first reproduces ``q`` itself; the second collapses every agent to
    the origin.  Edges with coincident targets get an arbitrary axis.
    """
    b = as_points(q)
    coords = []
    for parent, child in construction_edges(g):
        d = b[child - 1] - b[parent - 1]
        norm = np.linalg.norm(d)
        if norm > 0:
            s = sign * d / norm
        else:
            s = np.eye(b.shape[1])[0]
        coords.append(SpherePoint((parent, child), s))
    return coords


def equilibrium_manifold_dimension(g: Graph, n: int) -> int:
    if not g.is_tree():
        raise GraphError("equilibrium_manifold_dimension requires a tree")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return (g.n_vertices - 1) * (n - 1)


def two_agent_gain(q: ConfigLike, v: ArrayLike) -> float:
    """Edge gain of a two-agent configuration with offset ``v = a_1 - a_2``."""
    d = _two_agent_target(q)
    return edge_gain(-d, -np.asarray(v, dtype=np.float64))
