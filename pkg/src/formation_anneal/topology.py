"""Undirected interaction graphs.

Vertices are labelled ``1..n_vertices`` everywhere in the public interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    """Malformed graph input or a violated structural precondition."""


Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``1..n_vertices``.

    Edges are stored once, as ``(min, max)`` pairs in lexicographic order.
    Construction rejects self-loops, duplicate edges (in either orientation)
    and out-of-range endpoints instead of normalizing them away.
    """

    n_vertices: int
    edges: tuple[Edge, ...]
    _adj: dict[int, frozenset[int]] = field(init=False, repr=False, compare=False)

    def __init__(self, n_vertices: int, edges: Iterable[Iterable[int]] = ()):
        if isinstance(n_vertices, bool) or int(n_vertices) != n_vertices or n_vertices < 1:
            raise GraphError(f"n_vertices must be a positive integer, got {n_vertices!r}")
        n_vertices = int(n_vertices)
        seen: set[Edge] = set()
        for raw in edges:
            pair = tuple(raw)
            if len(pair) != 2:
                raise GraphError(f"edge {raw!r} must have exactly two endpoints")
            i, j = pair
            if int(i) != i or int(j) != j:
                raise GraphError(f"edge {raw!r} has non-integer endpoints")
            i, j = int(i), int(j)
            for v in (i, j):
                if not 1 <= v <= n_vertices:
                    raise GraphError(
                        f"edge ({i}, {j}) references vertex {v} of {n_vertices}"
                    )
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            seen.add(key)

        adj: dict[int, set[int]] = {v: set() for v in range(1, n_vertices + 1)}
        for i, j in seen:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "n_vertices", n_vertices)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def _check_vertex(self, i: int) -> None:
        if not 1 <= i <= self.n_vertices:
            raise GraphError(f"vertex {i} out of range 1..{self.n_vertices}")

    def neighbors(self, i: int) -> frozenset[int]:
        self._check_vertex(i)
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def is_connected(self) -> bool:
        seen = {1}
        stack = [1]
        while stack:
            v = stack.pop()
            for w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices

    def is_tree(self) -> bool:
        return self.n_edges == self.n_vertices - 1 and self.is_connected()

    def leaf_order(self) -> list[tuple[int, Edge]]:
        """Leaf elimination ordering of a tree.

        Repeatedly strips the smallest-numbered degree-one vertex together
        with its edge until a single vertex is left.  When only one edge
        remains its larger endpoint is removed, so the survivor is the
        smaller one.  Read backwards, the list builds the tree up from that
        last vertex one edge at a time.
        """
        if not self.is_tree():
            raise GraphError("leaf_order requires a tree")
        adj = {v: set(s) for v, s in self._adj.items()}
        order: list[tuple[int, Edge]] = []
        for _ in range(self.n_vertices - 1):
            leaves = [v for v, s in adj.items() if len(s) == 1]
            leaf = max(leaves) if len(adj) == 2 else min(leaves)
            (other,) = adj.pop(leaf)
            adj[other].discard(leaf)
            order.append((leaf, (min(leaf, other), max(leaf, other))))
        return order

    def root(self) -> int:
        """Vertex that survives leaf elimination (the construction root)."""
        removed = {leaf for leaf, _ in self.leaf_order()}
        (last,) = set(range(1, self.n_vertices + 1)) - removed
        return last

    def edge_index(self) -> np.ndarray:
        """Zero-based ``(n_edges, 2)`` endpoint array in lexicographic edge order."""
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2) - 1


def star(n: int, center: int = 1) -> Graph:
    return Graph(n, [(center, v) for v in range(1, n + 1) if v != center])


def circle(n: int) -> Graph:
    if n < 3:
        raise GraphError("a circle needs at least 3 vertices")
    return Graph(n, [(v, v + 1) for v in range(1, n)] + [(1, n)])


def path(n: int) -> Graph:
    return Graph(n, [(v, v + 1) for v in range(1, n)])


def complete(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


PRESETS = {"star": star, "circle": circle, "path": path, "complete": complete}


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    """Uniformly random labelled tree via a random Pruefer sequence."""
    if n == 1:
        return Graph(1)
    if n == 2:
        return Graph(2, [(1, 2)])
    seq = list(rng.integers(1, n + 1, size=n - 2))
    degree = [1] * (n + 1)
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = min(u for u in range(1, n + 1) if degree[u] == 1)
        edges.append((leaf, int(v)))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = (x for x in range(1, n + 1) if degree[x] == 1)
    edges.append((u, w))
    return Graph(n, edges)


def random_connected(n: int, rng: np.random.Generator, extra_edge_prob: float = 0.3) -> Graph:
    """Random tree plus each remaining vertex pair with probability ``extra_edge_prob``."""
    tree = random_tree(n, rng)
    edges = set(tree.edges)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    return Graph(n, edges)
