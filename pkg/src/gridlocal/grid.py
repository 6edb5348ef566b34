"""Cuboid grid graphs P_{Lx} x P_{Ly} x P_{Lz} with 0-indexed integer vertices.

Vertices are always triples; a 2D grid is a grid with ``Lz == 1``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

Vertex = tuple[int, int, int]

AXES = ("X", "Y", "Z")


class DimensionError(ValueError):
    """Raised when vertices of different dimensionality are compared."""


@dataclass(frozen=True)
class GridSpec:
    dims: tuple[int, int, int]
    scale_denominator: int = 1

    def __post_init__(self):
        if len(self.dims) != 3:
            raise ValueError(f"dims must be a triple, got {self.dims!r}")
        if any(int(d) != d or d < 1 for d in self.dims):
            raise ValueError(f"all dims must be positive integers, got {self.dims!r}")
        if self.scale_denominator < 1:
            raise ValueError("scale_denominator must be a positive integer")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def is_2d(self) -> bool:
        return self.dims[2] == 1


@dataclass(frozen=True, order=True)
class Edge:
    """Undirected unit edge; ``u`` is the endpoint with the smaller coordinate."""

    u: Vertex
    v: Vertex
    axis: str = field(compare=False)

    @classmethod
    def between(cls, a: Vertex, b: Vertex) -> "Edge":
        diff = [abs(p - q) for p, q in zip(a, b)]
        if len(a) != len(b) or sorted(diff) != [0, 0, 1]:
            raise ValueError(f"{a} and {b} are not grid-adjacent")
        axis = AXES[diff.index(1)]
        u, v = (a, b) if a < b else (b, a)
        return cls(tuple(u), tuple(v), axis)

    @property
    def origin(self) -> Vertex:
        return self.u


def manhattan_distance(u, v) -> int:
    if len(u) != len(v):
        raise DimensionError(f"vertex dimensions differ: {u!r} vs {v!r}")
    return sum(abs(a - b) for a, b in zip(u, v))


class GridGraph:
    """Immutable grid graph with lexicographic vertex order."""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        lx, ly, lz = spec.dims
        self.vertices: list[Vertex] = [
            (x, y, z) for x in range(lx) for y in range(ly) for z in range(lz)
        ]
        self.index: dict[Vertex, int] = {v: i for i, v in enumerate(self.vertices)}
        edges = []
        for x, y, z in self.vertices:
            if x + 1 < lx:
                edges.append(Edge((x, y, z), (x + 1, y, z), "X"))
            if y + 1 < ly:
                edges.append(Edge((x, y, z), (x, y + 1, z), "Y"))
            if z + 1 < lz:
                edges.append(Edge((x, y, z), (x, y, z + 1), "Z"))
        edges.sort()
        self.edges: list[Edge] = edges
        self.edge_index: dict[tuple[Vertex, Vertex], int] = {
            (e.u, e.v): i for i, e in enumerate(edges)
        }

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.spec.dims

    def __contains__(self, v) -> bool:
        return len(v) == 3 and all(0 <= c < d for c, d in zip(v, self.dims))

    def neighbors(self, v: Vertex) -> Iterator[Vertex]:
        for axis in range(3):
            for step in (-1, 1):
                w = list(v)
                w[axis] += step
                w = tuple(w)
                if w in self:
                    yield w

    def edge(self, a: Vertex, b: Vertex) -> Edge:
        e = Edge.between(a, b)
        if (e.u, e.v) not in self.edge_index:
            raise ValueError(f"edge {a}-{b} is not in the grid {self.dims}")
        return e

    def bfs_distance(self, source: Vertex, target: Vertex) -> int:
        if source not in self or target not in self:
            raise ValueError("vertex outside grid")
        seen = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            if v == target:
                return seen[v]
            for w in self.neighbors(v):
                if w not in seen:
                    seen[w] = seen[v] + 1
                    queue.append(w)
        raise RuntimeError("grid graph is disconnected")  # unreachable

    def is_connected(self) -> bool:
        start = self.vertices[0]
        seen = {start}
        queue = deque([start])
        while queue:
            for w in self.neighbors(queue.popleft()):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)


def build_grid(spec: GridSpec) -> GridGraph:
    return GridGraph(spec)


def edge_count(dims: tuple[int, int, int]) -> int:
    """Closed-form edge count of a cuboid grid graph."""
    lx, ly, lz = dims
    return (lx - 1) * ly * lz + lx * (ly - 1) * lz + lx * ly * (lz - 1)


def isqrt_ceil(n: int) -> int:
    from math import isqrt

    r = isqrt(n)
    return r if r * r == n else r + 1


def grid_2d_edges(n: int) -> int:
    """|E| of P_n x P_n, equal to 2n^2 - 2n."""
    return 2 * n * n - 2 * n


def grid_3d_edges(n: int) -> int:
    """|E| of P_s x P_s x P_{4s} with s = ceil(sqrt(n)), equal to 12 s^3 - 9 s^2."""
    s = isqrt_ceil(n)
    return 12 * s**3 - 9 * s**2
