"""Edge-disjoint routing of vertex pairings on 2D and 3D grid graphs.

2D: pairs whose X-coordinate sets and Y-coordinate sets are pairwise disjoint
are joined by L-shaped paths (horizontal run along the start row, then a
vertical run along the end column). Such paths never share an edge.

3D: on ``P_L x P_L x P_4L`` every pairing of the bottom floor is routed by
lifting each pair to a floor chosen greedily so that pairs sharing a floor
satisfy the 2D condition, then using the 2D construction inside the floor.

Floors are numbered ``1..4L`` as in the greedy algorithm; floor ``Z`` is the
slice at z-coordinate ``Z - 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .grid import Vertex, manhattan_distance

Pair = tuple[Vertex, Vertex]

SEGMENT_TAGS = ("up", "mid1", "mid2", "down")


class RoutingPreconditionError(ValueError):
    """The pairing violates a routing precondition."""

    def __init__(self, message: str, pairs: Sequence[int] = ()):
        super().__init__(message)
        self.pairs = tuple(pairs)


class PairingFormatError(ValueError):
    """A pairing document could not be parsed."""


def _as_vertex(v) -> Vertex:
    v = tuple(int(c) for c in v)
    if len(v) == 2:
        v = v + (0,)
    if len(v) != 3:
        raise ValueError(f"vertex must have 2 or 3 coordinates, got {v!r}")
    return v


def _normalize(pairs) -> list[Pair]:
    return [(_as_vertex(a), _as_vertex(b)) for a, b in pairs]


@dataclass
class RoutePath:
    """Ordered vertex sequence; consecutive vertices are grid-adjacent."""

    vertices: list[Vertex]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def edges(self) -> list[tuple[Vertex, Vertex]]:
        return [tuple(sorted((a, b))) for a, b in zip(self.vertices, self.vertices[1:])]

    @property
    def start(self) -> Vertex:
        return self.vertices[0]

    @property
    def end(self) -> Vertex:
        return self.vertices[-1]

    def is_valid(self) -> bool:
        steps_ok = all(manhattan_distance(a, b) == 1 for a, b in zip(self.vertices, self.vertices[1:]))
        return steps_ok and len(set(self.edges())) == len(self.edges())


@dataclass
class SegmentedPath:
    """A path made of up to four straight segments ``up, mid1, mid2, down``.

    Each segment is stored as its vertex list; an empty segment is a single
    vertex. ``floor`` is the 1-based floor of the mid segments.
    """

    segments: list[tuple[str, list[Vertex]]]
    floor: int = 1

    @property
    def vertices(self) -> list[Vertex]:
        out: list[Vertex] = list(self.segments[0][1])
        for _, seg in self.segments[1:]:
            if seg[0] != out[-1]:
                raise AssertionError("segments do not join")
            out.extend(seg[1:])
        return out

    def as_route(self) -> RoutePath:
        return RoutePath(self.vertices)

    @property
    def length(self) -> int:
        return sum(len(s) - 1 for _, s in self.segments)

    def segment(self, tag: str) -> list[Vertex]:
        return dict(self.segments)[tag]

    def nonempty(self) -> list[tuple[str, list[Vertex]]]:
        return [(t, s) for t, s in self.segments if len(s) > 1]

    def edges(self) -> list[tuple[Vertex, Vertex]]:
        return self.as_route().edges()

    @property
    def start(self) -> Vertex:
        return self.segments[0][1][0]

    @property
    def end(self) -> Vertex:
        return self.segments[-1][1][-1]


def segment_axis(seg: Sequence[Vertex]) -> Optional[int]:
    """Axis index along which a straight segment runs (None if empty or bent)."""
    if len(seg) < 2:
        return None
    diffs = {tuple(int(b != a) for a, b in zip(u, v)) for u, v in zip(seg, seg[1:])}
    if len(diffs) != 1:
        return None
    d = diffs.pop()
    return d.index(1) if sum(d) == 1 else None


# --------------------------------------------------------------------------
# 2D routing


def check_condition_2d(pairs) -> bool:
    """True iff X-sets and Y-sets of distinct pairs are pairwise disjoint."""
    return _first_condition_violation(_normalize(pairs)) is None


def _first_condition_violation(pairs: list[Pair]) -> Optional[tuple[int, int]]:
    xs: dict[int, int] = {}
    ys: dict[int, int] = {}
    for r, (a, b) in enumerate(pairs):
        for table, coord in ((xs, 0), (ys, 1)):
            for c in {a[coord], b[coord]}:
                if c in table:
                    return table[c], r
            for c in {a[coord], b[coord]}:
                table[c] = r
    return None


def l_path(a: Vertex, b: Vertex) -> list[Vertex]:
    """Horizontal-then-vertical path in the floor of ``a``, oriented from ``a`` to ``b``.

    The run starts at the endpoint with the smaller X-coordinate (``a`` on ties),
    so the vertex list is reversed when ``b`` has the smaller X.
    """
    if a[2] != b[2]:
        raise ValueError("endpoints lie on different floors")
    flip = b[0] < a[0]
    s, t = (b, a) if flip else (a, b)
    z = s[2]
    path = [(x, s[1], z) for x in range(s[0], t[0] + 1)]
    step = 1 if t[1] >= s[1] else -1
    path += [(t[0], y, z) for y in range(s[1] + step, t[1] + step, step)]
    return path[::-1] if flip else path


def _check_in_square(L: int, pairs: list[Pair]) -> None:
    for r, (a, b) in enumerate(pairs):
        for v in (a, b):
            if not (0 <= v[0] < L and 0 <= v[1] < L):
                raise RoutingPreconditionError(f"pair {r}: vertex {v} outside [0, {L})^2", [r])
        if a == b:
            raise RoutingPreconditionError(f"pair {r}: degenerate pair {a}", [r])


def route_2d(L: int, pairs) -> list[RoutePath]:
    """Route pairs inside one floor of ``P_L x P_L``; path ``r`` runs from ``pairs[r][0]``."""
    pairs = _normalize(pairs)
    _check_in_square(L, pairs)
    bad = _first_condition_violation(pairs)
    if bad is not None:
        raise RoutingPreconditionError(f"pairs {bad[0]} and {bad[1]} share a row or column coordinate", bad)
    return [RoutePath(l_path(a, b)) for a, b in pairs]


# --------------------------------------------------------------------------
# floor assignment and 3D routing


@dataclass
class FloorAssignment:
    floors: list[int]
    num_floors: int
    filled_cols: list[set[int]] = field(default_factory=list)
    filled_rows: list[set[int]] = field(default_factory=list)

    @property
    def floors_used(self) -> int:
        return len(set(self.floors))

    @property
    def max_floor(self) -> int:
        return max(self.floors, default=0)


def _bits_to_set(mask: int) -> set[int]:
    return {i for i in range(mask.bit_length()) if mask >> i & 1}


def _assign(pairs: list[Pair], num_floors: int) -> FloorAssignment:
    # filled columns and rows per floor, as bitmasks over the coordinate
    cols = [0] * (num_floors + 1)
    rows = [0] * (num_floors + 1)
    floors = []
    for r, (a, b) in enumerate(pairs):
        X = (1 << a[0]) | (1 << b[0])
        Y = (1 << a[1]) | (1 << b[1])
        for Z in range(1, num_floors + 1):
            if not (X & cols[Z]) and not (Y & rows[Z]):
                break
        else:
            raise AssertionError(f"floor search exhausted for pair {r}: implementation bug")
        cols[Z] |= X
        rows[Z] |= Y
        floors.append(Z)
    return FloorAssignment(floors, num_floors, [_bits_to_set(c) for c in cols[1:]],
                           [_bits_to_set(w) for w in rows[1:]])


def _check_bottom(L: int, pairs: list[Pair]) -> None:
    _check_in_square(L, pairs)
    seen: dict[Vertex, int] = {}
    for r, (a, b) in enumerate(pairs):
        for v in (a, b):
            if v[2] != 0:
                raise RoutingPreconditionError(f"pair {r}: vertex {v} is not on the bottom floor", [r])
            if v in seen:
                raise RoutingPreconditionError(f"vertex {v} appears in pairs {seen[v]} and {r}", [seen[v], r])
            seen[v] = r


def assign_floors(L: int, pairs) -> FloorAssignment:
    """Greedy floor assignment for a full pairing of the ``L x L`` bottom floor."""
    pairs = _normalize(pairs)
    if L < 2 or L % 2:
        raise RoutingPreconditionError(f"L must be even and >= 2, got {L}")
    _check_bottom(L, pairs)
    if 2 * len(pairs) != L * L:
        raise RoutingPreconditionError(f"pairing covers {2 * len(pairs)} of {L * L} bottom-floor vertices")
    return _assign(pairs, 4 * L)


def _lift(a: Vertex, b: Vertex, floor: int) -> SegmentedPath:
    z = floor - 1
    up = [(a[0], a[1], h) for h in range(0, z + 1)]
    down = [(b[0], b[1], h) for h in range(z, -1, -1)]
    mid = l_path((a[0], a[1], z), (b[0], b[1], z))
    # split the L-shape at its corner; a straight run is all mid1
    corner = (a[0], b[1], z) if b[0] < a[0] else (b[0], a[1], z)
    k = mid.index(corner)
    if k == 0:
        k = len(mid) - 1
    mid1, mid2 = mid[: k + 1], mid[k:]
    return SegmentedPath([("up", up), ("mid1", mid1), ("mid2", mid2), ("down", down)], floor)


def route_3d_partial(L: int, pairs) -> tuple[list[SegmentedPath], FloorAssignment]:
    """Route any set of disjoint bottom-floor pairs on ``P_L x P_L x P_4L`` (any ``L >= 2``)."""
    pairs = _normalize(pairs)
    if L < 2:
        raise RoutingPreconditionError(f"L must be >= 2, got {L}")
    _check_bottom(L, pairs)
    fa = _assign(pairs, 4 * L)
    return [_lift(a, b, Z) for (a, b), Z in zip(pairs, fa.floors)], fa


def route_3d(L: int, pairs) -> list[SegmentedPath]:
    """Route a full pairing of the bottom floor ``Z_L^2 x {0}`` on ``P_L x P_L x P_4L``."""
    pairs = _normalize(pairs)
    fa = assign_floors(L, pairs)
    return [_lift(a, b, Z) for (a, b), Z in zip(pairs, fa.floors)]


# --------------------------------------------------------------------------
# verification and restriction

AnyPath = Union[RoutePath, SegmentedPath, Sequence[Vertex]]


def _edges_of(path: AnyPath) -> list[tuple[Vertex, Vertex]]:
    if isinstance(path, (RoutePath, SegmentedPath)):
        return path.edges()
    return RoutePath([tuple(v) for v in path]).edges()


@dataclass(frozen=True)
class EdgeConflict:
    edge: tuple[Vertex, Vertex]
    paths: tuple[int, int]


def verify_edge_disjoint(paths: Iterable[AnyPath]) -> tuple[bool, Optional[EdgeConflict]]:
    """Check that no undirected edge is used twice; report the first conflict."""
    owner: dict[tuple[Vertex, Vertex], int] = {}
    for i, path in enumerate(paths):
        for e in _edges_of(path):
            if e in owner:
                return False, EdgeConflict(e, (owner[e], i))
            owner[e] = i
    return True, None


def diagonal_set(L: int) -> list[Vertex]:
    return [(i, i, 0) for i in range(L)]


def bottom_floor(L: int) -> list[Vertex]:
    return [(x, y, 0) for x in range(L) for y in range(L)]


def restrict_routable(S: Sequence[Vertex], S_sub: Sequence[Vertex], pairs, L: int, mode: str = "3d"):
    """Route a pairing of ``S_sub`` by completing it to a pairing of ``S``.

    Leftover vertices of ``S`` are paired lexicographically; their paths are
    discarded. ``mode`` is ``"2d"`` (single floor) or ``"3d"``.
    """
    S = [_as_vertex(v) for v in S]
    S_sub = [_as_vertex(v) for v in S_sub]
    pairs = _normalize(pairs)
    if len(S_sub) % 2:
        raise RoutingPreconditionError(f"subset has odd size {len(S_sub)}")
    if not set(S_sub) <= set(S):
        raise RoutingPreconditionError("subset is not contained in the routed set")
    covered = sorted(v for p in pairs for v in p)
    if covered != sorted(S_sub):
        raise RoutingPreconditionError("pairing does not cover the subset exactly")
    rest = sorted(set(S) - set(S_sub))
    full = pairs + list(zip(rest[0::2], rest[1::2]))
    if mode == "2d":
        return route_2d(L, full)[: len(pairs)]
    if mode == "3d":
        return route_3d(L, full)[: len(pairs)]
    raise ValueError(f"unknown mode {mode!r}")


# --------------------------------------------------------------------------
# JSON interchange


def load_pairing(text: str) -> tuple[int, list[Pair]]:
    """Parse ``{"L": int, "pairs": [[[x,y,z],[x,y,z]], ...]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PairingFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "L" not in doc or "pairs" not in doc:
        raise PairingFormatError("pairing document needs 'L' and 'pairs'")
    try:
        L = int(doc["L"])
        pairs = _normalize(doc["pairs"])
    except (TypeError, ValueError) as exc:
        raise PairingFormatError(f"malformed pairs: {exc}") from exc
    return L, pairs


def dump_pairing(L: int, pairs) -> str:
    return json.dumps({"L": L, "pairs": [[list(a), list(b)] for a, b in _normalize(pairs)]}, indent=1) + "\n"


def route_stats(paths: Sequence[AnyPath]) -> dict:
    lengths = [p.length if hasattr(p, "length") else len(p) - 1 for p in paths]
    stats = {"num_paths": len(lengths), "max_len": max(lengths, default=0), "total_len": sum(lengths)}
    floors = [p.floor for p in paths if isinstance(p, SegmentedPath)]
    if floors:
        stats["floors_used"] = len(set(floors))
        stats["max_floor"] = max(floors)
    return stats


def paths_to_json(paths: Sequence[AnyPath]) -> str:
    out = []
    for p in paths:
        if isinstance(p, SegmentedPath):
            out.append({"floor": p.floor, "vertices": [list(v) for v in p.vertices],
                        "segments": {t: [list(v) for v in s] for t, s in p.segments}})
        else:
            verts = p.vertices if isinstance(p, RoutePath) else p
            out.append({"vertices": [list(v) for v in verts]})
    return json.dumps({"paths": out, "stats": route_stats(paths)}, indent=1) + "\n"
