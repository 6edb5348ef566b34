"""Fault-tolerant architecture planning with quantum buses.

Every edge ``e`` of the coarse grid ``P_L x P_L x P_H`` owns a half-open cube
of ``m**3`` fine lattice sites, refined by a factor ``m``, and one color of
auxiliary qubit (red, green or blue for X-, Y- and Z-edges). A routed path is
cut into straight segments; each segment is served by a linear quantum bus of
cross-section ``m`` and length ``m * |segment|`` running through the cubes of
its edges. Bus outputs are joined by Bell measurements at the corners
(stitches) and the resulting long-range Bell pair teleports a data qubit.

Bus internals are never simulated: a bus is represented by its robustness
profile. The surrogate Monte Carlo lets every bus fail independently with
probability ``f(p)`` and pushes the deposited Pauli exactly through the stitch
and teleport stages.

Fine qubits are addressed as ``(color, X, Y, Z)`` with integer fine
coordinates; a coarse vertex ``v`` sits at fine position ``m * v``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuit import AdaptiveCircuit, extract_layer_pairing, pad_even, validate
from .grid import isqrt_ceil
from .noise import (
    Monomial,
    RobustnessProfile,
    ThresholdExceeded,
    parallel_repetition_bound,
    parallel_repetition_monomial,
    strength_entanglement_swap,
    strength_teleport,
    swap_chain_model,
    teleport_model,
)
from .pauli import PauliOp
from .routing import (
    bottom_floor,
    diagonal_set,
    restrict_routable,
    route_2d,
    route_3d,
    route_3d_partial,
    segment_axis,
)

Vertex = tuple[int, int, int]
FineQubit = tuple[str, int, int, int]

COLORS = ("red", "green", "blue")
P0_BUS = 1.0 / 5004
BUS_DEPTH = 12       # Clifford resource state (<= 10) + measurement + correction
STITCH_DEPTH = 6     # up to two SWAPs to bring stitch qubits together + Bell measurement
TELEPORT_DEPTH = 4   # CNOT, H, measurement, correction
FT_PAIR_DEPTH = BUS_DEPTH + STITCH_DEPTH + TELEPORT_DEPTH


class BusParameterError(ValueError):
    """Bus parameters violate ``delta >= 8 log2 R``; ``min_delta`` is the smallest valid cross-section."""

    def __init__(self, message: str, min_delta: int):
        super().__init__(message)
        self.min_delta = min_delta


class PlanError(ValueError):
    """An architecture plan precondition or invariant failed."""


# --------------------------------------------------------------------------
# logarithms and the bus condition


def scale_factor(L: int) -> int:
    """``m = 82 * ceil(log2 L)`` computed exactly."""
    if L < 2:
        raise PlanError(f"L must be >= 2, got {L}")
    return 82 * (L - 1).bit_length()


def min_bus_delta(R: int) -> int:
    """Smallest integer ``delta`` with ``delta >= 8 log2 R``, i.e. ``2**delta >= R**8``."""
    if R < 1:
        raise ValueError("R must be positive")
    return (R**8 - 1).bit_length()


def m_condition(m: int, L: int) -> dict:
    """Evaluate ``m >= 8 log(10 m L)`` in both logarithm bases.

    The natural-log reading decides ``passed``; the base-2 value is reported
    alongside.
    """
    arg = 10 * m * L
    nat = 8.0 * math.log(arg)
    two = 8.0 * math.log2(arg)
    return {"m": m, "L": L, "rhs_natural": nat, "rhs_base2": two,
            "passed_natural": m >= nat, "passed_base2": m >= two, "passed": m >= nat}


@dataclass(frozen=True)
class BusSpec:
    """A linear bus on ``P_delta x P_delta x P_R`` and its robustness profile."""

    delta: int
    R: int
    case: str
    profile: RobustnessProfile

    def to_dict(self) -> dict:
        return {"delta": self.delta, "R": self.R, "case": self.case, "profile": self.profile.to_dict()}


def bus_profile(delta: int, R: int) -> BusSpec:
    """Select the bus construction for ``(delta, R)`` and its profile.

    ``R = 2`` is a bare Bell-pair preparation, ``(1, 2p)``-robust for any
    cross-section. Longer buses need ``delta >= 8 log2 R`` and are
    ``(1/5004, 5004 p)``-robust.

    Raises:
        BusParameterError: if the cross-section is too small.
    """
    delta, R = int(delta), int(R)
    if R < 2 or delta < 1:
        raise BusParameterError(f"need R >= 2 and delta >= 1, got delta={delta}, R={R}", max(1, min_bus_delta(max(R, 1))))
    if R == 2:
        return BusSpec(delta, R, "R2", RobustnessProfile(1.0, Monomial(2.0, 1.0), 2, 1))
    need = min_bus_delta(R)
    if delta < need:
        raise BusParameterError(
            f"delta = {delta} < 8 log2 {R} = {8 * math.log2(R):.4f}; need delta >= {need}", need)
    d = (delta + 1) // 2
    inner = R if R % 2 else R - 1
    # surface-code distance condition 4 log2 R' <= d of the odd construction
    if 2**d < inner**4:
        raise AssertionError(f"distance condition failed for delta={delta}, R={R}")
    case = "ODD" if R % 2 else "EVEN"
    return BusSpec(delta, R, case, RobustnessProfile(P0_BUS, Monomial(5004.0, 1.0), 2, 1))


# --------------------------------------------------------------------------
# cubes


@dataclass(frozen=True)
class Cube:
    """Half-open block ``[x, x+1) x [y, y+1) x [z, z+1)`` of fine sites in one color."""

    color: str
    origin: Vertex


@dataclass
class CubeAssignment:
    """Map from coarse edges to their colored cubes."""

    L: int
    m: int
    height: int
    cubes: dict[tuple[Vertex, Vertex], Cube]

    @property
    def fine_dims(self) -> tuple[int, int, int]:
        return (self.L * self.m, self.L * self.m, self.height * self.m)

    def cube(self, u: Vertex, v: Vertex) -> Cube:
        key = (u, v) if u < v else (v, u)
        return self.cubes[key]

    def sites(self, u: Vertex, v: Vertex) -> np.ndarray:
        """Fine coordinates of the ``m**3`` sites in the cube of edge ``{u, v}``, shape ``(m**3, 3)``."""
        c = self.cube(u, v)
        r = np.arange(self.m)
        g = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
        return g + self.m * np.asarray(c.origin)

    def site_keys(self, cube: Cube) -> np.ndarray:
        """Linear indices of a cube's sites inside its color layer."""
        X, Y, Z = self.fine_dims
        r = np.arange(self.m, dtype=np.int64)
        ox, oy, oz = (self.m * o for o in cube.origin)
        return (((ox + r)[:, None, None] * Y + (oy + r)[None, :, None]) * Z + (oz + r)[None, None, :]).ravel()

    def verify_disjoint(self) -> bool:
        """Check pairwise disjointness by hashing every site of every cube."""
        for color in COLORS:
            cubes = [c for c in self.cubes.values() if c.color == color]
            if not cubes:
                continue
            keys = np.concatenate([self.site_keys(c) for c in cubes])
            if np.unique(keys).size != keys.size:
                return False
        return True

    def total_sites(self) -> int:
        return len(self.cubes) * self.m**3


def cube_assignment(L: int, m: int, height: Optional[int] = None) -> CubeAssignment:
    """Cubes for every edge of ``P_L x P_L x P_height`` (``height`` defaults to ``4L``)."""
    if L < 2:
        raise PlanError(f"L must be >= 2, got {L}")
    H = 4 * L if height is None else int(height)
    cubes: dict[tuple[Vertex, Vertex], Cube] = {}
    for x in range(L):
        for y in range(L):
            for z in range(H):
                u = (x, y, z)
                for axis, color in enumerate(COLORS):
                    v = list(u)
                    v[axis] += 1
                    if v[axis] < (L, L, H)[axis]:
                        cubes[(u, tuple(v))] = Cube(color, u)
    return CubeAssignment(L, m, H, cubes)


# --------------------------------------------------------------------------
# plans


@dataclass
class BusPlacement:
    """One bus serving the straight segment ``alpha`` of path ``path``."""

    path: int
    alpha: int
    tag: str
    axis: int
    start: Vertex
    end: Vertex
    spec: BusSpec
    S: FineQubit
    T: FineQubit

    @property
    def length(self) -> int:
        return abs(self.end[self.axis] - self.start[self.axis])

    @property
    def color(self) -> str:
        return COLORS[self.axis]

    def cubes(self) -> list[Cube]:
        lo = min(self.start[self.axis], self.end[self.axis])
        out = []
        for s in range(lo, lo + self.length):
            o = list(self.start)
            o[self.axis] = s
            out.append(Cube(self.color, tuple(o)))
        return out

    def to_dict(self) -> dict:
        return {"path": self.path, "alpha": self.alpha, "tag": self.tag, "axis": self.axis,
                "color": self.color, "start": list(self.start), "end": list(self.end),
                "length": self.length, "delta": self.spec.delta, "R": self.spec.R,
                "case": self.spec.case, "S": list(self.S), "T": list(self.T)}


@dataclass
class Stitch:
    """Bell measurement joining bus ``alpha`` and ``alpha + 1`` of one path."""

    path: int
    alpha: int
    left: FineQubit
    right: FineQubit

    @property
    def distance(self) -> int:
        return sum(abs(a - b) for a, b in zip(self.left[1:], self.right[1:]))

    def to_dict(self) -> dict:
        return {"path": self.path, "alpha": self.alpha, "left": list(self.left),
                "right": list(self.right), "distance": self.distance}


def _endpoint_qubits(start: Vertex, end: Vertex, axis: int, m: int) -> tuple[FineQubit, FineQubit]:
    """Fine qubits at the two ends of a segment's bus slab (on the cube-corner line)."""
    color = COLORS[axis]
    s = [m * c for c in start]
    t = [m * c for c in end]
    if end[axis] > start[axis]:
        t[axis] -= 1
    else:
        s[axis] -= 1
    return (color, *s), (color, *t)


def split_segments(vertices: Sequence[Vertex]) -> list[list[Vertex]]:
    """Cut a path into maximal straight segments."""
    verts = [tuple(v) for v in vertices]
    if len(verts) < 2:
        return []
    segs = [[verts[0], verts[1]]]
    for v in verts[2:]:
        seg = segs[-1]
        if segment_axis([seg[-2], seg[-1], v]) is not None:
            seg.append(v)
        else:
            segs.append([seg[-1], v])
    return segs


@dataclass
class FTPlan:
    """Buses, stitches and output registers for one round of pairwise entanglement."""

    mode: str
    L: int
    m: int
    pairs: list[tuple[Vertex, Vertex]]
    paths: list[list[Vertex]]
    buses: list[BusPlacement]
    stitches: list[Stitch]
    outputs: list[tuple[FineQubit, FineQubit]]
    n_sites: int
    checks: dict = field(default_factory=dict)

    @property
    def height(self) -> int:
        return 4 * self.L if self.mode == "3d" else 1

    @property
    def colors_per_site(self) -> int:
        return 3 if self.mode == "3d" else 2

    @property
    def aux_qubits(self) -> int:
        return self.colors_per_site * (self.L * self.m) ** 2 * (self.height * self.m)

    @property
    def qubit_total(self) -> int:
        """``2 n + (colors) * |fine lattice|``: data and register qubit per site plus auxiliaries."""
        return 2 * self.n_sites + self.aux_qubits

    @property
    def swap_k(self) -> int:
        """Largest number of buses chained on a single path."""
        return max((len(self.buses_of(r)) for r in range(len(self.paths))), default=0)

    def buses_of(self, r: int) -> list[BusPlacement]:
        return [b for b in self.buses if b.path == r]

    def profiles(self) -> list[RobustnessProfile]:
        return [b.spec.profile for b in self.buses]

    def accounting(self) -> dict:
        """Sum of bus qubit counts against the size of their union (via cube identity)."""
        parts = sum(len(b.cubes()) for b in self.buses) * self.m**3
        distinct = {c for b in self.buses for c in b.cubes()}
        inside = all(_in_bus(b, b.S, self.m) and _in_bus(b, b.T, self.m) for b in self.buses)
        return {"sum_of_parts": parts, "union": len(distinct) * self.m**3,
                "disjoint": parts == len(distinct) * self.m**3, "endpoints_inside": inside}

    def stats(self) -> dict:
        return {"paths": len(self.paths), "buses": len(self.buses), "stitches": len(self.stitches),
                "max_segment": max((b.length for b in self.buses), default=0),
                "max_path": max((len(p) - 1 for p in self.paths), default=0),
                "max_stitch_distance": max((s.distance for s in self.stitches), default=0)}

    def to_dict(self) -> dict:
        return {"mode": self.mode, "L": self.L, "m": self.m, "n_sites": self.n_sites,
                "pairs": [[list(a), list(b)] for a, b in self.pairs],
                "paths": [[list(v) for v in p] for p in self.paths],
                "buses": [b.to_dict() for b in self.buses],
                "stitches": [s.to_dict() for s in self.stitches],
                "outputs": [[list(a), list(b)] for a, b in self.outputs],
                "qubit_total": self.qubit_total, "stats": self.stats(),
                "accounting": self.accounting(), "checks": self.checks}

    @classmethod
    def from_dict(cls, d: dict) -> "FTPlan":
        """Rebuild a plan from :meth:`to_dict` output by re-planning its paths."""
        try:
            mode, L, m = str(d["mode"]), int(d["L"]), int(d["m"])
            pairs = [(tuple(a), tuple(b)) for a, b in d["pairs"]]
            paths = [[tuple(v) for v in p] for p in d["paths"]]
            n_sites = int(d["n_sites"])
        except (KeyError, TypeError, ValueError) as exc:
            raise PlanError(f"malformed plan: {exc}") from exc
        return _build_plan(mode, L, m, pairs, paths, n_sites)


def _in_bus(b: BusPlacement, q: FineQubit, m: int) -> bool:
    return q[0] == b.color and any(
        all(m * o <= c < m * (o + 1) for o, c in zip(cube.origin, q[1:])) for cube in b.cubes())


def _build_plan(mode: str, L: int, m: int, pairs, paths, n_sites: int) -> FTPlan:
    buses: list[BusPlacement] = []
    stitches: list[Stitch] = []
    outputs: list[tuple[FineQubit, FineQubit]] = []
    for r, path in enumerate(paths):
        segs = split_segments(path)
        if mode == "3d" and len(segs) > 4:
            raise PlanError(f"path {r} has {len(segs)} straight segments, expected at most 4")
        if mode == "quasi2d" and len(segs) > 2:
            raise PlanError(f"path {r} has {len(segs)} straight segments, expected at most 2")
        mine = []
        tags = _segment_tags(mode, segs)
        for alpha, seg in enumerate(segs):
            axis = segment_axis(seg)
            length = len(seg) - 1
            try:
                spec = bus_profile(m, m * length)
            except BusParameterError as exc:
                raise PlanError(f"bus for path {r} segment {alpha}: {exc}") from exc
            S, T = _endpoint_qubits(seg[0], seg[-1], axis, m)
            mine.append(BusPlacement(r, alpha, tags[alpha], axis, seg[0], seg[-1], spec, S, T))
        for a, b in zip(mine, mine[1:]):
            stitches.append(Stitch(r, a.alpha, a.T, b.S))
        buses += mine
        outputs.append((mine[0].S, mine[-1].T))
    plan = FTPlan(mode, L, m, list(pairs), [list(p) for p in paths], buses, stitches, outputs, n_sites)
    plan.checks = {"m_condition": m_condition(m, L),
                   "segment_bound": 10 * L if mode == "3d" else 2 * L}
    if plan.stats()["max_segment"] > plan.checks["segment_bound"]:
        raise PlanError("a segment exceeds the routing length bound")
    acc = plan.accounting()
    if not (acc["disjoint"] and acc["endpoints_inside"]):
        raise PlanError(f"bus qubit sets overlap: {acc}")
    return plan


def _segment_tags(mode: str, segs: list[list[Vertex]]) -> list[str]:
    """``up``/``mid1``/``mid2``/``down`` in 3D, ``first``/``second`` in quasi-2D."""
    if mode != "3d":
        return ["first", "second"][: len(segs)]
    tags, mids = [], 0
    for alpha, seg in enumerate(segs):
        if segment_axis(seg) == 2:
            tags.append("up" if alpha == 0 else "down")
        else:
            mids += 1
            tags.append(f"mid{mids}")
    return tags


def _check_L(L: int) -> int:
    L = int(L)
    if L < 2 or L % 2:
        raise PlanError(f"L must be even and >= 2, got {L}")
    return L


def _checked_m(L: int) -> int:
    m = scale_factor(L)
    cond = m_condition(m, L)
    if not cond["passed"]:
        raise AssertionError(f"m = {m} fails m >= 8 ln(10 m L) = {cond['rhs_natural']:.3f}")
    return m


def plan_ft_entangle_3d(L: int, pairing, n_sites: Optional[int] = None) -> FTPlan:
    """Plan buses for a full pairing of the bottom floor of ``P_L x P_L x P_4L``."""
    L = _check_L(L)
    m = _checked_m(L)
    pairs = [(tuple(a), tuple(b)) for a, b in pairing]
    paths = [p.vertices for p in route_3d(L, pairs)]
    return _build_plan("3d", L, m, pairs, paths, L * L if n_sites is None else n_sites)


def plan_ft_entangle_quasi2d(L: int, pairing, n_sites: Optional[int] = None) -> FTPlan:
    """Plan buses for a pairing of the diagonal sites ``(i, i, 0)`` of ``P_L x P_L``."""
    L = _check_L(L)
    m = _checked_m(L)
    pairs = [(tuple(a), tuple(b)) for a, b in pairing]
    diag = set(diagonal_set(L))
    if any(v not in diag for pair in pairs for v in pair):
        raise PlanError("quasi-2D pairs must use diagonal sites (i, i, 0)")
    paths = [p.vertices for p in route_2d(L, pairs)]
    return _build_plan("quasi2d", L, m, pairs, paths, L if n_sites is None else n_sites)


def _plan_sites(mode: str, L: int, site_pairs: list[tuple[Vertex, Vertex]], n_sites: int) -> FTPlan:
    """Plan for a partial pairing of the standard site set (any ``L >= 2`` in 3D)."""
    m = _checked_m(L)
    if not site_pairs:
        return _build_plan(mode, L, m, [], [], n_sites)
    if mode == "quasi2d":
        paths = [p.vertices for p in route_2d(L, site_pairs)]
    elif L % 2 == 0:
        used = [v for p in site_pairs for v in p]
        paths = [p.vertices for p in restrict_routable(bottom_floor(L), used, site_pairs, L, "3d")]
    else:
        routed, _ = route_3d_partial(L, site_pairs)
        paths = [p.vertices for p in routed]
    return _build_plan(mode, L, m, site_pairs, paths, n_sites)


# --------------------------------------------------------------------------
# noise calculus


def normalize_mode(mode: str) -> str:
    m = str(mode).lower().replace("-", "")
    if m in ("3d",):
        return "3d"
    if m in ("quasi2d", "q2d"):
        return "quasi2d"
    raise ValueError(f"unknown mode {mode!r}; expected '3d' or 'quasi2d'")


def composed_monomial(k: int, profile: Optional[RobustnessProfile] = None) -> dict[str, Monomial]:
    """Stage monomials: bus profile, parallel repetition, ``k``-chain swap, teleportation."""
    profile = profile or bus_profile(82, 164).profile
    par = parallel_repetition_monomial([profile], use_r_tilde=True)
    swap = par.then_swap(k) if k >= 2 else par
    return {"bus": profile.f, "parallel": par, "swap": swap, "teleport": swap.then_teleport()}


def stage_strengths(profiles: Sequence[RobustnessProfile], k: int, p: float) -> dict[str, float]:
    """Strength after each stage at noise ``p``; a stage whose output is 1 is vacuous.

    Raises:
        ThresholdExceeded: with ``stage`` set, if ``p`` is above a bus threshold.
    """
    try:
        par = parallel_repetition_bound(profiles, p, use_r_tilde=True)
    except ThresholdExceeded as exc:
        raise ThresholdExceeded(str(exc), exc.index, "bus") from exc
    bus = max(prof.f(p) for prof in profiles)
    swap = strength_entanglement_swap(par, k) if k >= 2 else par
    return {"bus": bus, "parallel": par, "swap": swap, "teleport": strength_teleport(swap)}


# --------------------------------------------------------------------------
# localization accounting


@dataclass
class FTLocalizedPlan:
    """Per-layer pairing plans and the resource and noise accounting of a localized circuit."""

    mode: str
    n: int
    L: int
    m: int
    depth: int
    layers: list[FTPlan]

    @property
    def n_tot(self) -> int:
        if self.mode == "3d":
            return 2 * self.n + 12 * (self.L * self.m) ** 3
        return 2 * self.n + 2 * self.L**2 * self.m**3

    @property
    def swap_k(self) -> int:
        return 4 if self.mode == "3d" else 2

    @property
    def ft_depth(self) -> int:
        return self.depth * (2 * FT_PAIR_DEPTH + 1)

    def monomials(self) -> dict[str, Monomial]:
        return composed_monomial(self.swap_k)

    def noise(self, p: float) -> dict[str, float]:
        profiles = [b.spec.profile for plan in self.layers for b in plan.buses] or [bus_profile(self.m, 2 * self.m).profile]
        return stage_strengths(profiles, self.swap_k, p)

    def to_dict(self) -> dict:
        mono = self.monomials()
        return {"mode": self.mode, "n": self.n, "L": self.L, "m": self.m, "source_depth": self.depth,
                "depth": self.ft_depth, "depth_per_layer": 2 * FT_PAIR_DEPTH + 1,
                "n_tot": self.n_tot, "m_condition": m_condition(self.m, self.L),
                "monomials": {k: v.to_dict() for k, v in mono.items()},
                "layers": [plan.stats() for plan in self.layers]}


def standard_sites(mode: str, n: int) -> tuple[int, list[Vertex]]:
    """Side length and data-qubit sites: the diagonal (quasi-2D) or the bottom floor (3D)."""
    if mode == "quasi2d":
        L = max(n, 2)
        return L, [(i, i, 0) for i in range(n)]
    L = max(isqrt_ceil(n), 2)
    return L, bottom_floor(L)[:n]


def ft_localize(circuit: AdaptiveCircuit, mode: str = "3d") -> FTLocalizedPlan:
    """Plan the bus-based pairing gadgets for every layer of ``circuit``."""
    mode = normalize_mode(mode)
    problems = validate(circuit)
    if problems:
        v = problems[0]
        raise PlanError(f"invalid circuit at layer {v.layer}, op {v.op}: {v.message}")
    src = pad_even(circuit)
    L, sites = standard_sites(mode, src.n)
    layers = []
    for layer in src.layers:
        lp = extract_layer_pairing(layer, src.n)
        site_pairs = [(sites[i], sites[j]) for i, j in lp.pairs]
        layers.append(_plan_sites(mode, L, site_pairs, src.n))
    return FTLocalizedPlan(mode, src.n, L, scale_factor(L), len(src.layers), layers)


def ft_plan_for_n(n: int, mode: str) -> tuple[FTPlan, FTLocalizedPlan]:
    """Plan for ``n`` data qubits with the mirror pairing ``(i, n - 1 - i)`` as the sample layer."""
    mode = normalize_mode(mode)
    if n < 2:
        raise PlanError(f"need n >= 2, got {n}")
    n_even = n + (n % 2)
    L, sites = standard_sites(mode, n_even)
    pairs = [(sites[i], sites[n_even - 1 - i]) for i in range(n_even // 2)]
    plan = _plan_sites(mode, L, pairs, n_even)
    return plan, FTLocalizedPlan(mode, n_even, L, plan.m, 1, [plan])


def plan_report(plan: FTPlan, loc: FTLocalizedPlan) -> str:
    """JSON document with geometry, counts and the composed noise monomial."""
    doc = {"plan": plan.to_dict(), "localization": loc.to_dict()}
    return json.dumps(doc, indent=1, sort_keys=True)


# --------------------------------------------------------------------------
# surrogate failure model


def surrogate_profile_batch(profiles: Sequence[RobustnessProfile], p: float, trials: int,
                            rng: np.random.Generator, reduce: bool = True,
                            return_failures: bool = False):
    """Independent Bernoulli failures of Bell-pair preparations.

    Instance ``j`` fails with probability ``min(1, f_j(p))`` and then carries
    a uniform non-identity two-qubit Pauli on its output pair. With
    ``reduce`` the deposit is replaced by its minimal-support representative
    modulo the Bell stabilizers ``XX, ZZ``, which sits on the second qubit.

    Returns:
        ``(x, z)`` arrays of shape ``(trials, 2 * len(profiles))``, and the
        ``(trials, len(profiles))`` failure mask if ``return_failures``.
    """
    k = len(profiles)
    if any(prof.r != 2 for prof in profiles):
        raise ValueError("the surrogate model covers two-qubit (Bell pair) outputs")
    for j, prof in enumerate(profiles):
        if p > prof.p0:
            raise ThresholdExceeded(f"p = {p} exceeds threshold p0 = {prof.p0} of bus {j}", j, "bus")
    f = np.array([prof.f(p) for prof in profiles])
    fail = rng.random((trials, k)) < f
    code = np.where(fail, rng.integers(1, 16, size=(trials, k)), 0)
    x1, z1, x2, z2 = ((code >> s) & 1 for s in range(4))
    x = np.zeros((trials, 2 * k), dtype=np.uint8)
    z = np.zeros_like(x)
    if reduce:
        x[:, 1::2], z[:, 1::2] = x1 ^ x2, z1 ^ z2
    else:
        x[:, 0::2], z[:, 0::2], x[:, 1::2], z[:, 1::2] = x1, z1, x2, z2
    return (x, z, fail) if return_failures else (x, z)


STAGES = ("bus", "swap", "teleport")


def output_labels(plan: FTPlan, stage: str = "bus") -> list[str]:
    if stage == "bus":
        return [f"r{b.path}.a{b.alpha}.{end}" for b in plan.buses for end in "ST"]
    if stage == "swap":
        return [f"r{r}.{end}" for r in range(len(plan.paths)) for end in ("start", "end")]
    if stage == "teleport":
        return [f"r{r}.P" for r in range(len(plan.paths))]
    raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")


def surrogate_failure_batch(plan: FTPlan, p: float, trials: int, rng: np.random.Generator,
                            stage: str = "bus") -> tuple[np.ndarray, np.ndarray]:
    """Effective errors after ``stage`` for ``trials`` independent runs of ``plan``.

    ``bus``: reduced deposits on every bus output pair ``(S, T)``.
    ``swap``: errors on the two path endpoints after the stitches.
    ``teleport``: error on the teleported data qubit, one per path.
    """
    output_labels(plan, stage)
    if not plan.buses:
        width = {"bus": 0, "swap": 2 * len(plan.paths), "teleport": len(plan.paths)}[stage]
        z0 = np.zeros((trials, width), dtype=np.uint8)
        return z0, z0.copy()
    x, z = surrogate_profile_batch(plan.profiles(), p, trials, rng)
    if stage == "bus":
        return x, z
    cols: dict[int, list[int]] = {}
    for idx, b in enumerate(plan.buses):
        cols.setdefault(b.path, []).extend([2 * idx, 2 * idx + 1])
    sx, sz = [], []
    for r in range(len(plan.paths)):
        c = cols[r]
        k = len(c) // 2
        if k == 1:
            sx.append(x[:, c])
            sz.append(z[:, c])
        else:
            fx, fz = swap_chain_model(k).effective_batch(x[:, c], z[:, c])
            sx.append(fx)
            sz.append(fz)
    px, pz = np.concatenate(sx, axis=1), np.concatenate(sz, axis=1)
    if stage == "swap":
        return px, pz
    # teleport Q_j over the pair (end at v_j, start at v_i): block (Q, R, R') = (data, end, start)
    model = teleport_model(len(plan.paths))
    n = 3 * len(plan.paths)
    bx = np.zeros((trials, n), dtype=np.uint8)
    bz = np.zeros_like(bx)
    bx[:, 1::3], bz[:, 1::3] = px[:, 1::2], pz[:, 1::2]
    bx[:, 2::3], bz[:, 2::3] = px[:, 0::2], pz[:, 0::2]
    return model.effective_batch(bx, bz)


def surrogate_failure_sample(plan: FTPlan, p: float, rng: np.random.Generator, stage: str = "bus") -> PauliOp:
    """One surrogate sample as a Pauli on the outputs of ``stage``."""
    x, z = surrogate_failure_batch(plan, p, 1, rng, stage)
    return PauliOp.from_bits(x[0], z[0])


def stage_bound(plan: FTPlan, p: float, stage: str) -> float:
    """Local-stochastic strength the calculus guarantees after ``stage``."""
    s = stage_strengths(plan.profiles(), plan.swap_k, p) if plan.buses else {st: 0.0 for st in ("bus", "parallel", "swap", "teleport")}
    return {"bus": s["parallel"], "swap": s["swap"], "teleport": s["teleport"]}[stage]
