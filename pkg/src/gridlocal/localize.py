"""Ideal localization of adaptive circuits on grid graphs by entanglement swapping.

Registers
---------
A :class:`QubitLayout` places, for ``n`` routed sites ``v_0 .. v_{n-1}``,

* a data qubit ``Q_j`` and a partner ``P_j`` at ``v_j``,
* two edge qubits ``R^e_u`` and ``R^e_v`` for every grid edge ``e = {u, v}``.

Qubit indices are ``Q_j = j``, ``P_j = n + j`` and, for the ``k``-th edge in
sorted order, ``R^e_u = 2n + 2k`` and ``R^e_v = 2n + 2k + 1`` (``u < v``).

Gadgets
-------
Bell measurements are compiled as CNOT(c, t), H(c) and two Z measurements.
The target outcome drives X corrections and the control outcome drives Z
corrections. All classical control is parity feed-forward.

``q_entangle`` (8 layers)
    reset all edge qubits; H; CNOT (Bell pair on every edge); Bell measurements
    at interior path vertices (3 layers); parity correction at the path end;
    SWAP the two path ends into ``P_i`` and ``P_j``.
``q_pair`` (12 layers)
    ``q_entangle`` and a teleportation of ``Q_j`` into ``P_i``.
``q_pair_inverse`` (12 layers)
    fresh entanglement along the same paths and a teleportation of ``P_i``
    back into ``Q_j``.

One source layer becomes ``q_pair``, the source ops acting on ``(Q_i, P_i)``,
then ``q_pair_inverse``: 25 layers in total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .circuit import (AdaptiveCircuit, Layer, PrimOp, Violation, ctrl_pauli, extract_layer_pairing, gate,
                      measure, pad_even, prep, validate)
from .grid import Edge, GridGraph, GridSpec, Vertex, isqrt_ceil
from .routing import bottom_floor, restrict_routable, route_2d, route_3d_partial

ENTANGLE_DEPTH = 8
PAIR_DEPTH = 12
GADGET_DEPTH = 2 * PAIR_DEPTH + 1


class LocalizationError(ValueError):
    """The source circuit cannot be localized."""


@dataclass
class QubitLayout:
    grid: GridGraph
    sites: list[Vertex]
    mode: str = "2d"

    def __post_init__(self):
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("routed sites must be distinct")
        for v in self.sites:
            if v not in self.grid:
                raise ValueError(f"site {v} outside the grid")

    @classmethod
    def for_mode(cls, n: int, mode: str) -> "QubitLayout":
        """Standard layout: diagonal of ``P_n x P_n`` (2d) or bottom floor of ``P_L x P_L x P_4L`` (3d)."""
        mode = mode.lower()
        if mode == "2d":
            grid = GridGraph(GridSpec((max(n, 1), max(n, 1), 1)))
            return cls(grid, [(i, i, 0) for i in range(n)], "2d")
        if mode == "3d":
            L = max(isqrt_ceil(n), 2)
            grid = GridGraph(GridSpec((L, L, 4 * L)))
            return cls(grid, bottom_floor(L)[:n], "3d")
        raise ValueError(f"unknown mode {mode!r}")

    # counts -----------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def n_edges(self) -> int:
        return len(self.grid.edges)

    @property
    def n_aux(self) -> int:
        return self.n + 2 * self.n_edges

    @property
    def n_tot(self) -> int:
        return self.n + self.n_aux

    # registers ----------------------------------------------------------------

    def q(self, j: int) -> int:
        return j

    def p(self, j: int) -> int:
        return self.n + j

    def r(self, a: Vertex, b: Vertex, at: Vertex) -> int:
        """Edge qubit of edge ``{a, b}`` located at ``at``."""
        e = Edge.between(a, b)
        k = self.grid.edge_index[(e.u, e.v)]
        if at == e.u:
            return 2 * self.n + 2 * k
        if at == e.v:
            return 2 * self.n + 2 * k + 1
        raise ValueError(f"{at} is not an endpoint of edge {e.u}-{e.v}")

    def edge_pair(self, k: int) -> tuple[int, int]:
        base = 2 * self.n + 2 * k
        return base, base + 1

    def location(self, qubit: int) -> Vertex:
        if qubit < 2 * self.n:
            return self.sites[qubit % self.n]
        k, side = divmod(qubit - 2 * self.n, 2)
        e = self.grid.edges[k]
        return e.v if side else e.u

    def register_name(self, qubit: int) -> str:
        if qubit < self.n:
            return f"Q{qubit}"
        if qubit < 2 * self.n:
            return f"P{qubit - self.n}"
        k, side = divmod(qubit - 2 * self.n, 2)
        e = self.grid.edges[k]
        return f"R[{e.u}-{e.v}]@{e.v if side else e.u}"

    # routing ------------------------------------------------------------------

    def route(self, pairs: Sequence[tuple[int, int]]) -> list[list[Vertex]]:
        """Edge-disjoint paths ``v_i -> v_j`` for pairs of site indices."""
        coords = [(self.sites[i], self.sites[j]) for i, j in pairs]
        if not coords:
            return []
        if self.grid.spec.is_2d:
            return [p.vertices for p in route_2d(self.grid.dims[0], coords)]
        L = self.grid.dims[0]
        if self.grid.dims != (L, L, 4 * L):
            raise ValueError("3D layouts need a P_L x P_L x P_4L grid")
        if L % 2 == 0:
            used = [v for pair in coords for v in pair]
            paths = restrict_routable(bottom_floor(L), used, coords, L, "3d")
        else:
            paths, _ = route_3d_partial(L, coords)
        return [p.vertices for p in paths]


def _check_pairs(layout: QubitLayout, pairs) -> list[tuple[int, int]]:
    pairs = [(int(i), int(j)) for i, j in pairs]
    seen: set[int] = set()
    for i, j in pairs:
        for s in (i, j):
            if not 0 <= s < layout.n:
                raise ValueError(f"site index {s} out of range")
            if s in seen:
                raise ValueError(f"site {s} appears in two pairs")
            seen.add(s)
    return pairs


def _entangle_layers(layout: QubitLayout, pairs, paths, prefix: str) -> tuple[list[list[PrimOp]], list[tuple[int, int]]]:
    """Layers of steps 1-7 (no final SWAPs) and the end qubits of each Bell pair."""
    first_of: dict[int, int] = {}
    for path in paths:
        for a, b in zip(path, path[1:]):
            e = Edge.between(a, b)
            first_of[layout.grid.edge_index[(e.u, e.v)]] = layout.r(a, b, a)
    resets, hadamards, cnots = [], [], []
    for k in range(layout.n_edges):
        ru, rv = layout.edge_pair(k)
        c = first_of.get(k, ru)
        t = rv if c == ru else ru
        resets += [prep(ru), prep(rv)]
        hadamards.append(gate("H", c))
        cnots.append(gate("CNOT", c, t))
    bm_cnot, bm_h, bm_meas, corr = [], [], [], []
    ends = []
    for r, path in enumerate(paths):
        xs, zs = [], []
        for m in range(1, len(path) - 1):
            w = path[m]
            rin = layout.r(path[m - 1], w, w)
            rout = layout.r(w, path[m + 1], w)
            a_id, b_id = f"{prefix}.r{r}.w{m}.a", f"{prefix}.r{r}.w{m}.b"
            bm_cnot.append(gate("CNOT", rin, rout))
            bm_h.append(gate("H", rin))
            bm_meas += [measure(rin, b_id), measure(rout, a_id)]
            xs.append(a_id)
            zs.append(b_id)
        start = layout.r(path[0], path[1], path[0])
        end = layout.r(path[-2], path[-1], path[-1])
        if xs:
            corr.append(ctrl_pauli(end, xs, zs))
        ends.append((start, end))
    return [resets, hadamards, cnots, bm_cnot, bm_h, bm_meas, corr], ends


def _emit(circ: AdaptiveCircuit, layers: list[list[PrimOp]]) -> None:
    for ops in layers:
        circ.layers.append(Layer(sorted(ops, key=lambda o: o.targets)))


def q_entangle(layout: QubitLayout, pairs, prefix: str = "e") -> AdaptiveCircuit:
    """Bell pairs on ``(P_i, P_j)`` for every pair ``(i, j)`` of site indices."""
    pairs = _check_pairs(layout, pairs)
    paths = layout.route(pairs)
    circ = AdaptiveCircuit(layout.n_tot, meta={"gadget": "entangle"})
    layers, ends = _entangle_layers(layout, pairs, paths, prefix)
    swaps = []
    for (i, j), (start, end) in zip(pairs, ends):
        swaps += [gate("SWAP", layout.p(i), start), gate("SWAP", layout.p(j), end)]
    _emit(circ, layers + [swaps])
    return circ


def q_pair(layout: QubitLayout, pairs, prefix: str = "f") -> AdaptiveCircuit:
    """Move the state of ``Q_j`` into ``P_i`` for every pair ``(i, j)``."""
    pairs = _check_pairs(layout, pairs)
    circ = q_entangle(layout, pairs, prefix)
    circ.meta = {"gadget": "pair"}
    cn, hs, ms, corr = [], [], [], []
    for r, (i, j) in enumerate(pairs):
        qj, pj = layout.q(j), layout.p(j)
        a_id, b_id = f"{prefix}.t{r}.a", f"{prefix}.t{r}.b"
        cn.append(gate("CNOT", qj, pj))
        hs.append(gate("H", qj))
        ms += [measure(qj, b_id), measure(pj, a_id)]
        corr.append(ctrl_pauli(layout.p(i), [a_id], [b_id]))
    _emit(circ, [cn, hs, ms, corr])
    return circ


def q_pair_inverse(layout: QubitLayout, pairs, prefix: str = "b") -> AdaptiveCircuit:
    """Move the state of ``P_i`` back into ``Q_j`` for every pair ``(i, j)``."""
    pairs = _check_pairs(layout, pairs)
    paths = layout.route(pairs)
    circ = AdaptiveCircuit(layout.n_tot, meta={"gadget": "pair_inverse"})
    layers, ends = _entangle_layers(layout, pairs, paths, prefix)
    cn, hs, ms, corr, swaps = [], [], [], [], []
    for r, ((i, j), (start, end)) in enumerate(zip(pairs, ends)):
        pi = layout.p(i)
        a_id, b_id = f"{prefix}.t{r}.a", f"{prefix}.t{r}.b"
        cn.append(gate("CNOT", pi, start))
        hs.append(gate("H", pi))
        ms += [measure(pi, b_id), measure(start, a_id)]
        corr.append(ctrl_pauli(end, [a_id], [b_id]))
        swaps.append(gate("SWAP", end, layout.q(j)))
    _emit(circ, layers + [cn, hs, ms, corr, swaps])
    return circ


@dataclass
class GadgetBlock:
    source_layer: int
    stage: str          # "pair", "ops" or "pair_inverse"
    start: int          # first layer index in the localized circuit
    stop: int           # one past the last layer index


@dataclass
class LocalizedCircuit:
    circuit: AdaptiveCircuit
    layout: QubitLayout
    provenance: list[GadgetBlock] = field(default_factory=list)
    source_n: int = 0
    source_depth: int = 0

    @property
    def n_tot(self) -> int:
        return self.circuit.n

    def stats(self) -> dict:
        paths = self.circuit.meta.get("max_path_length", 0)
        return {
            "mode": self.layout.mode,
            "n": self.source_n,
            "n_sites": self.layout.n,
            "grid": list(self.layout.grid.dims),
            "edges": self.layout.n_edges,
            "n_tot": self.n_tot,
            "depth": len(self.circuit.layers),
            "source_depth": self.source_depth,
            "gadget_depth": GADGET_DEPTH,
            "max_path_length": paths,
            "floors_used": self.circuit.meta.get("floors_used", 0),
            "measurements": self.circuit.measurement_count(),
        }


def remap_op(op: PrimOp, mapping: dict[int, int]) -> PrimOp:
    return op.on(*(mapping[q] for q in op.targets))


def localize_ideal(circuit: AdaptiveCircuit, mode: str = "2d") -> LocalizedCircuit:
    """Replace each layer by ``q_pair``, the layer's ops on ``(Q_i, P_i)``, ``q_pair_inverse``.

    Outcome ids of the source circuit are kept; gadget outcomes are named
    ``t<layer>.f.*`` and ``t<layer>.b.*``.
    """
    problems = validate(circuit)
    if problems:
        v = problems[0]
        raise LocalizationError(f"invalid circuit at layer {v.layer}, op {v.op}: {v.message}")
    src = pad_even(circuit)
    layout = QubitLayout.for_mode(src.n, mode)
    out = AdaptiveCircuit(layout.n_tot, meta={"source_n": circuit.n, "mode": layout.mode})
    blocks: list[GadgetBlock] = []
    max_len = 0
    floors: set[int] = set()
    for t, layer in enumerate(src.layers):
        lp = extract_layer_pairing(layer, src.n)
        paths = layout.route(lp.pairs)
        max_len = max([max_len] + [len(p) - 1 for p in paths])
        floors |= {max(v[2] for v in p) for p in paths}
        start = len(out.layers)
        out.extend(q_pair(layout, lp.pairs, f"t{t}.f"))
        blocks.append(GadgetBlock(t, "pair", start, len(out.layers)))
        mapping = {}
        for i, j in lp.pairs:
            mapping[i] = layout.q(i)
            mapping[j] = layout.p(i)
        ops = [remap_op(op, mapping) for r in range(len(lp.pairs)) for op in lp.op_assignment[r]]
        out.layers.append(Layer(sorted(ops, key=lambda o: o.targets)))
        blocks.append(GadgetBlock(t, "ops", len(out.layers) - 1, len(out.layers)))
        start = len(out.layers)
        out.extend(q_pair_inverse(layout, lp.pairs, f"t{t}.b"))
        blocks.append(GadgetBlock(t, "pair_inverse", start, len(out.layers)))
    out.meta["max_path_length"] = max_len
    out.meta["floors_used"] = len(floors) if layout.mode == "3d" else 0
    return LocalizedCircuit(out, layout, blocks, circuit.n, len(src.layers))


def locality_check(lc: LocalizedCircuit, circuit: Optional[AdaptiveCircuit] = None) -> list[Violation]:
    """Every multi-qubit op must act within one vertex or across one grid edge."""
    layout = lc.layout
    circ = circuit if circuit is not None else lc.circuit
    out = []
    for t, layer in enumerate(circ.layers):
        for k, op in enumerate(layer.ops):
            if len(op.targets) < 2:
                continue
            locs = {layout.location(q) for q in op.targets}
            if len(locs) == 1:
                continue
            a, b = sorted(locs)[:2]
            if len(locs) == 2 and sum(abs(x - y) for x, y in zip(a, b)) == 1:
                continue
            names = ", ".join(layout.register_name(q) for q in op.targets)
            out.append(Violation(t, k, f"{op.kind} {op.name or ''} on {names} spans {sorted(locs)}"))
    return out
