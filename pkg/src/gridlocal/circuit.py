"""Layered adaptive-circuit IR with parity-controlled Pauli feed-forward."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

import numpy as np

from .pauli import ONE_QUBIT_GATES, TWO_QUBIT_GATES

FORMAT_VERSION = 1

KINDS = ("PrepZero", "PrepMagic", "Clifford1", "Clifford2", "MeasureZ", "CtrlPauli", "CtrlGeneral")


class CircuitFormatError(ValueError):
    """Raised when a circuit document cannot be parsed."""


@dataclass(frozen=True)
class PrimOp:
    kind: str
    targets: tuple[int, ...]
    name: Optional[str] = None           # Clifford name
    outcome_id: Optional[str] = None     # MeasureZ
    x_parity: tuple[str, ...] = ()       # CtrlPauli: X^(xor of these outcomes)
    z_parity: tuple[str, ...] = ()       # CtrlPauli: Z^(xor of these outcomes)
    descriptor: Optional[str] = None     # CtrlGeneral: opaque classical function
    inputs: tuple[str, ...] = ()         # CtrlGeneral: outcomes it reads

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "x_parity", tuple(self.x_parity))
        object.__setattr__(self, "z_parity", tuple(self.z_parity))
        object.__setattr__(self, "inputs", tuple(self.inputs))

    @property
    def reads(self) -> tuple[str, ...]:
        return self.x_parity + self.z_parity + self.inputs

    def on(self, *targets: int) -> "PrimOp":
        """Same operation re-targeted onto other qubits."""
        return PrimOp(self.kind, targets, self.name, self.outcome_id, self.x_parity,
                      self.z_parity, self.descriptor, self.inputs)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "targets": list(self.targets)}
        if self.name is not None:
            d["params"] = {"name": self.name}
        if self.descriptor is not None:
            d["params"] = {"descriptor": self.descriptor, "inputs": list(self.inputs)}
        if self.outcome_id is not None:
            d["outcome_id"] = self.outcome_id
        if self.kind == "CtrlPauli":
            d["parity_of"] = {"X": list(self.x_parity), "Z": list(self.z_parity)}
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PrimOp":
        try:
            kind = d["kind"]
            targets = tuple(d["targets"])
        except (KeyError, TypeError) as exc:
            raise CircuitFormatError(f"op missing kind/targets: {d!r}") from exc
        if kind not in KINDS:
            raise CircuitFormatError(f"unknown op kind {kind!r}")
        params = d.get("params") or {}
        x_par: tuple[str, ...] = ()
        z_par: tuple[str, ...] = ()
        if kind == "CtrlPauli":
            par = d.get("parity_of", {})
            if "axis" in d:  # single-axis shorthand: {"axis": "X", "parity_of": [...]}
                ids = tuple(par)
                axis = d["axis"]
                x_par = ids if axis in ("X", "Y") else ()
                z_par = ids if axis in ("Z", "Y") else ()
            else:
                x_par = tuple(par.get("X", ()))
                z_par = tuple(par.get("Z", ()))
        return cls(
            kind=kind,
            targets=targets,
            name=params.get("name"),
            outcome_id=d.get("outcome_id"),
            x_parity=x_par,
            z_parity=z_par,
            descriptor=params.get("descriptor"),
            inputs=tuple(params.get("inputs", ())),
        )


# convenience constructors
def prep(q: int) -> PrimOp:
    return PrimOp("PrepZero", (q,))


def prep_magic(q: int) -> PrimOp:
    return PrimOp("PrepMagic", (q,))


def gate(name: str, *targets: int) -> PrimOp:
    kind = "Clifford1" if len(targets) == 1 else "Clifford2"
    return PrimOp(kind, targets, name=name)


def measure(q: int, outcome_id: str) -> PrimOp:
    return PrimOp("MeasureZ", (q,), outcome_id=outcome_id)


def ctrl_pauli(q: int, x_parity: Iterable[str] = (), z_parity: Iterable[str] = ()) -> PrimOp:
    return PrimOp("CtrlPauli", (q,), x_parity=tuple(x_parity), z_parity=tuple(z_parity))


@dataclass
class Layer:
    ops: list[PrimOp] = field(default_factory=list)

    def support(self) -> set[int]:
        return {q for op in self.ops for q in op.targets}


@dataclass
class AdaptiveCircuit:
    n: int
    layers: list[Layer] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def append(self, ops: Iterable[PrimOp]) -> None:
        ops = list(ops)
        if ops:
            self.layers.append(Layer(ops))

    def extend(self, other: "AdaptiveCircuit") -> None:
        if other.n != self.n:
            raise ValueError("qubit counts differ")
        self.layers.extend(Layer(list(l.ops)) for l in other.layers)

    def outcome_ids(self) -> list[str]:
        return [op.outcome_id for l in self.layers for op in l.ops if op.kind == "MeasureZ"]

    def measurement_count(self) -> int:
        return len(self.outcome_ids())

    def ops(self) -> Iterable[tuple[int, PrimOp]]:
        for t, l in enumerate(self.layers):
            for op in l.ops:
                yield t, op

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "version": FORMAT_VERSION,
            "n": self.n,
            "layers": [{"ops": [op.to_dict() for op in l.ops]} for l in self.layers],
        }
        if self.meta:
            d["meta"] = self.meta
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AdaptiveCircuit":
        if not isinstance(d, dict) or "n" not in d or "layers" not in d:
            raise CircuitFormatError("circuit document needs 'n' and 'layers'")
        if d.get("version", FORMAT_VERSION) != FORMAT_VERSION:
            raise CircuitFormatError(f"unsupported version {d.get('version')!r}")
        layers = []
        for l in d["layers"]:
            if not isinstance(l, dict) or "ops" not in l:
                raise CircuitFormatError("each layer needs an 'ops' list")
            layers.append(Layer([PrimOp.from_dict(o) for o in l["ops"]]))
        return cls(int(d["n"]), layers, dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, text: str) -> "AdaptiveCircuit":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CircuitFormatError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)


def depth(circuit: AdaptiveCircuit) -> int:
    return len(circuit.layers)


@dataclass(frozen=True)
class Violation:
    layer: int
    op: Optional[int]
    message: str


def validate(circuit: AdaptiveCircuit) -> list[Violation]:
    """Return every invariant violation; an empty list means valid."""
    out: list[Violation] = []
    defined: set[str] = set()
    for t, layer in enumerate(circuit.layers):
        used: dict[int, int] = {}
        new_ids: list[str] = []
        for k, op in enumerate(layer.ops):
            nt = len(op.targets)
            want = 2 if op.kind == "Clifford2" or (op.kind == "CtrlGeneral" and nt == 2) else 1
            if nt != want:
                out.append(Violation(t, k, f"{op.kind} expects {want} target(s), got {nt}"))
            for q in op.targets:
                if not 0 <= q < circuit.n:
                    out.append(Violation(t, k, f"qubit {q} outside [0, {circuit.n})"))
                elif q in used:
                    out.append(Violation(t, k, f"qubit {q} already used by op {used[q]} in this layer"))
                else:
                    used[q] = k
            if len(set(op.targets)) != nt:
                out.append(Violation(t, k, "repeated target"))
            if op.kind == "Clifford1" and op.name not in ONE_QUBIT_GATES:
                out.append(Violation(t, k, f"{op.name!r} is not a one-qubit generator"))
            if op.kind == "Clifford2" and op.name not in TWO_QUBIT_GATES:
                out.append(Violation(t, k, f"{op.name!r} is not a two-qubit generator"))
            if op.kind == "MeasureZ":
                if not op.outcome_id:
                    out.append(Violation(t, k, "measurement without outcome id"))
                elif op.outcome_id in defined or op.outcome_id in new_ids:
                    out.append(Violation(t, k, f"outcome id {op.outcome_id!r} reused"))
                else:
                    new_ids.append(op.outcome_id)
            if op.kind == "CtrlGeneral" and not op.descriptor:
                out.append(Violation(t, k, "general control without descriptor"))
            for oid in op.reads:
                if oid not in defined:
                    out.append(Violation(t, k, f"causality: outcome {oid!r} not produced by an earlier layer"))
        defined.update(new_ids)
    return out


# layer pairing ----------------------------------------------------------------


@dataclass
class LayerPairing:
    pairs: list[tuple[int, int]]
    op_assignment: dict[int, list[PrimOp]]  # pair index -> ops acting inside that pair


def extract_layer_pairing(layer: Layer, n: int) -> LayerPairing:
    """Group a layer into two-qubit blocks covering all ``n`` qubits.

    Two-qubit ops keep their own (ordered) pair; qubits touched by one-qubit
    ops are then paired in ascending order, followed by idle qubits.
    """
    if n % 2:
        raise ValueError(f"qubit count must be even, got {n}; pad with an idle qubit")
    pairs: list[tuple[int, int]] = []
    ops_of: dict[int, list[PrimOp]] = {}
    single: dict[int, list[PrimOp]] = {}
    for op in layer.ops:
        if len(op.targets) == 2:
            ops_of[len(pairs)] = [op]
            pairs.append((op.targets[0], op.targets[1]))
        else:
            single.setdefault(op.targets[0], []).append(op)
    paired = {q for p in pairs for q in p}
    loose = sorted(single) + sorted(q for q in range(n) if q not in paired and q not in single)
    for a, b in zip(loose[0::2], loose[1::2]):
        ops_of[len(pairs)] = single.get(a, []) + single.get(b, [])
        pairs.append((a, b))
    return LayerPairing(pairs, ops_of)


def pad_even(circuit: AdaptiveCircuit) -> AdaptiveCircuit:
    """Append one idle qubit when the qubit count is odd."""
    if circuit.n % 2 == 0:
        return circuit
    return AdaptiveCircuit(circuit.n + 1, [Layer(list(l.ops)) for l in circuit.layers], dict(circuit.meta))


# random test circuits -----------------------------------------------------------


def random_clifford_circuit(n: int, T: int, rng: np.random.Generator, *,
                            p_measure: float = 0.2, p_prep: float = 0.1,
                            p_ctrl: float = 0.3, measure_all_at_end: bool = True) -> AdaptiveCircuit:
    """Random layered adaptive Clifford circuit with parity feed-forward."""
    circ = AdaptiveCircuit(n)
    produced: list[str] = []
    counter = 0
    for t in range(T):
        qubits = list(rng.permutation(n))
        ops: list[PrimOp] = []
        new: list[str] = []
        last = measure_all_at_end and t == T - 1
        while qubits:
            q = int(qubits.pop())
            u = rng.random()
            if last:
                ops.append(measure(q, f"m{counter}"))
                new.append(f"m{counter}")
                counter += 1
            elif qubits and u < 0.35:
                r = int(qubits.pop())
                ops.append(gate(str(rng.choice(TWO_QUBIT_GATES)), q, r))
            elif u < 0.35 + p_measure:
                ops.append(measure(q, f"m{counter}"))
                new.append(f"m{counter}")
                counter += 1
            elif u < 0.35 + p_measure + p_prep:
                ops.append(prep(q))
            elif produced and u < 0.35 + p_measure + p_prep + p_ctrl:
                k = int(rng.integers(1, min(3, len(produced)) + 1))
                xs = [str(s) for s in rng.choice(produced, size=k, replace=False)]
                zs = [str(s) for s in rng.choice(produced, size=int(rng.integers(0, 2)), replace=False)]
                ops.append(ctrl_pauli(q, xs, zs))
            else:
                ops.append(gate(str(rng.choice(ONE_QUBIT_GATES)), q))
        circ.append(sorted(ops, key=lambda o: o.targets))
        produced.extend(new)
    return circ
