"""Shared helpers: an independent dense state-vector oracle and circuit generators."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from gridlocal.circuit import AdaptiveCircuit, ctrl_pauli, gate, measure, prep
from gridlocal.routing import bottom_floor, diagonal_set

S2 = np.sqrt(0.5)
ONE = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
    "H": S2 * np.array([[1, 1], [1, -1]]),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
}
TWO = {
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "CZ": np.diag([1, 1, 1, -1]),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
}


def apply_dense(psi: np.ndarray, n: int, U: np.ndarray, targets) -> np.ndarray:
    """Apply ``U`` to ``targets`` of an ``n``-qubit state (qubit 0 is the most significant axis)."""
    k = len(targets)
    t = psi.reshape([2] * n)
    t = np.moveaxis(t, list(targets), list(range(k)))
    shape = t.shape
    t = (np.asarray(U, dtype=complex) @ t.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(t, list(range(k)), list(targets)).reshape(-1)


def _project(psi, n, q, bit):
    t = psi.reshape([2] * n).copy()
    idx = [slice(None)] * n
    idx[q] = 1 - bit
    t[tuple(idx)] = 0
    return t.reshape(-1)


def dense_distribution(circuit: AdaptiveCircuit, ids=None) -> dict[str, Fraction]:
    """Exact marginal outcome distribution by brute-force branching on state vectors."""
    n = circuit.n
    ids = list(ids) if ids is not None else circuit.outcome_ids()
    ops = [op for layer in circuit.layers for op in layer.ops]
    psi0 = np.zeros(2**n, dtype=complex)
    psi0[0] = 1
    out: dict[str, float] = {}
    stack = [(0, psi0, {}, 1.0)]
    while stack:
        pc, psi, rec, prob = stack.pop()
        while pc < len(ops):
            op = ops[pc]
            if op.kind == "Clifford1":
                psi = apply_dense(psi, n, ONE[op.name], op.targets)
            elif op.kind == "Clifford2":
                psi = apply_dense(psi, n, TWO[op.name], op.targets)
            elif op.kind == "CtrlPauli":
                q = op.targets[0]
                if sum(rec[i] for i in op.z_parity) % 2:
                    psi = apply_dense(psi, n, ONE["Z"], [q])
                if sum(rec[i] for i in op.x_parity) % 2:
                    psi = apply_dense(psi, n, ONE["X"], [q])
            elif op.kind in ("MeasureZ", "PrepZero"):
                q = op.targets[0]
                branches = []
                for bit in (0, 1):
                    phi = _project(psi, n, q, bit)
                    w = float(np.vdot(phi, phi).real)
                    if w > 1e-12:
                        branches.append((bit, phi / np.sqrt(w), w))
                for bit, phi, w in branches[1:]:
                    r2 = dict(rec)
                    if op.kind == "MeasureZ":
                        r2[op.outcome_id] = bit
                    elif bit:
                        phi = apply_dense(phi, n, ONE["X"], [q])
                    stack.append((pc + 1, phi, r2, prob * w))
                bit, psi, w = branches[0]
                prob *= w
                if op.kind == "MeasureZ":
                    rec[op.outcome_id] = bit
                elif bit:
                    psi = apply_dense(psi, n, ONE["X"], [q])
            else:
                raise AssertionError(op.kind)
            pc += 1
        key = "".join(str(rec[i]) for i in ids)
        out[key] = out.get(key, 0.0) + prob
    return {k: Fraction(v).limit_denominator(1 << 20) for k, v in out.items() if v > 1e-12}


def structured_circuit(n: int, T: int, rng: np.random.Generator) -> AdaptiveCircuit:
    """Random circuit with Hadamard-rich layers so that outcomes are genuinely random.

    Layers alternate between single-qubit gates and mid-circuit measurements
    with feed-forward, two-qubit entanglers and a final full measurement.
    """
    circ = AdaptiveCircuit(n)
    produced: list[str] = []
    counter = itertools.count()
    for t in range(T):
        last = t == T - 1
        qubits = [int(q) for q in rng.permutation(n)]
        ops = []
        fresh: list[str] = []
        if last:
            for q in qubits:
                oid = f"m{next(counter)}"
                ops.append(measure(q, oid))
        elif t % 2 == 0:
            for q in qubits:
                u = rng.random()
                if u < 0.5:
                    ops.append(gate("H", q))
                elif u < 0.65 and produced:
                    ops.append(ctrl_pauli(q, [str(rng.choice(produced))], []))
                elif u < 0.8:
                    ops.append(gate(str(rng.choice(["S", "X", "Z", "SDG"])), q))
                else:
                    oid = f"m{next(counter)}"
                    ops.append(measure(q, oid))
                    fresh.append(oid)
        else:
            while len(qubits) >= 2:
                a, b = qubits.pop(), qubits.pop()
                ops.append(gate(str(rng.choice(["CNOT", "CZ", "SWAP"])), a, b))
            if qubits:
                ops.append(prep(qubits.pop()) if rng.random() < 0.5 else gate("H", qubits[0]))
        circ.append(sorted(ops, key=lambda o: o.targets))
        produced.extend(fresh)
    return circ


def protocol_circuit(model, n_total):
    """Compile a protocol model into layers: gates, measurements, corrections."""
    c = AdaptiveCircuit(n_total)
    pending = list(model.gates)
    while pending:
        used, layer, rest = set(), [], []
        for name, targets in pending:
            if used.isdisjoint(targets):
                layer.append(gate(name, *targets))
                used.update(targets)
            else:
                rest.append((name, targets))
        c.append(layer)
        pending = rest
    ids = [f"m{q}" for q in model.ctrl.measured]
    c.append([measure(q, oid) for q, oid in zip(model.ctrl.measured, ids)])
    corr = []
    for row, q in enumerate(model.ctrl.outputs):
        xs = [ids[j] for j in np.nonzero(model.ctrl.A[row])[0]]
        zs = [ids[j] for j in np.nonzero(model.ctrl.B[row])[0]]
        if xs or zs:
            corr.append(ctrl_pauli(q, xs, zs))
    c.append(corr)
    return c


def random_bottom_pairing(L: int, rng: np.random.Generator, k=None):
    sites = bottom_floor(L)
    idx = rng.permutation(len(sites))
    k = len(sites) // 2 if k is None else k
    return [(sites[idx[2 * i]], sites[idx[2 * i + 1]]) for i in range(k)]


def random_diagonal_pairing(L: int, rng: np.random.Generator):
    sites = diagonal_set(L)
    idx = rng.permutation(L)
    return [(sites[idx[2 * i]], sites[idx[2 * i + 1]]) for i in range(L // 2)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
