"""Stabilizer-tableau simulation of adaptive Clifford circuits.

The tableau follows Aaronson and Gottesman (rows ``0..n-1`` destabilizers,
``n..2n-1`` stabilizers) with one extension: every sign is an *affine form*
over F_2 in the outcomes of random measurements. A form is a Python int whose
bit 0 is the constant and whose bit ``k + 1`` is the coefficient of random
variable ``k``.

Three measurement modes share the same code path:

* ``sample``   -- random outcomes are drawn from a generator (forms stay constant)
* ``symbolic`` -- each random outcome becomes a fresh variable
* branching    -- :func:`run_all_branches` forks the tableau at each random outcome

Symbolic runs give the exact outcome distribution of a Clifford circuit with
parity feed-forward: the recorded outcomes are an affine image of uniformly
random bits, see :class:`AffineDistribution`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .circuit import AdaptiveCircuit, PrimOp
from .pauli import PauliOp, _conj_gate

Form = int  # affine form over F_2: bit 0 constant, bit k+1 variable k


class NonCliffordError(ValueError):
    """The circuit contains an operation the stabilizer simulator cannot run."""


class BranchBudgetExceeded(RuntimeError):
    """Branch enumeration needs more random outcomes than allowed."""


class InconclusiveError(ValueError):
    """Reduced state is entangled with the rest of the system."""


def _vec_to_int(vec: np.ndarray) -> int:
    if vec.size == 0:
        return 0
    return int.from_bytes(np.packbits(vec.astype(np.uint8), bitorder="little").tobytes(), "little")


def _int_to_vec(value: int, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=np.uint8)
    k = 0
    while value:
        if value & 1:
            out[k] = 1
        value >>= 1
        k += 1
    return out


def _phase_g(x1, z1, x2, z2) -> np.ndarray:
    """Per-row exponent (mod 4) of i in sigma(row1) * sigma(row2)."""
    nx1, nz1 = 1 - x1, 1 - z1
    nx2, nz2 = 1 - x2, 1 - z2
    xp, yp, zp = x1 & nz1, x1 & z1, z1 & nx1
    xq, yq, zq = x2 & nz2, x2 & z2, z2 & nx2
    plus = (yp & zq) | (xp & yq) | (zp & xq)
    minus = (yp & xq) | (xp & zq) | (zp & yq)
    return (plus.sum(axis=-1, dtype=np.int64) - minus.sum(axis=-1, dtype=np.int64)) % 4


class Tableau:
    """Stabilizer state on ``n`` qubits, initialised to |0...0>."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        self.rv = np.zeros((2 * n, 0), dtype=np.uint8)
        self.nvars = 0
        idx = np.arange(n)
        self.x[idx, idx] = 1
        self.z[n + idx, idx] = 1

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n, t.nvars = self.n, self.nvars
        t.x, t.z, t.r, t.rv = self.x.copy(), self.z.copy(), self.r.copy(), self.rv.copy()
        return t

    # sign forms ------------------------------------------------------------

    def new_variable(self) -> Form:
        k = self.nvars
        self.nvars += 1
        if self.nvars > self.rv.shape[1]:
            cap = max(8, 2 * self.rv.shape[1])
            grown = np.zeros((2 * self.n, cap), dtype=np.uint8)
            grown[:, : self.rv.shape[1]] = self.rv
            self.rv = grown
        return 1 << (k + 1)

    def row_form(self, i: int) -> Form:
        return int(self.r[i]) | (_vec_to_int(self.rv[i, : self.nvars]) << 1)

    def _xor_form(self, rows, form: Form) -> None:
        if form & 1:
            self.r[rows] ^= 1
        if form >> 1:
            self.rv[rows] ^= _int_to_vec(form >> 1, self.rv.shape[1])

    # gates -----------------------------------------------------------------

    def apply_gate(self, name: str, targets: Sequence[int]) -> None:
        flips = _conj_gate(name, targets, self.x, self.z)
        self.r ^= flips.astype(np.uint8)

    def apply_pauli(self, pauli: PauliOp, form: Form = 1) -> None:
        """Apply ``pauli**c`` where ``c`` is the value of ``form`` (default: always)."""
        if form == 0 or pauli.is_identity():
            return
        anti = np.zeros(2 * self.n, dtype=np.uint8)
        for q in pauli.support():
            if (pauli.z >> q) & 1:
                anti ^= self.x[:, q]
            if (pauli.x >> q) & 1:
                anti ^= self.z[:, q]
        self._xor_form(np.nonzero(anti)[0], form)

    def _rowsum(self, hs: np.ndarray, i: int) -> None:
        """Rows ``hs`` <- row ``i`` * row ``h`` (signs as forms)."""
        if len(hs) == 0:
            return
        g = _phase_g(self.x[i], self.z[i], self.x[hs], self.z[hs])
        self.r[hs] ^= self.r[i] ^ (g >= 2).astype(np.uint8)
        if self.nvars:
            self.rv[hs] ^= self.rv[i]
        self.x[hs] ^= self.x[i]
        self.z[hs] ^= self.z[i]

    # measurement -------------------------------------------------------------

    def random_pivot(self, a: int) -> Optional[int]:
        """Stabilizer row anticommuting with Z_a, or None if Z_a is determined."""
        rows = np.nonzero(self.x[self.n:, a])[0]
        return int(rows[0]) + self.n if len(rows) else None

    def deterministic_outcome(self, a: int) -> Form:
        n = self.n
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        sr = 0
        sv = np.zeros(self.rv.shape[1], dtype=np.uint8)
        for i in np.nonzero(self.x[:n, a])[0]:
            row = i + n
            g = int(_phase_g(self.x[row], self.z[row], sx, sz))
            sr ^= int(self.r[row]) ^ (1 if g >= 2 else 0)
            sv ^= self.rv[row]
            sx ^= self.x[row]
            sz ^= self.z[row]
        return sr | (_vec_to_int(sv[: self.nvars]) << 1)

    def collapse(self, a: int, p: int, outcome: Form) -> None:
        """Random-measurement update with pivot row ``p`` and the given outcome form."""
        n = self.n
        hs = np.nonzero(self.x[:, a])[0]
        hs = hs[hs != p]
        self._rowsum(hs, p)
        d = p - n
        self.x[d], self.z[d], self.r[d] = self.x[p], self.z[p], self.r[p]
        self.rv[d] = self.rv[p]
        self.x[p] = 0
        self.z[p] = 0
        self.z[p, a] = 1
        self.r[p] = outcome & 1
        self.rv[p] = _int_to_vec(outcome >> 1, self.rv.shape[1])

    def measure(self, a: int, rng: Optional[np.random.Generator] = None, *,
                symbolic: bool = False) -> tuple[Form, bool]:
        p = self.random_pivot(a)
        if p is None:
            return self.deterministic_outcome(a), False
        if symbolic:
            outcome = self.new_variable()
        else:
            if rng is None:
                raise ValueError("random measurement needs an rng or symbolic mode")
            outcome = int(rng.integers(2))
        self.collapse(a, p, outcome)
        return outcome, True

    def reset(self, a: int, rng: Optional[np.random.Generator] = None, *, symbolic: bool = False) -> None:
        outcome, _ = self.measure(a, rng, symbolic=symbolic)
        self.apply_pauli(PauliOp.single(self.n, a, "X"), outcome)

    # queries -----------------------------------------------------------------

    def stabilizers(self) -> list[tuple[PauliOp, Form]]:
        out = []
        for i in range(self.n, 2 * self.n):
            out.append((PauliOp.from_bits(self.x[i], self.z[i]), self.row_form(i)))
        return out

    def expectation_form(self, pauli: PauliOp) -> Optional[Form]:
        """Sign form ``s`` with ``(-1)^s * pauli`` in the stabilizer group, else None."""
        n = self.n
        px, pz = pauli.x_bits, pauli.z_bits
        anti_stab = (self.x[n:] @ pz + self.z[n:] @ px) % 2
        if anti_stab.any():
            return None
        anti_destab = (self.x[:n] @ pz + self.z[:n] @ px) % 2
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        sr = 0
        sv = np.zeros(self.rv.shape[1], dtype=np.uint8)
        for i in np.nonzero(anti_destab)[0]:
            row = i + n
            g = int(_phase_g(self.x[row], self.z[row], sx, sz))
            sr ^= int(self.r[row]) ^ (1 if g >= 2 else 0)
            sv ^= self.rv[row]
            sx ^= self.x[row]
            sz ^= self.z[row]
        # the product equals (-1)^sr * pauli up to the letter phase of pauli itself
        if not (np.array_equal(sx, px) and np.array_equal(sz, pz)):
            raise AssertionError("tableau is not a valid symplectic basis")
        sign = sr ^ (pauli.phase // 2)
        return sign | (_vec_to_int(sv[: self.nvars]) << 1)

    def is_valid(self) -> bool:
        """Check the symplectic-basis and commutation invariants."""
        n = self.n
        omega = (self.x @ self.z.T + self.z @ self.x.T) % 2
        expected = np.zeros((2 * n, 2 * n), dtype=omega.dtype)
        idx = np.arange(n)
        expected[idx, idx + n] = 1
        expected[idx + n, idx] = 1
        return bool(np.array_equal(omega, expected))


# --------------------------------------------------------------------------
# circuit execution


@dataclass
class OutcomeRecord:
    values: dict[str, Form] = field(default_factory=dict)

    def bits(self) -> dict[str, int]:
        return {k: v & 1 for k, v in self.values.items()}

    def __getitem__(self, key: str) -> Form:
        return self.values[key]


def _parity_form(record: dict[str, Form], ids: Sequence[str]) -> Form:
    out = 0
    for oid in ids:
        out ^= record[oid]
    return out


def _check_schedule(circuit: AdaptiveCircuit, schedule):
    if schedule is None:
        return [None] * (len(circuit.layers) + 1)
    if len(schedule) != len(circuit.layers) + 1:
        raise ValueError(f"schedule length {len(schedule)} != depth + 1 = {len(circuit.layers) + 1}")
    for e in schedule:
        if e is not None and e.n != circuit.n:
            raise ValueError("error schedule qubit count mismatch")
    return list(schedule)


def _check_clifford(circuit: AdaptiveCircuit) -> None:
    for t, op in circuit.ops():
        if op.kind == "PrepMagic":
            raise NonCliffordError(f"layer {t}: magic-state preparation on qubit {op.targets[0]} is not Clifford")
        if op.kind == "CtrlGeneral":
            raise NonCliffordError(f"layer {t}: general classical control {op.descriptor!r} cannot be simulated")


def _steps(circuit: AdaptiveCircuit, schedule):
    """Flatten into ('op', op) and ('err', pauli, measured_ids) steps."""
    steps = []
    if schedule[0] is not None:
        steps.append(("err", schedule[0], {}))
    for t, layer in enumerate(circuit.layers):
        for op in layer.ops:
            steps.append(("op", op))
        err = schedule[t + 1]
        if err is not None:
            measured = {op.targets[0]: op.outcome_id for op in layer.ops if op.kind == "MeasureZ"}
            steps.append(("err", err, measured))
    return steps


def _apply_nonrandom(tab: Tableau, step, record: dict[str, Form]) -> None:
    if step[0] == "err":
        _, err, measured = step
        tab.apply_pauli(err)
        for q, oid in measured.items():
            if (err.x >> q) & 1:
                record[oid] ^= 1
        return
    op: PrimOp = step[1]
    if op.kind in ("Clifford1", "Clifford2"):
        tab.apply_gate(op.name, op.targets)
    elif op.kind == "CtrlPauli":
        q = op.targets[0]
        tab.apply_pauli(PauliOp.single(tab.n, q, "X"), _parity_form(record, op.x_parity))
        tab.apply_pauli(PauliOp.single(tab.n, q, "Z"), _parity_form(record, op.z_parity))
    else:
        raise AssertionError(op.kind)


def _execute(tab: Tableau, steps, record, rng, symbolic) -> None:
    for step in steps:
        if step[0] == "op" and step[1].kind == "MeasureZ":
            op = step[1]
            record[op.outcome_id], _ = tab.measure(op.targets[0], rng, symbolic=symbolic)
        elif step[0] == "op" and step[1].kind == "PrepZero":
            tab.reset(step[1].targets[0], rng, symbolic=symbolic)
        else:
            _apply_nonrandom(tab, step, record)


def run(circuit: AdaptiveCircuit, schedule=None, rng: Optional[np.random.Generator] = None,
        *, initial: Optional[Tableau] = None) -> tuple[Tableau, OutcomeRecord]:
    """Sample one trajectory of the noisy implementation of ``circuit``.

    ``schedule`` holds E^(0)..E^(T) (``None`` entries mean no error); E^(t) acts
    after layer t, and its X part flips the record of qubits measured in layer t.
    """
    _check_clifford(circuit)
    schedule = _check_schedule(circuit, schedule)
    tab = initial.copy() if initial is not None else Tableau(circuit.n)
    record: dict[str, Form] = {}
    _execute(tab, _steps(circuit, schedule), record, rng or np.random.default_rng(), False)
    return tab, OutcomeRecord(record)


def run_symbolic(circuit: AdaptiveCircuit, schedule=None, *,
                 initial: Optional[Tableau] = None) -> tuple[Tableau, OutcomeRecord]:
    """Run with every random outcome kept as a free variable."""
    _check_clifford(circuit)
    schedule = _check_schedule(circuit, schedule)
    tab = initial.copy() if initial is not None else Tableau(circuit.n)
    record: dict[str, Form] = {}
    _execute(tab, _steps(circuit, schedule), record, None, True)
    return tab, OutcomeRecord(record)


@dataclass
class Branch:
    outcomes: dict[str, int]
    log2_inv_prob: int
    tableau: Tableau

    @property
    def probability(self) -> Fraction:
        return Fraction(1, 2 ** self.log2_inv_prob)


def run_all_branches(circuit: AdaptiveCircuit, schedule=None, *, budget: int = 20,
                     initial: Optional[Tableau] = None) -> list[Branch]:
    """Enumerate every measurement branch with its exact (dyadic) probability."""
    _check_clifford(circuit)
    schedule = _check_schedule(circuit, schedule)
    steps = _steps(circuit, schedule)
    start = initial.copy() if initial is not None else Tableau(circuit.n)
    out: list[Branch] = []
    stack = [(0, start, {}, 0)]
    while stack:
        pc, tab, record, depth_ = stack.pop()
        while pc < len(steps):
            step = steps[pc]
            if step[0] == "op" and step[1].kind in ("MeasureZ", "PrepZero"):
                op = step[1]
                a = op.targets[0]
                p = tab.random_pivot(a)
                if p is None:
                    outcome = tab.deterministic_outcome(a)
                else:
                    if depth_ + 1 > budget:
                        raise BranchBudgetExceeded(f"more than {budget} random outcomes along one branch")
                    other = tab.copy()
                    other.collapse(a, p, 1)
                    other_rec = dict(record)
                    if op.kind == "MeasureZ":
                        other_rec[op.outcome_id] = 1
                    else:
                        other.apply_pauli(PauliOp.single(other.n, a, "X"))
                    stack.append((pc + 1, other, other_rec, depth_ + 1))
                    tab.collapse(a, p, 0)
                    outcome = 0
                    depth_ += 1
                if op.kind == "MeasureZ":
                    record[op.outcome_id] = outcome
                else:
                    tab.apply_pauli(PauliOp.single(tab.n, a, "X"), outcome)
            else:
                _apply_nonrandom(tab, step, record)
            pc += 1
        out.append(Branch({k: v & 1 for k, v in record.items()}, depth_, tab))
    return out


def branch_distribution(branches: Sequence[Branch], ids: Optional[Sequence[str]] = None) -> dict[str, Fraction]:
    """Marginal distribution over outcome strings (ids in the given order)."""
    dist: dict[str, Fraction] = {}
    for b in branches:
        keys = ids if ids is not None else sorted(b.outcomes)
        s = "".join(str(b.outcomes[k]) for k in keys)
        dist[s] = dist.get(s, Fraction(0)) + b.probability
    return dist


def distribution_csv(dist: dict[str, Fraction]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["outcome_string", "numerator", "log2_denominator"])
    for s in sorted(dist):
        p = dist[s]
        log2_den = p.denominator.bit_length() - 1
        if p.denominator != 1 << log2_den:
            raise AssertionError("branch probability is not dyadic")
        w.writerow([s, p.numerator, log2_den])
    return buf.getvalue()


# --------------------------------------------------------------------------
# exact outcome distributions from symbolic runs


def _rank_and_basis(rows: list[int]) -> list[int]:
    """Echelon basis of a list of bit-mask vectors over F_2."""
    basis: list[int] = []
    for v in rows:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return basis


def _reduce(v: int, basis: list[int]) -> int:
    for b in basis:
        v = min(v, v ^ b)
    return v


@dataclass
class AffineDistribution:
    """Uniform distribution on ``{offset + span(basis)}`` over the listed ids.

    Vectors are bit masks with bit ``i`` standing for ``ids[i]``.
    """

    ids: list[str]
    basis: list[int]
    offset: int

    @classmethod
    def from_forms(cls, ids: Sequence[str], forms: dict[str, Form]) -> "AffineDistribution":
        ids = list(ids)
        offset = 0
        columns: dict[int, int] = {}
        for i, oid in enumerate(ids):
            f = forms[oid]
            if f & 1:
                offset |= 1 << i
            v, k = f >> 1, 0
            while v:
                if v & 1:
                    columns[k] = columns.get(k, 0) | (1 << i)
                v >>= 1
                k += 1
        basis = _rank_and_basis(list(columns.values()))
        return cls(ids, basis, _reduce(offset, basis))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def probability(self, outcome: dict[str, int]) -> Fraction:
        v = sum(outcome[oid] << i for i, oid in enumerate(self.ids))
        return Fraction(1, 2 ** self.rank) if _reduce(v, self.basis) == self.offset else Fraction(0)

    def support(self, limit: int = 1 << 20) -> list[str]:
        if 2 ** self.rank > limit:
            raise BranchBudgetExceeded(f"support has 2^{self.rank} points")
        pts = {self.offset}
        for b in self.basis:
            pts |= {p ^ b for p in pts}
        return sorted("".join(str((p >> i) & 1) for i in range(len(self.ids))) for p in pts)

    def as_dict(self) -> dict[str, Fraction]:
        pr = Fraction(1, 2 ** self.rank)
        return {s: pr for s in self.support()}

    def parity_checks(self) -> list[tuple[int, int]]:
        """Basis of (mask h, value) with h . o = value for every outcome o in the support."""
        k = len(self.ids)
        checks = []
        # null space of the basis vectors, i.e. h with h . b = 0 for every b
        rows = self.basis
        pivots = []
        red = []
        for b in rows:
            for pv, rb in zip(pivots, red):
                if (b >> pv) & 1:
                    b ^= rb
            if b:
                pv = b.bit_length() - 1
                for j, rb in enumerate(red):
                    if (rb >> pv) & 1:
                        red[j] = rb ^ b
                pivots.append(pv)
                red.append(b)
        free = [i for i in range(k) if i not in pivots]
        for f in free:
            h = 1 << f
            for pv, rb in zip(pivots, red):
                if (rb >> f) & 1:
                    h |= 1 << pv
            checks.append((h, (h & self.offset).bit_count() % 2))
        return checks

    def total_variation(self, other: "AffineDistribution") -> Fraction:
        if self.ids != other.ids:
            raise ValueError("distributions over different outcome ids")
        union = _rank_and_basis(self.basis + other.basis)
        # both are uniform on cosets; overlap is a coset of the intersection or empty
        inter_rank = self.rank + other.rank - len(union)
        if _reduce(self.offset ^ other.offset, union) != 0:
            return Fraction(1)
        overlap = Fraction(2 ** inter_rank)
        p1, p2 = Fraction(1, 2 ** self.rank), Fraction(1, 2 ** other.rank)
        shared = overlap * min(p1, p2)
        return 1 - shared

    def first_difference(self, other: "AffineDistribution") -> Optional[list[str]]:
        """Outcome ids of a parity constraint that holds in one distribution only."""
        for a, b in ((self, other), (other, self)):
            for h, val in a.parity_checks():
                ok = all((h & v).bit_count() % 2 == 0 for v in b.basis)
                if not ok or (h & b.offset).bit_count() % 2 != val:
                    return [oid for i, oid in enumerate(a.ids) if (h >> i) & 1]
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineDistribution):
            return NotImplemented
        return self.ids == other.ids and self.basis == other.basis and self.offset == other.offset


def exact_distribution(circuit: AdaptiveCircuit, ids: Optional[Sequence[str]] = None,
                       schedule=None) -> AffineDistribution:
    _, rec = run_symbolic(circuit, schedule)
    ids = list(ids) if ids is not None else circuit.outcome_ids()
    return AffineDistribution.from_forms(ids, rec.values)


# --------------------------------------------------------------------------
# stabilizer-group queries


def check_bell(tab: Tableau, a: int, b: int) -> bool:
    """True iff +XX and +ZZ on (a, b) stabilize the state for every branch."""
    for letter in ("X", "Z"):
        form = tab.expectation_form(PauliOp.from_letters(tab.n, {a: letter, b: letter}))
        if form is None or form != 0:
            return False
    return True


Generator = tuple[int, int, Form]  # (x mask, z mask, sign form) on local indices


def reduced_group(tab: Tableau, qubits: Sequence[int]) -> list[Generator]:
    """Generators of the stabilizer subgroup supported on ``qubits``.

    Raises :class:`InconclusiveError` if the subsystem is not in a pure state.
    """
    n = tab.n
    qubits = list(qubits)
    rest = [q for q in range(n) if q not in set(qubits)]
    work = tab.copy()
    x, z = work.x, work.z
    free = np.arange(n, 2 * n)
    for cols in ((x, rest), (z, rest)):
        arr, cs = cols
        for c in cs:
            cand = free[arr[free, c] == 1]
            if len(cand) == 0:
                continue
            piv = cand[0]
            others = np.nonzero(arr[n:, c])[0] + n
            others = others[others != piv]
            work._rowsum(others, int(piv))
            free = free[free != piv]
    gens = []
    for row in free:
        gx = _vec_to_int(work.x[row, qubits])
        gz = _vec_to_int(work.z[row, qubits])
        if work.x[row, rest].any() or work.z[row, rest].any():
            raise AssertionError("elimination left support outside the subsystem")
        gens.append((gx, gz, work.row_form(int(row))))
    if len(gens) != len(qubits):
        raise InconclusiveError(
            f"subsystem of {len(qubits)} qubits has only {len(gens)} local stabilizers (entangled with the rest)"
        )
    return gens


def _express(gens: list[Generator], x: int, z: int) -> Optional[list[int]]:
    """Indices of generators whose (unsigned) product has symplectic vector (x, z)."""
    width = max([x.bit_length(), z.bit_length()] + [max(g[0].bit_length(), g[1].bit_length()) for g in gens] + [1])
    vecs = [(g[0] | (g[1] << width), 1 << i) for i, g in enumerate(gens)]
    target = x | (z << width)
    basis: list[tuple[int, int]] = []
    for v, tag in vecs:
        for bv, bt in basis:
            if v ^ bv < v:
                v, tag = v ^ bv, tag ^ bt
        if v:
            basis.append((v, tag))
            basis.sort(reverse=True)
    used = 0
    for bv, bt in basis:
        if target ^ bv < target:
            target, used = target ^ bv, used ^ bt
    if target:
        return None
    return [i for i in range(len(gens)) if (used >> i) & 1]


def group_sign(gens: list[Generator], m: int, x: int, z: int) -> Optional[Form]:
    """Sign form of the unsigned Pauli (x, z) inside the group, or None if absent."""
    idx = _express(gens, x, z)
    if idx is None:
        return None
    acc = PauliOp(m)
    form = 0
    for i in idx:
        gx, gz, f = gens[i]
        acc = acc * PauliOp(m, gx, gz)
        form ^= f
    if acc.phase % 2:
        raise AssertionError("stabilizer generators do not commute")
    return form ^ (acc.phase // 2)


def tableau_equivalent_under_relabeling(t1: Tableau, t2: Tableau, qubit_map: dict[int, int]) -> bool:
    """Compare the reduced states of t1 on ``qubit_map`` keys and t2 on its values."""
    src = list(qubit_map)
    dst = [qubit_map[q] for q in src]
    if len(set(dst)) != len(dst):
        raise ValueError("qubit map is not injective")
    g1 = reduced_group(t1, src)
    g2 = reduced_group(t2, dst)
    m = len(src)
    for gx, gz, f in g1:
        s = group_sign(g2, m, gx, gz)
        if s is None or s != f:
            return False
    return True


def prepare_state(n: int, gates: Sequence[tuple[str, Sequence[int]]]) -> Tableau:
    tab = Tableau(n)
    for name, targets in gates:
        tab.apply_gate(name, targets)
    return tab
