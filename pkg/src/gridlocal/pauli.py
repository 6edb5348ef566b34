"""n-qubit Pauli operators in binary symplectic form.

A :class:`PauliOp` stores its X and Z parts as packed integer bit masks
(bit ``i`` is qubit ``i``) together with a global phase ``i**phase``. Letters
are Hermitian, so ``x=z=1`` on a qubit means ``Y`` (not ``XZ``).

The noise calculus works with phase-free operators; use :func:`xor_product`
there. :meth:`PauliOp.__mul__` keeps the phase and is what the stabilizer
simulator and the dense-matrix tests rely on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ONE_QUBIT_GATES = ("I", "X", "Y", "Z", "H", "S", "SDG")
TWO_QUBIT_GATES = ("CNOT", "CZ", "SWAP")
CLIFFORD_GATES = ONE_QUBIT_GATES + TWO_QUBIT_GATES


def _mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class PauliOp:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0  # global factor i**phase

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        if self.x >> self.n or self.z >> self.n or self.x < 0 or self.z < 0:
            raise ValueError(f"bit masks exceed {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # constructors ---------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(n)

    @classmethod
    def from_bits(cls, x_bits: Sequence[int], z_bits: Sequence[int], phase: int = 0) -> "PauliOp":
        if len(x_bits) != len(z_bits):
            raise ValueError("x and z bit vectors differ in length")
        return cls(len(x_bits), _pack(x_bits), _pack(z_bits), phase)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOp":
        return cls.from_letters(n, {qubit: letter})

    @classmethod
    def from_letters(cls, n: int, letters: dict[int, str]) -> "PauliOp":
        x = z = 0
        for q, p in letters.items():
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} outside [0, {n})")
            if p in ("X", "Y"):
                x |= 1 << q
            if p in ("Z", "Y"):
                z |= 1 << q
            if p not in ("I", "X", "Y", "Z"):
                raise ValueError(f"unknown Pauli letter {p!r}")
        return cls(n, x, z)

    @classmethod
    def from_string(cls, s: str) -> "PauliOp":
        """Dense form such as ``'-XIZY'`` (qubit 0 first)."""
        phase = 0
        for prefix, ph in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2), ("i", 1)):
            if s.startswith(prefix):
                phase, s = ph, s[len(prefix):]
                break
        return cls.from_letters(len(s), {i: c for i, c in enumerate(s)}).with_phase(phase)

    @classmethod
    def from_text(cls, n: int, text: str) -> "PauliOp":
        """Sparse form such as ``'X0 Z3 Y7'``; ``'I'`` or ``''`` is the identity."""
        letters = {}
        for tok in text.split():
            if tok == "I":
                continue
            m = re.fullmatch(r"([XYZ])(\d+)", tok)
            if not m:
                raise ValueError(f"bad Pauli token {tok!r}")
            q = int(m.group(2))
            if q in letters:
                raise ValueError(f"qubit {q} listed twice")
            letters[q] = m.group(1)
        return cls.from_letters(n, letters)

    @classmethod
    def from_hex(cls, n: int, text: str) -> "PauliOp":
        xs, zs = text.split(":")
        return cls(n, int(xs, 16), int(zs, 16))

    # views ----------------------------------------------------------------

    def with_phase(self, phase: int) -> "PauliOp":
        return PauliOp(self.n, self.x, self.z, phase)

    def unsigned(self) -> "PauliOp":
        return PauliOp(self.n, self.x, self.z, 0)

    @property
    def x_bits(self) -> np.ndarray:
        return _unpack(self.x, self.n)

    @property
    def z_bits(self) -> np.ndarray:
        return _unpack(self.z, self.n)

    @property
    def sign(self) -> int:
        if self.phase % 2:
            raise ValueError("operator is anti-Hermitian; no real sign")
        return 1 if self.phase == 0 else -1

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    def support(self) -> list[int]:
        return _bit_indices(self.x | self.z)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letter(self, q: int) -> str:
        return "IXZY"[((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)]

    def to_text(self) -> str:
        toks = [f"{self.letter(q)}{q}" for q in self.support()]
        return " ".join(toks) if toks else "I"

    def to_hex(self) -> str:
        return f"{self.x:x}:{self.z:x}"

    def __str__(self) -> str:
        return ("+", "+i", "-", "-i")[self.phase] + "".join(self.letter(q) for q in range(self.n))

    # algebra --------------------------------------------------------------

    def commutes(self, other: "PauliOp") -> bool:
        _check_same_n(self, other)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; qubit 0 is the most significant tensor factor."""
        mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
                "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
        out = np.array([[1.0 + 0j]])
        for q in range(self.n):
            out = np.kron(out, mats[self.letter(q)])
        return (1j ** self.phase) * out


def _check_same_n(p: PauliOp, q: PauliOp):
    if p.n != q.n:
        raise ValueError(f"qubit counts differ: {p.n} vs {q.n}")


def _pack(bits: Iterable[int]) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b:
            out |= 1 << i
    return out


def _unpack(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=np.uint8)


def _bit_indices(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent g (mod 4) with sigma(x1,z1) sigma(x2,z2) = i^g sigma(x1^x2, z1^z2)."""
    xp, yp, zp = x1 & ~z1, x1 & z1, z1 & ~x1
    xq, yq, zq = x2 & ~z2, x2 & z2, z2 & ~x2
    plus = (yp & zq) | (xp & yq) | (zp & xq)
    minus = (yp & xq) | (xp & zq) | (zp & yq)
    return (plus.bit_count() - minus.bit_count()) % 4


def multiply(p: PauliOp, q: PauliOp) -> PauliOp:
    _check_same_n(p, q)
    g = product_phase(p.x, p.z, q.x, q.z)
    return PauliOp(p.n, p.x ^ q.x, p.z ^ q.z, p.phase + q.phase + g)


def xor_product(p: PauliOp, q: PauliOp) -> PauliOp:
    """Phase-free product used by the noise calculus."""
    _check_same_n(p, q)
    return PauliOp(p.n, p.x ^ q.x, p.z ^ q.z)


def permute(p: PauliOp, perm: Sequence[int]) -> PauliOp:
    """Move the factor on qubit ``i`` to qubit ``perm[i]``."""
    if sorted(perm) != list(range(p.n)):
        raise ValueError(f"not a permutation of range({p.n}): {perm!r}")
    x = z = 0
    for i, j in enumerate(perm):
        x |= ((p.x >> i) & 1) << j
        z |= ((p.z >> i) & 1) << j
    return PauliOp(p.n, x, z, p.phase)


# Clifford conjugation ------------------------------------------------------
#
# The functions below act in place on bit arrays with a trailing qubit axis
# (shape (..., n)) and return a boolean array of shape (...) that is true
# where the sign flips. The same code serves single operators and batches.


def _conj_gate(name: str, targets: Sequence[int], x: np.ndarray, z: np.ndarray) -> np.ndarray:
    shape = x.shape[:-1]
    if name == "I":
        return np.zeros(shape, dtype=bool)
    if name in ONE_QUBIT_GATES:
        (a,) = targets
        xa, za = x[..., a].copy(), z[..., a].copy()
        if name == "X":
            return za.astype(bool)
        if name == "Z":
            return xa.astype(bool)
        if name == "Y":
            return (xa ^ za).astype(bool)
        if name == "H":
            x[..., a], z[..., a] = za, xa
            return (xa & za).astype(bool)
        if name == "S":
            z[..., a] = za ^ xa
            return (xa & za).astype(bool)
        if name == "SDG":
            z[..., a] = za ^ xa
            return (xa & (1 - za)).astype(bool)
    if name in TWO_QUBIT_GATES:
        a, b = targets
        if a == b:
            raise ValueError(f"{name} needs two distinct qubits")
        if name == "CNOT":
            flip = (x[..., a] & z[..., b] & (x[..., b] ^ z[..., a] ^ 1)).astype(bool)
            x[..., b] ^= x[..., a]
            z[..., a] ^= z[..., b]
            return flip
        if name == "CZ":
            flip = _conj_gate("H", (b,), x, z)
            flip ^= _conj_gate("CNOT", (a, b), x, z)
            flip ^= _conj_gate("H", (b,), x, z)
            return flip
        if name == "SWAP":
            x[..., [a, b]] = x[..., [b, a]]
            z[..., [a, b]] = z[..., [b, a]]
            return np.zeros(shape, dtype=bool)
    raise ValueError(f"unknown Clifford gate {name!r} on {tuple(targets)}")


def check_disjoint(gates: Sequence[tuple[str, Sequence[int]]]) -> None:
    used: set[int] = set()
    for name, targets in gates:
        for q in targets:
            if q in used:
                raise ValueError(f"gate {name} overlaps another gate on qubit {q}")
            used.add(q)


def conjugate_bits(x: np.ndarray, z: np.ndarray, gates) -> np.ndarray:
    """Conjugate bit arrays in place by each gate in order; return sign flips."""
    flips = np.zeros(x.shape[:-1], dtype=bool)
    for name, targets in gates:
        flips ^= _conj_gate(name, targets, x, z)
    return flips


def conjugate_by_layer(p: PauliOp, layer: Sequence[tuple[str, Sequence[int]]]) -> PauliOp:
    """Return U P U^dagger for a layer of gates with disjoint supports."""
    check_disjoint(layer)
    return conjugate_by_gates(p, layer)


def conjugate_by_gates(p: PauliOp, gates) -> PauliOp:
    x, z = p.x_bits, p.z_bits
    flip = bool(conjugate_bits(x, z, gates))
    return PauliOp(p.n, _pack(x), _pack(z), p.phase + (2 if flip else 0))


def gate_matrix(name: str) -> np.ndarray:
    """Dense unitary of a generating-set gate (first target most significant)."""
    s2 = np.sqrt(0.5)
    one = {
        "I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1]),
        "H": s2 * np.array([[1, 1], [1, -1]]), "S": np.diag([1, 1j]),
        "SDG": np.diag([1, -1j]),
    }
    if name in one:
        return np.asarray(one[name], dtype=complex)
    two = {
        "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
        "CZ": np.diag([1, 1, 1, -1]),
        "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
    }
    return np.asarray(two[name], dtype=complex)
