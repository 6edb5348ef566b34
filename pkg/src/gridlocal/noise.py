"""Local stochastic Pauli noise and the strength calculus.

A random Pauli ``E`` on ``n`` qubits is local stochastic of strength ``p`` if
``Pr[F subset supp(E)] <= p**|F|`` for every subset ``F`` of qubits. This module
provides

* samplers (independent per-qubit noise and correlated two-qubit bursts),
* an empirical checker of the defining inequality,
* closed-form strength maps for products, Clifford layers, adaptive
  corrections, entanglement swapping and teleportation,
* the exact error transform through a parity-controlled Pauli correction,
* monomial strength maps ``f(p) = a * p**b`` and robustness profiles with the
  parallel-repetition bound.

Batches of Paulis are numpy ``uint8`` arrays ``x, z`` of shape ``(trials, n)``;
phases are ignored throughout, as is customary for the noise calculus.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .pauli import PauliOp, _pack, conjugate_bits


class ThresholdExceeded(ValueError):
    """A noise strength is above a profile threshold ``p0``."""

    def __init__(self, message: str, index: Optional[int] = None, stage: Optional[str] = None):
        super().__init__(message)
        self.index = index
        self.stage = stage


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"noise strength must lie in [0, 1], got {p}")
    return p


def _clamp(v: float) -> float:
    return min(1.0, v)


# --------------------------------------------------------------------------
# closed-form strength maps


def strength_product_dependent(p: float, q: float) -> float:
    """Strength of ``E F`` for possibly dependent ``E ~ N(p)``, ``F ~ N(q)``."""
    return _clamp(2.0 * max(math.sqrt(_check_p(p)), math.sqrt(_check_p(q))))


def strength_clifford(p: float) -> float:
    """Strength of ``U E U^dagger`` for a layer ``U`` of one- and two-qubit Cliffords."""
    return _clamp(math.sqrt(2.0 * _check_p(p)))


def strength_product_disjoint(p: float, q: float) -> float:
    """Strength of ``E F`` when ``E`` and ``F`` live on complementary qubit sets."""
    return _clamp(max(math.sqrt(_check_p(p)), math.sqrt(_check_p(q))))


def strength_adaptive(p: float, w: int) -> float:
    """Strength of the commuted error behind a weight-``w`` parity correction."""
    if w < 1:
        raise ValueError("row weight w must be positive")
    p = _check_p(p)
    return 0.0 if p == 0 else _clamp(4.0 * p ** (1.0 / (4 * w)))


def strength_entanglement_swap(p: float, k: int) -> float:
    """Strength of the output error of ``k`` chained noisy Bell pairs."""
    if k < 2:
        raise ValueError("a swap chain needs k >= 2 Bell pairs")
    p = _check_p(p)
    return 0.0 if p == 0 else _clamp(4.0 * math.sqrt(2.0 * p) ** (1.0 / (4 * (k - 1))))


def strength_teleport(p: float) -> float:
    """Strength of the output error of noisy parallel teleportation."""
    p = _check_p(p)
    return 0.0 if p == 0 else _clamp(2.0 ** (17.0 / 8.0) * p ** (1.0 / 8.0))


# --------------------------------------------------------------------------
# monomial maps and robustness profiles


@dataclass(frozen=True)
class Monomial:
    """Strength map ``f(p) = min(1, a * p**b)``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"monomial needs a > 0 and b > 0, got ({self.a}, {self.b})")

    def __call__(self, p: float) -> float:
        p = _check_p(p)
        return 0.0 if p == 0 else _clamp(self.a * p**self.b)

    def then(self, c: float, e: float) -> "Monomial":
        """Compose with ``q -> c * q**e``."""
        return Monomial(c * self.a**e, self.b * e)

    def then_swap(self, k: int) -> "Monomial":
        # 4 * (sqrt(2 q))**(1/(4(k-1))) = 4 * 2**(1/(8(k-1))) * q**(1/(8(k-1)))
        e = 1.0 / (8 * (k - 1))
        return self.then(4.0 * 2.0**e, e)

    def then_teleport(self) -> "Monomial":
        return self.then(2.0 ** (17.0 / 8.0), 1.0 / 8.0)

    def then_clifford(self) -> "Monomial":
        return self.then(math.sqrt(2.0), 0.5)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class RobustnessProfile:
    """A ``(p0, f)``-robust state preparation with ``r`` output qubits.

    ``r_tilde`` is the largest weight of a minimal-support effective error on
    the output (1 for Bell pairs).
    """

    p0: float
    f: Monomial
    r: int
    r_tilde: int

    def __post_init__(self):
        if not 0 < self.p0 <= 1:
            raise ValueError("threshold p0 must lie in (0, 1]")
        if not 1 <= self.r_tilde <= self.r:
            raise ValueError("need 1 <= r_tilde <= r")

    def __call__(self, p: float) -> float:
        if p > self.p0:
            raise ThresholdExceeded(f"p = {p} exceeds threshold p0 = {self.p0}")
        return self.f(p)

    def to_dict(self) -> dict:
        return {"p0": self.p0, "f": self.f.to_dict(), "r": self.r, "r_tilde": self.r_tilde}


def parallel_repetition_bound(profiles: Sequence[RobustnessProfile], p: float,
                              use_r_tilde: bool = False) -> float:
    """Strength ``(max_j f_j(p))**(1/r)`` of the joint output of parallel instances."""
    if not profiles:
        raise ValueError("need at least one profile")
    p = _check_p(p)
    for j, prof in enumerate(profiles):
        if p > prof.p0:
            raise ThresholdExceeded(f"p = {p} exceeds threshold p0 = {prof.p0} of profile {j}", index=j)
    r = max(prof.r_tilde if use_r_tilde else prof.r for prof in profiles)
    return _clamp(max(prof.f(p) for prof in profiles) ** (1.0 / r))


def parallel_repetition_monomial(profiles: Sequence[RobustnessProfile], use_r_tilde: bool = False) -> Monomial:
    """Monomial upper bound on :func:`parallel_repetition_bound` for ``p <= min p0``.

    ``max_j a_j p**b_j <= (max_j a_j) p**(min_j b_j)`` for ``p <= 1``.
    """
    r = max(prof.r_tilde if use_r_tilde else prof.r for prof in profiles)
    a = max(prof.f.a for prof in profiles)
    b = min(prof.f.b for prof in profiles)
    return Monomial(a, b).then(1.0, 1.0 / r)


# --------------------------------------------------------------------------
# samplers


def spawn_generators(seed: int, count: int, offset: int = 0) -> list[np.random.Generator]:
    """Independent generators derived from one master seed in counter mode."""
    return [np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(offset + i,)))
            for i in range(count)]


def sample_iid_batch(n: int, p: float, trials: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Independent per-qubit noise: each qubit is hit with probability ``p`` by X, Y or Z."""
    p = _check_p(p)
    hit = rng.random((trials, n)) < p
    letter = rng.integers(1, 4, size=(trials, n))  # 1=X, 2=Y, 3=Z
    x = (hit & (letter <= 2)).astype(np.uint8)
    z = (hit & (letter >= 2)).astype(np.uint8)
    return x, z


def sample_iid_noise(n: int, p: float, rng: np.random.Generator) -> PauliOp:
    x, z = sample_iid_batch(n, p, 1, rng)
    return PauliOp.from_bits(x[0], z[0])


def sample_burst_batch(n: int, p: float, trials: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Correlated noise: qubits ``(2i, 2i+1)`` are hit together with probability ``p**2``.

    Each hit qubit carries a uniform non-identity letter. Supports are strongly
    dependent inside a block, yet ``Pr[F subset supp] <= p**|F|`` still holds.
    """
    p = _check_p(p)
    blocks = (n + 1) // 2
    hit_block = rng.random((trials, blocks)) < p * p
    hit = np.repeat(hit_block, 2, axis=1)[:, :n]
    letter = rng.integers(1, 4, size=(trials, n))
    return (hit & (letter <= 2)).astype(np.uint8), (hit & (letter >= 2)).astype(np.uint8)


def sample_nonidentity_two_qubit(trials: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform non-identity two-qubit Paulis as ``(trials, 2)`` arrays."""
    code = rng.integers(1, 16, size=trials)
    x = np.stack([(code >> 0) & 1, (code >> 2) & 1], axis=1).astype(np.uint8)
    z = np.stack([(code >> 1) & 1, (code >> 3) & 1], axis=1).astype(np.uint8)
    return x, z


def batch_to_paulis(x: np.ndarray, z: np.ndarray) -> list[PauliOp]:
    return [PauliOp.from_bits(xr, zr) for xr, zr in zip(x, z)]


def paulis_to_batch(paulis: Sequence[PauliOp]) -> tuple[np.ndarray, np.ndarray]:
    if not paulis:
        raise ValueError("empty sample list")
    n = paulis[0].n
    x = np.array([p.x_bits for p in paulis], dtype=np.uint8).reshape(len(paulis), n)
    z = np.array([p.z_bits for p in paulis], dtype=np.uint8).reshape(len(paulis), n)
    return x, z


# --------------------------------------------------------------------------
# commuting errors through parity-controlled corrections


@dataclass
class LinearControl:
    """Correction ``C(z) = X(A z) Z(B z)`` on outputs driven by outcomes of measured qubits.

    ``outputs`` and ``measured`` name the qubits of the two blocks inside an
    ``n``-qubit register; by default outputs come first.
    """

    A: np.ndarray
    B: np.ndarray
    outputs: Optional[list[int]] = None
    measured: Optional[list[int]] = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.uint8) % 2
        self.B = np.asarray(self.B, dtype=np.uint8) % 2
        if self.A.ndim != 2 or self.A.shape != self.B.shape:
            raise ValueError(f"A and B must be matrices of equal shape, got {self.A.shape} and {self.B.shape}")
        n1, n2 = self.A.shape
        if self.outputs is None:
            self.outputs = list(range(n1))
        if self.measured is None:
            self.measured = list(range(n1, n1 + n2))
        if len(self.outputs) != n1 or len(self.measured) != n2:
            raise ValueError("qubit lists do not match the matrix shape")
        if set(self.outputs) & set(self.measured):
            raise ValueError("output and measured qubits overlap")

    @property
    def n1(self) -> int:
        return self.A.shape[0]

    @property
    def n2(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return max(self.outputs + self.measured, default=-1) + 1

    def weight_hypothesis(self) -> Optional[int]:
        """Common row weight ``w`` if nonzero rows share it and columns have weight <= 1."""
        weights = {int(w) for M in (self.A, self.B) for w in M.sum(axis=1) if w}
        col = max(int(M.sum(axis=0).max(initial=0)) for M in (self.A, self.B))
        if len(weights) > 1 or col > 1:
            return None
        return weights.pop() if weights else 1

    def assert_weight_hypothesis(self, w: int) -> None:
        found = self.weight_hypothesis()
        if found is None or (found != w and (self.A.any() or self.B.any())):
            raise ValueError(f"control matrices do not have row weight {w} and column weight <= 1")
        if self.n1 * w > self.n2:
            raise ValueError(f"need n1 * w <= n2, got {self.n1} * {w} > {self.n2}")


def commute_through_adaptive(E: PauliOp, ctrl: LinearControl) -> PauliOp:
    """Error on the outputs equivalent to ``E`` acting before measurement and correction.

    Returns the ``n1``-qubit Pauli ``X(e1 + A e2) Z(f1 + B e2)`` (phase dropped).
    """
    if E.n < ctrl.n:
        raise ValueError(f"error acts on {E.n} qubits but the control needs {ctrl.n}")
    x, z = E.x_bits[None, :], E.z_bits[None, :]
    fx, fz = commute_through_adaptive_batch(x, z, ctrl)
    return PauliOp(ctrl.n1, _pack(fx[0]), _pack(fz[0]))


def commute_through_adaptive_batch(x: np.ndarray, z: np.ndarray, ctrl: LinearControl) -> tuple[np.ndarray, np.ndarray]:
    if x.shape[-1] < ctrl.n:
        raise ValueError("error batch is narrower than the control register")
    e1, f1 = x[:, ctrl.outputs], z[:, ctrl.outputs]
    e2 = x[:, ctrl.measured].astype(np.int64)
    fx = (e1 + e2 @ ctrl.A.T.astype(np.int64)) % 2
    fz = (f1 + e2 @ ctrl.B.T.astype(np.int64)) % 2
    return fx.astype(np.uint8), fz.astype(np.uint8)


# --------------------------------------------------------------------------
# Bell-measurement protocols as (Clifford layer, linear control)


@dataclass
class ProtocolModel:
    """A protocol made of one Clifford layer, Z measurements and a parity correction.

    The Bell measurement on ``(c, t)`` is compiled as CNOT(c, t), H(c) followed
    by Z measurements; the target outcome drives X corrections and the control
    outcome drives Z corrections.
    """

    n: int
    gates: list[tuple[str, tuple[int, ...]]]
    ctrl: LinearControl
    name: str = ""

    def effective_batch(self, x: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x, z = x.copy(), z.copy()
        conjugate_bits(x, z, self.gates)
        return commute_through_adaptive_batch(x, z, self.ctrl)

    def effective(self, E: PauliOp) -> PauliOp:
        fx, fz = self.effective_batch(E.x_bits[None, :], E.z_bits[None, :])
        return PauliOp(self.ctrl.n1, _pack(fx[0]), _pack(fz[0]))


def swap_chain_model(k: int, ell: int = 1) -> ProtocolModel:
    """``ell`` parallel chains of ``k`` Bell pairs joined by ``k - 1`` Bell measurements.

    Chain ``j`` owns qubits ``2kj .. 2kj + 2k - 1``; pair ``i`` is
    ``(Q_i, Q'_i) = (2kj + 2i, 2kj + 2i + 1)``. Outputs are ``Q_0`` and ``Q'_{k-1}``.
    """
    if k < 2:
        raise ValueError("a swap chain needs k >= 2")
    n = 2 * k * ell
    gates: list[tuple[str, tuple[int, ...]]] = []
    outputs, measured, controls = [], [], []
    for j in range(ell):
        base = 2 * k * j
        outputs += [base, base + 2 * k - 1]
        for i in range(k - 1):
            c, t = base + 2 * i + 1, base + 2 * i + 2
            gates.append(("CNOT", (c, t)))
            controls.append(c)
            measured += [c, t]
    gates += [("H", (c,)) for c in controls]
    A = np.zeros((2 * ell, len(measured)), dtype=np.uint8)
    B = np.zeros_like(A)
    for j in range(ell):
        for i in range(k - 1):
            col = 2 * ((k - 1) * j + i)
            B[2 * j + 1, col] = 1       # control outcome -> Z
            A[2 * j + 1, col + 1] = 1   # target outcome  -> X
    return ProtocolModel(n, gates, LinearControl(A, B, outputs, measured), f"swap(k={k}, l={ell})")


def teleport_model(ell: int = 1) -> ProtocolModel:
    """``ell`` parallel teleportations; block ``j`` is ``(Q_j, R_j, R'_j) = (3j, 3j+1, 3j+2)``."""
    gates: list[tuple[str, tuple[int, ...]]] = []
    outputs, measured = [], []
    for j in range(ell):
        q, r, rp = 3 * j, 3 * j + 1, 3 * j + 2
        gates.append(("CNOT", (q, r)))
        outputs.append(rp)
        measured += [q, r]
    gates += [("H", (3 * j,)) for j in range(ell)]
    A = np.zeros((ell, 2 * ell), dtype=np.uint8)
    B = np.zeros_like(A)
    for j in range(ell):
        B[j, 2 * j] = 1
        A[j, 2 * j + 1] = 1
    return ProtocolModel(3 * ell, gates, LinearControl(A, B, outputs, measured), f"teleport(l={ell})")


# --------------------------------------------------------------------------
# empirical verification of the local stochastic inequality


CSV_COLUMNS = ("trial_block", "subset_size", "subset", "empirical_prob", "bound", "pass")


@dataclass
class SubsetCheck:
    trial_block: int
    subset: tuple[int, ...]
    empirical: float
    bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.empirical <= self.bound + self.tolerance

    def row(self) -> list:
        return [self.trial_block, len(self.subset), " ".join(map(str, self.subset)),
                repr(self.empirical), repr(self.bound), "PASS" if self.passed else "FAIL"]


@dataclass
class LSReport:
    samples: int
    checks: list[SubsetCheck] = field(default_factory=list)

    def passed_by_size(self) -> dict[int, bool]:
        out: dict[int, bool] = {}
        for c in self.checks:
            out[len(c.subset)] = out.get(len(c.subset), True) and c.passed
        return out

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[SubsetCheck]:
        return [c for c in self.checks if not c.passed]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.checks:
            w.writerow(c.row())
        return buf.getvalue()


def support_matrix(samples) -> np.ndarray:
    """Boolean ``(trials, n)`` support matrix from PauliOps or an ``(x, z)`` pair."""
    if isinstance(samples, tuple):
        x, z = samples
        return (x | z).astype(bool)
    if len(samples) == 0:
        raise ValueError("empty sample list")
    x, z = paulis_to_batch(list(samples))
    return (x | z).astype(bool)


def subset_probability(support: np.ndarray, subset: Sequence[int]) -> float:
    if len(subset) == 0:
        return 1.0
    return float(np.all(support[:, list(subset)], axis=1).mean())


def one_sided_tolerance(bound: float, trials: int, sigma: float = 3.0) -> float:
    b = min(max(bound, 0.0), 1.0)
    return sigma * math.sqrt(b * (1.0 - b) / trials)


def estimate_ls_bound(samples, p: float, max_subset: int, trials: int, rng: np.random.Generator, *,
                      sigma: float = 3.0, bound: Optional[Callable[[int], float]] = None,
                      trial_block: int = 0) -> LSReport:
    """Check ``Pr[F subset supp(E)] <= p**|F|`` on random subsets of each size up to ``max_subset``.

    ``trials`` subsets are drawn per size. ``bound`` overrides ``p**|F|`` as a
    function of ``|F|``. A subset passes if its empirical frequency is at most
    the bound plus ``sigma`` binomial standard deviations.
    """
    if not 1 <= max_subset <= 4:
        raise ValueError("max_subset must lie in 1..4")
    p = _check_p(p)
    supp = support_matrix(samples)
    N, n = supp.shape
    if N == 0:
        raise ValueError("empty sample list")
    bound = bound or (lambda s: p**s)
    report = LSReport(N)
    for size in range(1, min(max_subset, n) + 1):
        b = float(bound(size))
        tol = one_sided_tolerance(b, N, sigma)
        for _ in range(trials):
            F = tuple(sorted(int(q) for q in rng.choice(n, size=size, replace=False)))
            report.checks.append(SubsetCheck(trial_block, F, subset_probability(supp, F), b, tol))
    return report
