"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -m acceptance -s`` to see the summary lines in order.
"""

import hashlib
import itertools
import math

import mpmath
import numpy as np
import pytest

from gridlocal.circuit import AdaptiveCircuit, gate, measure, random_clifford_circuit
from gridlocal.ftarch import (
    bus_profile,
    BusParameterError,
    ft_localize,
    plan_ft_entangle_3d,
    scale_factor,
    surrogate_profile_batch,
)
from gridlocal.localize import QubitLayout, localize_ideal, q_entangle, q_pair, q_pair_inverse
from gridlocal.noise import (
    LinearControl,
    Monomial,
    ProtocolModel,
    RobustnessProfile,
    commute_through_adaptive_batch,
    estimate_ls_bound,
    sample_iid_batch,
    spawn_generators,
    strength_adaptive,
    strength_clifford,
    strength_entanglement_swap,
    strength_product_dependent,
    strength_product_disjoint,
    strength_teleport,
    swap_chain_model,
    teleport_model,
)
from gridlocal.pauli import PauliOp, conjugate_bits
from gridlocal.routing import assign_floors, check_condition_2d, diagonal_set, route_2d, route_3d
from gridlocal.stabsim import (
    check_bell,
    exact_distribution,
    prepare_state,
    run,
    tableau_equivalent_under_relabeling,
)

from conftest import protocol_circuit, random_bottom_pairing, random_diagonal_pairing, structured_circuit

pytestmark = pytest.mark.acceptance

SEED = 20240611


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


# --------------------------------------------------------------------------
# independent path checks on numpy arrays


def step_axes(path):
    """Axis of each unit step, or -1 where a step is not a unit move."""
    v = np.asarray(path, dtype=np.int64)
    d = np.abs(np.diff(v, axis=0))
    unit = d.sum(axis=1) == 1
    return np.where(unit, d.argmax(axis=1), -1)


def edge_ids(path, dims):
    """Integer id of every undirected edge: linear index of the lower endpoint, times 3, plus the axis."""
    v = np.asarray(path, dtype=np.int64)
    lo = np.minimum(v[:-1], v[1:])
    axis = np.abs(np.diff(v, axis=0)).argmax(axis=1)
    X, Y, Z = dims
    return ((lo[:, 0] * Y + lo[:, 1]) * Z + lo[:, 2]) * 3 + axis


def disjoint_paths(paths, dims):
    ids = np.concatenate([edge_ids(p, dims) for p in paths if len(p) > 1] or [np.zeros(0, np.int64)])
    return np.unique(ids).size == ids.size


# --------------------------------------------------------------------------
# 1-3 routing


def test_criterion_01_2d_routing(capsys):
    rng = np.random.default_rng(SEED)
    bad = []
    for L in (4, 8, 16, 32, 64):
        for _ in range(100):
            pairs = random_diagonal_pairing(L, rng)
            paths = [p.vertices for p in route_2d(L, pairs)]
            if not disjoint_paths(paths, (L, L, 1)):
                bad.append((L, "edge conflict"))
            for path, (a, b) in zip(paths, pairs):
                manhattan = abs(a[0] - b[0]) + abs(a[1] - b[1])
                if (step_axes(path) < 0).any() or path[0] != a or path[-1] != b:
                    bad.append((L, "not a grid path"))
                if len(path) - 1 != manhattan or manhattan > 2 * L:
                    bad.append((L, "length"))
    report(capsys, 1, not bad, f"2D routing on diagonal pairings, 500 instances, problems={bad[:3]}")


def full_pairing_instances():
    rng = np.random.default_rng(SEED + 2)
    return {L: [random_bottom_pairing(L, rng) for _ in range(200)] for L in range(2, 33, 2)}


@pytest.fixture(scope="module")
def instances():
    return full_pairing_instances()


def test_criterion_02_floor_assignment(capsys, instances):
    bad = []
    for L, pairings in instances.items():
        for pairs in pairings:
            fa = assign_floors(L, pairs)
            if max(fa.floors) > 4 * L or min(fa.floors) < 1:
                bad.append((L, "floor range"))
            by_floor = {}
            for pr, Z in zip(pairs, fa.floors):
                by_floor.setdefault(Z, []).append(pr)
            for group in by_floor.values():
                xs = [c for a, b in group for c in {a[0], b[0]}]
                ys = [c for a, b in group for c in {a[1], b[1]}]
                if len(set(xs)) != len(xs) or len(set(ys)) != len(ys) or not check_condition_2d(group):
                    bad.append((L, "floor condition"))
    report(capsys, 2, not bad, f"floor assignment, 16 sizes x 200 pairings, problems={bad[:3]}")


def check_3d_instance(paths, pairs, L):
    """Vectorized oracle for one routed pairing; returns a list of problems."""
    dims = np.array([L, L, 4 * L])
    lens = np.array([len(p) for p in paths])
    verts = np.array([v for p in paths for v in p], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(lens)[:-1]])
    ends = starts + lens - 1
    ends_pairs = np.array([[a, b] for a, b in pairs], dtype=np.int64)
    problems = []
    if not (np.array_equal(verts[starts], ends_pairs[:, 0]) and np.array_equal(verts[ends], ends_pairs[:, 1])):
        problems.append("endpoints")
    if verts.min() < 0 or (verts >= dims).any():
        problems.append("outside the grid")
    # steps inside each path: drop the jumps between consecutive paths
    keep = np.ones(len(verts) - 1, dtype=bool)
    keep[ends[:-1]] = False
    d = np.diff(verts, axis=0)[keep]
    if (np.abs(d).sum(axis=1) != 1).any():
        problems.append("non-unit step")
        return problems
    lo = np.minimum(verts[:-1], verts[1:])[keep]
    ids = ((lo[:, 0] * dims[1] + lo[:, 1]) * dims[2] + lo[:, 2]) * 3 + np.abs(d).argmax(axis=1)
    if len(paths) != L * L // 2 or np.unique(ids).size != ids.size:
        problems.append("edge conflict")
    axis = np.abs(d).argmax(axis=1)
    direction = 2 * axis + (d.sum(axis=1) > 0)
    step_start = starts - np.arange(len(paths))
    first = np.zeros(len(d), dtype=bool)
    first[step_start] = True
    new_run = first | np.concatenate([[True], direction[1:] != direction[:-1]])
    run_axis = axis[new_run]
    run_path = np.repeat(np.arange(len(paths)), lens - 1)[new_run]
    count = np.bincount(run_path, minlength=len(paths))
    ordinal = np.arange(len(run_axis)) - np.concatenate([[0], np.cumsum(count)[:-1]])[run_path]
    last = ordinal == count[run_path] - 1
    same_axis = (run_axis[1:] == run_axis[:-1]) & (run_path[1:] == run_path[:-1])
    if (lens - 1 > 10 * L).any():
        problems.append("too long")
    if (count > 4).any():
        problems.append("more than four segments")
    if ((run_axis == 2) & (ordinal != 0) & ~last).any():
        problems.append("vertical segment in the middle")
    if same_axis.any():
        problems.append("adjacent segments share an axis")
    return problems


def test_criterion_03_3d_routing(capsys, instances):
    bad = []
    for L, pairings in instances.items():
        for pairs in pairings:
            problems = check_3d_instance([p.vertices for p in route_3d(L, pairs)], pairs, L)
            bad += [(L, problem) for problem in problems]
    report(capsys, 3, not bad, f"3D routing, 3200 full pairings, problems={bad[:3]}")


# --------------------------------------------------------------------------
# 4-6 ideal localization


def bell_reference(k):
    return prepare_state(2 * k, [g for i in range(k) for g in (("H", (2 * i,)), ("CNOT", (2 * i, 2 * i + 1)))])


def random_site_pairs(n, k, rng):
    idx = rng.permutation(n)
    return [(int(idx[2 * r]), int(idx[2 * r + 1])) for r in range(k)]


def criterion_04_run(seed):
    rng = np.random.default_rng(seed)
    digest = hashlib.sha256()
    failures = []
    # on the 4 x 4 x 1 grid the four diagonal sites admit at most two pairs
    for n, mode, kmax in ((4, "2d", 2), (16, "3d", 4)):
        layout = QubitLayout.for_mode(n, mode)
        for _ in range(100):
            k = int(rng.integers(1, kmax + 1))
            pairs = random_site_pairs(n, k, rng)
            tab, rec = run(q_entangle(layout, pairs), rng=rng)
            digest.update(repr(sorted(rec.bits().items())).encode())
            ok = all(check_bell(tab, layout.p(i), layout.p(j)) for i, j in pairs)
            qmap = {q: layout.p(s) for r, (i, j) in enumerate(pairs) for q, s in ((2 * r, i), (2 * r + 1, j))}
            ok = ok and tableau_equivalent_under_relabeling(bell_reference(k), tab, qmap)
            if not ok:
                failures.append((mode, pairs))
    return failures, digest.hexdigest()


def test_criterion_04_entangle(capsys):
    failures, _ = criterion_04_run(SEED + 4)
    report(capsys, 4, not failures, f"q_entangle on (4,4,1) and (4,4,16), 200 sampled runs, failures={failures[:2]}")


def random_stabilizer_gates(n, rng, depth=25):
    gates = []
    for _ in range(depth):
        if rng.random() < 0.4:
            a, b = (int(x) for x in rng.choice(n, 2, replace=False))
            gates.append(("CNOT", (a, b)))
        else:
            gates.append((str(rng.choice(["H", "S", "X", "Z"])), (int(rng.integers(n)),)))
    return gates


def criterion_05_run(seed):
    rng = np.random.default_rng(seed)
    digest = hashlib.sha256()
    failures = []
    for trial in range(50):
        mode = "2d" if trial % 2 == 0 else "3d"
        layout = QubitLayout.for_mode(4, mode)
        gates = random_stabilizer_gates(4, rng)
        source = prepare_state(4, gates)
        initial = prepare_state(layout.n_tot, [(g, tuple(layout.q(q) for q in t)) for g, t in gates])
        pairs = random_site_pairs(4, 2, rng)
        fwd = q_pair(layout, pairs)
        tab, rec = run(fwd, rng=rng, initial=initial)
        digest.update(repr(sorted(rec.bits().items())).encode())
        moved = {}
        for i, j in pairs:
            moved[i], moved[j] = layout.q(i), layout.p(i)
        ok_fwd = tableau_equivalent_under_relabeling(source, tab, moved)
        tab2, rec2 = run(q_pair_inverse(layout, pairs), rng=rng, initial=tab)
        digest.update(repr(sorted(rec2.bits().items())).encode())
        ok_back = tableau_equivalent_under_relabeling(source, tab2, {q: layout.q(q) for q in range(4)})
        if not (ok_fwd and ok_back):
            failures.append((trial, ok_fwd, ok_back))
    return failures, digest.hexdigest()


def test_criterion_05_pair(capsys):
    failures, _ = criterion_05_run(SEED + 5)
    report(capsys, 5, not failures, f"q_pair and its inverse on 50 random 4-qubit stabilizer inputs, failures={failures[:3]}")


def test_criterion_06_exact_localization(capsys):
    rng = np.random.default_rng(SEED + 6)
    worst = 0
    count = 0
    for c in range(20):
        T = int(rng.integers(1, 4))
        src = structured_circuit(4, T, rng) if c % 2 else random_clifford_circuit(4, T, rng)
        ids = src.outcome_ids()
        expected = exact_distribution(src, ids)
        for mode in ("2d", "3d"):
            lc = localize_ideal(src, mode)
            worst = max(worst, expected.total_variation(exact_distribution(lc.circuit, ids)))
            count += 1
    report(capsys, 6, worst == 0, f"{count} localized circuits, exact max TVD = {worst}")


# --------------------------------------------------------------------------
# 7 qubit counts


def test_criterion_07_qubit_counts(capsys):
    rng = np.random.default_rng(SEED + 7)
    bad = []
    for n in (2, 4, 8, 16):
        k = n // 2
        src = random_clifford_circuit(n, 1, rng)
        s = math.isqrt(n - 1) + 1
        e2, e3 = 2 * n * n - 2 * n, 12 * s**3 - 9 * s**2
        for mode, edges in (("2d", e2), ("3d", e3)):
            lc = localize_ideal(src, mode)
            if lc.layout.n_edges != edges or lc.n_tot != n + 2 * k + 2 * edges:
                bad.append(("ideal", mode, n, lc.n_tot))
        for mode in ("quasi2d", "3d"):
            loc = ft_localize(src, mode)
            L, m = loc.L, loc.m
            expected = 2 * n + (2 * L**2 * m**3 if mode == "quasi2d" else 12 * (L * m) ** 3)
            if m != scale_factor(L) or loc.n_tot != expected or loc.layers[0].qubit_total != expected:
                bad.append(("ft", mode, n, loc.n_tot))
    report(capsys, 7, not bad, f"qubit totals for n in 2, 4, 8, 16, mismatches={bad}")


# --------------------------------------------------------------------------
# 8 error commutation exactness


def pauli_gates(E, qubits):
    """Explicit single-qubit gates realizing the Pauli ``E`` (phase dropped) on ``qubits``."""
    return [gate(E.letter(i), q) for i, q in enumerate(qubits) if E.letter(i) != "I"]


def error_before_after_pair(model, n_total, prep_layers, refs, E):
    """Circuits with ``E`` before the protocol and with the derived error after it."""
    readouts = []
    for basis in ("Z", "X"):
        before, after = AdaptiveCircuit(n_total), AdaptiveCircuit(n_total)
        for layer in prep_layers:
            before.append(layer)
            after.append(layer)
        system = list(range(model.n))
        if E.weight:
            before.append(pauli_gates(E, system))
        before.extend(protocol_circuit(model, n_total))
        after.extend(protocol_circuit(model, n_total))
        F = model.effective(E)
        if F.weight:
            after.append(pauli_gates(F, model.ctrl.outputs))
        ids = []
        for c in (before, after):
            wires = [q for pair in zip(model.ctrl.outputs, refs) for q in pair]
            if basis == "X":
                c.append([gate("H", q) for q in wires])
            c.append([measure(q, f"out{q}") for q in wires])
            ids = [f"out{q}" for q in wires]
        readouts.append((before, after, ids))
    return readouts


def bell_prep(pairs):
    return [[gate("H", a) for a, _ in pairs], [gate("CNOT", a, b) for a, b in pairs]]


def test_criterion_08_commutation_exact(capsys):
    cases = []
    # teleportation: block (Q, R, R') = (0, 1, 2); qubit 3 holds a reference entangled with Q
    tele = teleport_model(1)
    cases.append((tele, 4, bell_prep([(3, 0), (1, 2)]), [3]))
    # a two-output, two-outcome control with mixed X and Z feed-forward
    ctrl = LinearControl(A=[[1, 0], [1, 1]], B=[[0, 1], [1, 0]])
    generic = ProtocolModel(4, [], ctrl, "generic")
    cases.append((generic, 8, bell_prep([(4, 0), (5, 1), (6, 2), (7, 3)]), [4, 5]))
    checked, bad = 0, []
    for model, n_total, prep_layers, refs in cases:
        measured_ids = [f"m{q}" for q in model.ctrl.measured]
        for x, z in itertools.product(range(2**model.n), repeat=2):
            E = PauliOp(model.n, x, z)
            for before, after, ids in error_before_after_pair(model, n_total, prep_layers, refs, E):
                same_out = exact_distribution(before, ids) == exact_distribution(after, ids)
                same_rec = exact_distribution(before, measured_ids) == exact_distribution(after, measured_ids)
                checked += 1
                if not (same_out and same_rec):
                    bad.append((model.name, str(E)))
    report(capsys, 8, not bad, f"{checked} exhaustive error/readout cases, mismatches={bad[:3]}")


# --------------------------------------------------------------------------
# 9 and 10 statistical bounds


def random_clifford_layer(n, rng):
    order = rng.permutation(n)
    gates = [("CNOT", (int(order[i]), int(order[i + 1]))) for i in range(0, n - 1, 2)]
    gates += [(str(rng.choice(["H", "S"])), (int(q),)) for q in order]
    # the single-qubit gates follow the two-qubit ones, so every qubit sees one depth-2 Clifford
    return gates


def criterion_09_runs(seed, samples=100_000):
    """CSV reports of every statistical check, keyed by (family, p)."""
    rngs = iter(spawn_generators(seed, 64))
    out = {}
    for p in (1e-3, 1e-2):
        # product of dependent errors: F equals E on a shifted register
        x, z = sample_iid_batch(12, p, samples, next(rngs))
        px, pz = x ^ np.roll(x, 1, axis=1), z ^ np.roll(z, 1, axis=1)
        out[("product dependent", p)] = ((px, pz), strength_product_dependent(p, p))
        # a Clifford layer
        x, z = sample_iid_batch(12, p, samples, next(rngs))
        conjugate_bits(x, z, random_clifford_layer(12, next(rngs)))
        out[("clifford", p)] = ((x, z), strength_clifford(p))
        # errors on complementary registers
        a = sample_iid_batch(6, p, samples, next(rngs))
        b = sample_iid_batch(6, p, samples, next(rngs))
        out[("product disjoint", p)] = ((np.hstack([a[0], b[0]]), np.hstack([a[1], b[1]])),
                                    strength_product_disjoint(p, p))
        # parity correction of row weight 2 on 4 outputs from 8 measured qubits
        w = 2
        A = np.kron(np.eye(4, dtype=np.uint8), np.ones((1, w), dtype=np.uint8))
        ctrl = LinearControl(A, np.roll(A, w, axis=1))
        ctrl.assert_weight_hypothesis(w)
        x, z = sample_iid_batch(ctrl.n, p, samples, next(rngs))
        out[("adaptive", p)] = (commute_through_adaptive_batch(x, z, ctrl), strength_adaptive(p, w))
        # three parallel swap chains of k = 3 Bell pairs
        model = swap_chain_model(3, 3)
        out[("swap chain", p)] = (model.effective_batch(*sample_iid_batch(model.n, p, samples, next(rngs))),
                                strength_entanglement_swap(p, 3))
        # four parallel teleportations
        model = teleport_model(4)
        out[("teleport", p)] = (model.effective_batch(*sample_iid_batch(model.n, p, samples, next(rngs))),
                                    strength_teleport(p))
    reports = {}
    for key, (batch, bound) in out.items():
        reports[key] = estimate_ls_bound(batch, key[1], 3, 200, next(rngs), sigma=3.0, bound=lambda s, b=bound: b**s)
    return reports


def test_criterion_09_propagation_bounds(capsys):
    reports = criterion_09_runs(SEED + 9)
    failed = [f"{name} at p={p}" for (name, p), r in reports.items() if not r.passed]
    report(capsys, 9, not failed, f"{len(reports)} sampled families, 1e5 samples, |F| <= 3, failures={failed}")


def criterion_10_run(seed, trials=100_000):
    prof = RobustnessProfile(1 / 5004, Monomial(5004.0, 1.0), r=2, r_tilde=1)
    gens = spawn_generators(seed, 2)
    p = 1e-5
    batch = surrogate_profile_batch([prof] * 50, p, trials, gens[0])
    return estimate_ls_bound(batch, p, 3, 200, gens[1], sigma=3.0, bound=lambda s: (5004 * p) ** s)


def test_criterion_10_parallel_repetition(capsys):
    rep = criterion_10_run(SEED + 10)
    worst = max(c.empirical - c.bound for c in rep.checks)
    report(capsys, 10, rep.passed, f"k=50 surrogate profiles at p=1e-5, max(empirical - bound) = {worst:.2e}")


# --------------------------------------------------------------------------
# 11 bus arithmetic


def bus_table(rng):
    """50 (delta, R) pairs straddling the boundary, with the high-precision verdict."""
    mpmath.mp.dps = 80
    table = []
    Rs = [3, 4, 8, 16, 256, 1024] + [int(r) for r in rng.integers(3, 10**7, size=19)]
    for R in Rs:
        v = 8 * mpmath.log(R, 2)
        near = int(mpmath.nint(v))
        need = near if abs(v - near) < mpmath.mpf(10) ** -60 else int(mpmath.ceil(v))
        for delta in (need - 1, need):
            table.append((delta, R, delta >= need))
    return table


def test_criterion_11_bus_arithmetic(capsys):
    table = bus_table(np.random.default_rng(SEED + 11))
    assert len(table) == 50
    bad = []
    for delta, R, accept in table:
        try:
            bus_profile(delta, R)
            got = True
        except BusParameterError:
            got = False
        if got != accept:
            bad.append((delta, R))
    rng = np.random.default_rng(SEED + 12)
    for L in (2, 4, 8):
        plan = plan_ft_entangle_3d(L, random_bottom_pairing(L, rng))
        cond = plan.checks["m_condition"]
        m = scale_factor(L)
        nat = 8 * mpmath.log(10 * m * L)
        two = 8 * mpmath.log(10 * m * L, 2)
        if not (cond["passed"] and m >= nat and abs(cond["rhs_natural"] - float(nat)) < 1e-9
                and abs(cond["rhs_base2"] - float(two)) < 1e-9):
            bad.append(("m", L))
    report(capsys, 11, not bad, f"50 bus pairs and m checks for L in 2, 4, 8, mismatches={bad}")


# --------------------------------------------------------------------------
# 12 determinism


def csv_digest(reports):
    return hashlib.sha256("".join(r.to_csv() for r in reports).encode()).hexdigest()


def test_criterion_12_determinism(capsys):
    pairs = [
        ("criterion 4", lambda: criterion_04_run(SEED + 4)[1]),
        ("criterion 5", lambda: criterion_05_run(SEED + 5)[1]),
        ("criterion 9", lambda: csv_digest(criterion_09_runs(SEED + 9, samples=20_000).values())),
        ("criterion 10", lambda: csv_digest([criterion_10_run(SEED + 10, trials=20_000)])),
    ]
    differing = [name for name, fn in pairs if fn() != fn()]
    report(capsys, 12, not differing, f"repeated stochastic runs are byte-identical, differing={differing}")
