import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridlocal.pauli import (
    CLIFFORD_GATES,
    PauliOp,
    check_disjoint,
    conjugate_bits,
    conjugate_by_gates,
    multiply,
    permute,
)

from conftest import ONE, TWO

N = 3


def paulis(n=N):
    return st.builds(lambda x, z, ph: PauliOp(n, x, z, ph),
                     st.integers(0, 2**n - 1), st.integers(0, 2**n - 1), st.integers(0, 3))


def dense(p: PauliOp) -> np.ndarray:
    """Independent construction: ``i**phase`` times a Kronecker product of Hermitian letters.

    ``x=z=1`` is ``Y = i X Z``; qubit 0 is the most significant factor.
    """
    out = np.eye(1)
    for q in range(p.n):
        xb, zb = (p.x >> q) & 1, (p.z >> q) & 1
        f = np.linalg.matrix_power(ONE["X"], xb) @ np.linalg.matrix_power(ONE["Z"], zb)
        if xb and zb:
            f = 1j * f
        out = np.kron(out, f)
    return (1j**p.phase) * out


@settings(max_examples=100)
@given(paulis(), paulis())
def test_product_matches_matrices(p, q):
    assert np.allclose(dense(p * q), dense(p) @ dense(q))
    assert np.allclose(dense(multiply(p, q)), dense(p) @ dense(q))


def test_to_matrix_matches_oracle():
    for x in range(4):
        for z in range(4):
            p = PauliOp(2, x, z, 1)
            assert np.allclose(p.to_matrix(), dense(p))


@settings(max_examples=100)
@given(paulis(), paulis())
def test_commutation_matches_matrices(p, q):
    A, B = dense(p), dense(q)
    assert p.commutes(q) == np.allclose(A @ B, B @ A)


@pytest.mark.parametrize("name", CLIFFORD_GATES)
def test_conjugation_matches_matrices(name):
    if name in TWO:
        U, targets = np.asarray(TWO[name], dtype=complex), (0, 1)
    else:
        U, targets = np.asarray(ONE[name], dtype=complex), (0,)
    n = len(targets)
    for x in range(2**n):
        for z in range(2**n):
            p = PauliOp(n, x, z)
            out = conjugate_by_gates(p, [(name, targets)])
            assert np.allclose(dense(out), U @ dense(p) @ U.conj().T), (name, x, z)


def test_conjugate_bits_batch_agrees_with_single():
    rng = np.random.default_rng(5)
    gates = [("H", (0,)), ("CNOT", (1, 2)), ("S", (3,))]
    x = rng.integers(0, 2, size=(50, 4)).astype(np.uint8)
    z = rng.integers(0, 2, size=(50, 4)).astype(np.uint8)
    bx, bz = x.copy(), z.copy()
    conjugate_bits(bx, bz, gates)
    for i in range(50):
        out = conjugate_by_gates(PauliOp.from_bits(x[i], z[i]), gates)
        assert list(out.x_bits) == list(bx[i]) and list(out.z_bits) == list(bz[i])


def test_text_and_hex_roundtrip():
    p = PauliOp.from_string("-iXYZI")
    assert p.to_text() == "X0 Y1 Z2"
    assert str(p) == "-iXYZI"
    assert PauliOp.from_text(4, p.to_text()) == p.unsigned()
    assert PauliOp.from_hex(p.n, p.to_hex()).unsigned() == p.unsigned()
    assert p.support() == [0, 1, 2]
    assert p.weight == 3


def test_permute_moves_letters():
    p = PauliOp.from_letters(3, {0: "X", 2: "Z"})
    q = permute(p, [2, 1, 0])
    assert q.letter(2) == "X" and q.letter(0) == "Z"


def test_overlapping_layer_rejected():
    with pytest.raises(ValueError):
        check_disjoint([("H", (0,)), ("CNOT", (0, 1))])
