"""Pauli algebra against dense matrices, plus representation invariants."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covqe.pauli import PauliString, PauliSum, pauli_mul, commutes

import oracles as oc

LETTERS = "IXYZ"


def _from_letters(letters: str) -> PauliString:
    ops = {q: c for q, c in enumerate(letters) if c != "I"}
    return PauliString.from_ops(len(letters), ops)


def test_single_qubit_products_exhaustive():
    # all 16 letter pairs, checked against the 2x2 matrices
    for a in LETTERS:
        for b in LETTERS:
            pa, pb = _from_letters(a), _from_letters(b)
            prod = pauli_mul(pa, pb)
            ref = oc.dense_pauli(pa) @ oc.dense_pauli(pb)
            assert np.allclose(oc.dense_pauli(prod), ref), (a, b)


def test_two_qubit_products_exhaustive():
    pairs = [x + y for x in LETTERS for y in LETTERS]
    for a in pairs:
        for b in pairs:
            pa, pb = _from_letters(a), _from_letters(b)
            ref = oc.dense_pauli(pa) @ oc.dense_pauli(pb)
            assert np.allclose(oc.dense_pauli(pa * pb), ref), (a, b)


def test_commutes_matches_dense():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        a, b = oc.random_pauli(rng, n), oc.random_pauli(rng, n)
        ma, mb = oc.dense_pauli(a), oc.dense_pauli(b)
        dense_comm = np.allclose(ma @ mb, mb @ ma)
        assert commutes(a, b) == dense_comm, (a, b)


def test_phase_cycle_and_negate():
    p = PauliString.from_ops(2, {0: "X", 1: "Z"})
    assert p.phase == 1
    assert p.with_phase_pow(1).phase == 1j
    assert p.negate().phase == -1
    assert np.allclose(oc.dense_pauli(p.negate()), -oc.dense_pauli(p))


def test_letter_and_support():
    p = PauliString.from_ops(5, {0: "X", 2: "Y", 4: "Z"})
    assert [p.letter(q) for q in range(5)] == ["X", "I", "Y", "I", "Z"]
    assert p.support() == (0, 2, 4)
    assert p.weight == 3
    assert p.support_mask() == 0b10101


def test_from_label_roundtrip():
    p = PauliString.from_label(6, "X0 Y2 Z5")
    assert p == PauliString.from_ops(6, {0: "X", 2: "Y", 5: "Z"})
    assert PauliString.from_label(6, p.label()) == p


def test_from_label_rejects_garbage():
    with pytest.raises(ValueError):
        PauliString.from_label(3, "Q1")
    with pytest.raises(ValueError):
        PauliString.from_label(3, "X0 Y0")
    with pytest.raises(ValueError):
        PauliString.from_ops(3, {7: "X"})


def test_restrict_keeps_letters():
    p = PauliString.from_ops(6, {1: "X", 4: "Z"})
    r = p.restrict([1, 3, 4])
    assert r.n_qubits == 3
    assert [r.letter(q) for q in range(3)] == ["X", "I", "Z"]
    with pytest.raises(ValueError):
        p.restrict([0, 2])  # drops a support qubit


def test_hermiticity_flag():
    p = PauliString.from_ops(2, {0: "X"})
    assert p.is_hermitian()
    assert not p.with_phase_pow(1).is_hermitian()
    assert p.with_phase_pow(2).is_hermitian()


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_mul_associative(data):
    n = data.draw(st.integers(1, 4))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    a, b, c = (oc.random_pauli(rng, n) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_mul_self_inverse_up_to_phase(data):
    n = data.draw(st.integers(1, 5))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    p = oc.random_pauli(rng, n)
    sq = p * p
    assert sq.is_identity()
    assert sq.phase == 1  # Hermitian strings square to +1


def test_sum_folds_duplicates():
    p = PauliString.from_ops(2, {0: "Z"})
    h = PauliSum(2, [(1.0, p), (0.5, p)])
    assert len(h) == 1
    ((coeff, term),) = tuple(h)
    assert coeff == 1.5 and term == p


def test_sum_folds_phase_into_coefficient():
    p = PauliString.from_ops(1, {0: "Y"})
    h = PauliSum(1, [(2.0, p.with_phase_pow(2))])  # -Y with coeff 2 is Y with -2
    assert np.allclose(oc.dense_sum(h), -2.0 * oc.dense_pauli(p))


def test_sum_rejects_imaginary_weight():
    p = PauliString.from_ops(1, {0: "X"})
    with pytest.raises(ValueError):
        PauliSum(1, [(1.0, p.with_phase_pow(1))])  # i*X is not Hermitian


def test_sum_add_and_scale():
    rng = np.random.default_rng(9)
    a, b = oc.random_sum(rng, 3, 4), oc.random_sum(rng, 3, 4)
    assert np.allclose(oc.dense_sum(a + b), oc.dense_sum(a) + oc.dense_sum(b))
    assert np.allclose(oc.dense_sum(a.scale(-2.5)), -2.5 * oc.dense_sum(a))


def test_sum_dump_load_roundtrip():
    rng = np.random.default_rng(17)
    h = oc.random_sum(rng, 4, 6)
    assert PauliSum.load(h.dump()) == h


def test_sum_max_weight_and_support():
    h = PauliSum(
        5,
        [
            (1.0, PauliString.from_ops(5, {0: "Z", 1: "X", 2: "Z"})),
            (0.3, PauliString.from_ops(5, {3: "X"})),
        ],
    )
    assert h.max_weight() == 3
    assert h.support() == (0, 1, 2, 3)
