"""Circuit IR: gate validation, Clifford conjugation, inverses, serialization."""

import numpy as np
import pytest

from covqe.pauli import PauliString
from covqe.circuit import (
    BoundCircuit,
    Circuit,
    Gate,
    PrepCircuit,
    PrepTableau,
    bind,
    clifford_prep_tableau,
    conjugate_pauli,
    dump_circuit,
    inverse,
    load_circuit,
    prep_tableau,
)
from covqe.evaluator import build_state

import oracles as oc

LETTERS = "IXYZ"


def _pair_strings(n):
    if n == 1:
        return [a for a in LETTERS if a != "I"]
    return [a + b for a in LETTERS for b in LETTERS if a + b != "II"]


def _from_letters(letters):
    return PauliString.from_ops(len(letters), {q: c for q, c in enumerate(letters) if c != "I"})


def _all_test_gates():
    yield 1, Gate.h(0)
    yield 1, Gate.s(0)
    yield 1, Gate.sdg(0)
    yield 2, Gate.h(1)
    yield 2, Gate.s(1)
    yield 2, Gate.sdg(1)
    yield 2, Gate.cz(0, 1)
    yield 2, Gate.cz(1, 0)
    yield 2, Gate.cnot(0, 1)
    yield 2, Gate.cnot(1, 0)


def test_conjugation_exhaustive_both_directions():
    # every Clifford kernel against U P U^dagger on dense matrices, for all
    # 1- and 2-qubit Pauli letters and all phase powers
    for n, gate in _all_test_gates():
        u = oc.dense_gate(gate, n, None)
        for letters in _pair_strings(n):
            for pow_ in range(4):
                p = _from_letters(letters).with_phase_pow(pow_)
                fwd = conjugate_pauli(gate, p, forward=True)
                ref_fwd = u @ oc.dense_pauli(p) @ u.conj().T
                assert np.allclose(oc.dense_pauli(fwd), ref_fwd), (gate, letters, pow_, "fwd")
                adj = conjugate_pauli(gate, p, forward=False)
                ref_adj = u.conj().T @ oc.dense_pauli(p) @ u
                assert np.allclose(oc.dense_pauli(adj), ref_adj), (gate, letters, pow_, "adj")


def test_conjugation_forward_adjoint_inverse():
    rng = np.random.default_rng(31)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        p = oc.random_pauli(rng, n)
        roll = rng.random()
        if roll < 0.2:
            g = Gate.h(int(rng.integers(n)))
        elif roll < 0.4:
            g = Gate.s(int(rng.integers(n)))
        elif roll < 0.6:
            g = Gate.sdg(int(rng.integers(n)))
        elif n >= 2:
            a, b = rng.choice(n, size=2, replace=False)
            g = Gate.cz(int(a), int(b)) if roll < 0.8 else Gate.cnot(int(a), int(b))
        else:
            g = Gate.h(0)
        assert conjugate_pauli(g, conjugate_pauli(g, p, True), False) == p


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("h", (0, 1))
    with pytest.raises(ValueError):
        Gate.cz(2, 2)
    with pytest.raises(ValueError):
        Gate("rot", (0,), None, 0)
    with pytest.raises(ValueError):
        Gate.rot(PauliString.from_ops(2, {0: "X"}).with_phase_pow(2), 0)
    with pytest.raises(ValueError):
        Gate.rot(PauliString.identity(2), 0)
    with pytest.raises(ValueError):
        Gate.rot(PauliString.from_ops(2, {0: "X"}), -1)
    with pytest.raises(ValueError):
        Gate("unitary", (0,))


def test_circuit_validation():
    x0 = PauliString.from_ops(2, {0: "X"})
    with pytest.raises(ValueError):
        Circuit(1, (Gate.cz(0, 1),), 0)  # gate outside register
    with pytest.raises(ValueError):
        Circuit(2, (Gate.rot(x0, 3),), 2)  # param_ref out of range
    with pytest.raises(ValueError):
        PrepCircuit((Gate.rot(x0, 0),))  # rotation in the Clifford prefix


def test_bind_resolves_scaled_angles():
    x0 = PauliString.from_ops(2, {0: "X"})
    z1 = PauliString.from_ops(2, {1: "Z"})
    c = Circuit(2, (Gate.rot(x0, 0, scale=-2.0), Gate.h(0), Gate.rot(z1, 0)), 1)
    b = bind(c, [0.3])
    assert b.angles == (-0.6, None, 0.3)
    with pytest.raises(ValueError):
        bind(c, [0.1, 0.2])


def test_bind_theta_read_only():
    x0 = PauliString.from_ops(1, {0: "X"})
    b = bind(Circuit(1, (Gate.rot(x0, 0),), 1), [0.5])
    with pytest.raises(ValueError):
        b.theta[0] = 1.0


def test_param_occurrences():
    x0 = PauliString.from_ops(2, {0: "X"})
    x1 = PauliString.from_ops(2, {1: "X"})
    c = Circuit(2, (Gate.rot(x0, 1), Gate.h(0), Gate.rot(x1, 0), Gate.rot(x0, 1)), 2)
    assert c.param_occurrences() == [[2], [0, 3]]


def test_inverse_undoes_circuit():
    rng = np.random.default_rng(33)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        c = oc.random_circuit(rng, n, depth=3)
        theta = rng.normal(size=c.n_params)
        state = oc.circuit_state(c, theta)
        inv = inverse(c)
        # applying the inverted gate list with the same theta must return to
        # the prep state
        for g in inv.gates:
            eff = g.scale * theta[g.param_ref] if g.kind == "rot" else None
            state = oc.dense_gate(g, n, eff) @ state
        ref = oc.circuit_state(Circuit(n, (), 0, c.prep), [])
        assert np.abs(state - ref).max() < 1e-10


def test_inverse_is_involution():
    rng = np.random.default_rng(34)
    c = oc.random_circuit(rng, 3, depth=2)
    assert inverse(inverse(c)) == c


def test_prep_tableau_matches_dense():
    rng = np.random.default_rng(35)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        c = oc.random_circuit(rng, n, depth=1)
        t = prep_tableau(c)
        ref = oc.circuit_state(Circuit(n, (), 0, c.prep), [])
        got = t.to_statevector()
        assert np.abs(oc.align_phase(got, ref) - got).max() < 1e-10


def test_prep_tableau_of_tableau_prep_is_identity():
    rng = np.random.default_rng(36)
    c = oc.random_circuit(rng, 3, depth=1, with_tableau_prep=True)
    assert prep_tableau(c) is c.prep.tableau


def test_clifford_prep_tableau_rejects_rotations():
    x0 = PauliString.from_ops(1, {0: "X"})
    with pytest.raises(ValueError):
        clifford_prep_tableau(1, [Gate.rot(x0, 0)])


def test_dump_load_roundtrip_both_preps():
    rng = np.random.default_rng(37)
    for tab in (False, True):
        c = oc.random_circuit(rng, 4, depth=2, with_tableau_prep=tab)
        c2 = load_circuit(dump_circuit(c))
        assert c2 == c
        theta = rng.normal(size=c.n_params)
        assert np.abs(
            build_state(bind(c, theta)) - build_state(bind(c2, theta))
        ).max() == 0.0


def test_gate_remap():
    axis = PauliString.from_ops(5, {1: "X", 3: "Z"})
    g = Gate.rot(axis, 2, scale=0.5)
    mapped = g.remap({1: 0, 3: 1}, 2)
    assert mapped.qubits == (0, 1)
    assert mapped.axis == PauliString.from_ops(2, {0: "X", 1: "Z"})
    assert mapped.param_ref == 2 and mapped.scale == 0.5


def test_gate_inverse_rules():
    assert Gate.s(0).inverse() == Gate.sdg(0)
    assert Gate.sdg(0).inverse() == Gate.s(0)
    assert Gate.h(0).inverse() == Gate.h(0)
    assert Gate.cz(0, 1).inverse() == Gate.cz(0, 1)
    g = Gate.rot(PauliString.from_ops(1, {0: "Y"}), 0, scale=2.0)
    assert g.inverse().scale == -2.0
