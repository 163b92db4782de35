"""Model builders: geometry, Hamiltonians, order parameters, ansatz wiring."""

import numpy as np
import pytest

from covqe.pauli import PauliString
from covqe.circuit import PrepTableau, bind
from covqe.evaluator import build_state, prep_state, expval
from covqe.models import (
    cluster_ansatz,
    cluster_hamiltonian,
    cluster_prep,
    cluster_tableau,
    logical_z,
    make_point,
    omega_string,
    toric_hamiltonian,
    toric_hva,
    toric_lattice,
    toric_tableau,
    wilson_loop,
)

import oracles as oc


def test_cluster_hamiltonian_terms():
    h = cluster_hamiltonian(6, 0.7)
    terms = {p: c for c, p in h}
    assert terms[PauliString.from_ops(6, {0: "Z", 1: "X", 2: "Z"})] == -1.0
    assert terms[PauliString.from_ops(6, {3: "Z", 4: "X", 5: "Z"})] == -1.0
    assert terms[PauliString.from_ops(6, {0: "X"})] == pytest.approx(-0.7)
    assert len(h) == (6 - 2) + 6
    with pytest.raises(ValueError):
        cluster_hamiltonian(2, 0.1)


def test_cluster_prep_is_stabilizer_ground_state():
    # the prep state must satisfy every generator of the tableau, and at
    # coupling 0 it is the exact ground state with E = -(N-2)
    n = 8
    state = prep_state(cluster_ansatz(n, 1))
    for g in cluster_tableau(n).generators:
        assert np.abs(oc.dense_pauli(g) @ state - state).max() < 1e-12, g
    h0 = cluster_hamiltonian(n, 0.0)
    assert abs(oc.dense_expectation(state, h0) - (-(n - 2))) < 1e-12


def test_cluster_ansatz_structure():
    c = cluster_ansatz(8, 3)
    # bricks: layer 1 and 3 have 4 each, layer 2 has 3; 5 params per brick
    assert c.n_params == 5 * (4 + 3 + 4)
    assert c.n_layers == 3
    assert all(g.kind == "rot" for g in c.gates)
    refs = sorted({g.param_ref for g in c.gates})
    assert refs == list(range(c.n_params))
    with pytest.raises(ValueError):
        cluster_ansatz(8, -1)


def test_omega_string_telescopes():
    om = omega_string(8)
    # product of ZXZ at centers 1, 3, 5 ends as Z0 X1 X3 X5 Z6
    assert om == PauliString.from_ops(8, {0: "Z", 1: "X", 3: "X", 5: "X", 6: "Z"})
    with pytest.raises(ValueError):
        omega_string(2)


def test_omega_is_one_on_prep():
    n = 10
    state = prep_state(cluster_ansatz(n, 1))
    assert abs(oc.dense_expectation(state, omega_string(n)) - 1.0) < 1e-12


def test_toric_lattice_counts():
    for L in (2, 3, 4):
        lat = toric_lattice(L)
        assert lat.n_qubits == L * L + (L - 1) * (L - 1)
        assert len(lat.stars) == L * (L - 1)
        assert len(lat.plaquettes) == L * (L - 1)
        # planar patch: one logical qubit
        assert lat.n_qubits - len(lat.stars) - len(lat.plaquettes) == 1
    with pytest.raises(ValueError):
        toric_lattice(1)


def test_toric_stars_and_plaquettes_commute():
    lat = toric_lattice(3)
    n = lat.n_qubits
    xs = [PauliString.from_ops(n, {q: "X" for q in s}) for s in lat.stars]
    zs = [PauliString.from_ops(n, {q: "Z" for q in p}) for p in lat.plaquettes]
    for a in xs:
        for b in zs:
            assert a.commutes(b)


def test_toric_tableau_is_ground_state():
    lat = toric_lattice(2)
    state = toric_tableau(lat).to_statevector()
    h0 = toric_hamiltonian(lat, 0.0)
    e = oc.dense_expectation(state, h0)
    assert abs(e - (-2 * lat.L * (lat.L - 1))) < 1e-12
    assert abs(oc.dense_expectation(state, logical_z(lat)) - 1.0) < 1e-12


def test_wilson_loop_is_boundary_loop():
    lat = toric_lattice(3)
    w = wilson_loop(lat)
    expected = set(lat.gamma2) | set(lat.gamma2_tilde)
    assert set(w.support()) == expected
    assert all(w.letter(q) == "X" for q in w.support())
    # it is a stabilizer of the code state
    assert abs(toric_tableau(lat).expectation(w) - 1.0) < 1e-12


def test_toric_hva_structure():
    lat = toric_lattice(3)
    c = toric_hva(lat, 4, 0.3)
    assert c.n_params == 8
    assert c.n_layers == 4
    assert isinstance(c.prep, PrepTableau)
    per_layer = lat.n_qubits + len(lat.stars) + len(lat.plaquettes)
    assert c.n_gates == 4 * per_layer


def test_toric_hva_zero_field_scaling():
    # with h_z = 0 the field rotations carry zero effective angle, so any
    # theta leaves the code-state energy terms intact up to the code rotations
    lat = toric_lattice(2)
    c = toric_hva(lat, 1, 0.0)
    h = toric_hamiltonian(lat, 0.0)
    rng = np.random.default_rng(3)
    theta = rng.normal(size=c.n_params)
    # code-part rotations commute with every star and plaquette, so E stays put
    e = expval(bind(c, theta), h, backend="full")
    assert abs(e - (-2 * lat.L * (lat.L - 1))) < 1e-10


def test_make_point_cluster_and_toric():
    pt = make_point("cluster", 10, 2, 0.4)
    assert pt.circuit.n_qubits == 10 and pt.order_parameter == omega_string(10)
    pt = make_point("toric", 2, 1, 0.2)
    assert pt.circuit.n_qubits == 5
    assert pt.order_parameter == wilson_loop(toric_lattice(2))
    with pytest.raises(ValueError):
        make_point("ising", 4, 1, 0.0)


def test_cluster_prep_parity_split_keeps_cones_local():
    # the CZ chain is emitted even pairs then odd pairs; a sequential chain
    # would drag the cone of a boundary term across the register
    prep = cluster_prep(10)
    czs = [g for g in prep.gates if g.kind == "cz"]
    evens = [g for g in czs if g.qubits[0] % 2 == 0]
    odds = [g for g in czs if g.qubits[0] % 2 == 1]
    assert czs[: len(evens)] == evens and czs[len(evens):] == odds
