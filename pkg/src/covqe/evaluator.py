"""Expectation-value backends for bound circuits.

Four routes, one contract:

* ``expval_full``      dense statevector, any prep, n <= 25;
* ``expval_cone``      per-term causal-cone simulation (Clifford-prefix prep
                       only); equals the full value exactly, cost set by the
                       largest cone, not by n;
* ``expval_heisenberg`` backward conjugation of each term through the gates,
                       evaluated against the prep tableau; exact, cost set by
                       the branch count (capped), not by n;
* ``measure_pauli_sampled`` the emulated device: eigenbasis rotation plus
                       bitstring sampling with a seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PauliString, PauliSum
from .circuit import (
    BoundCircuit,
    Circuit,
    Gate,
    PrepCircuit,
    PrepTableau,
    conjugate_masks,
    prep_tableau,
)
from .lightcone import causal_cone, slice_circuit
from . import statevector as sv

HEISENBERG_TERM_CAP = 1 << 22


@dataclass(frozen=True)
class ShotEstimate:
    mean: float
    std_error: float
    shots: int
    seed: int


def _apply_gate(v: np.ndarray, n: int, gate: Gate, angle: float | None) -> np.ndarray:
    kind = gate.kind
    if kind == "rot":
        return sv.apply_rotation(v, n, gate.axis, angle)
    if kind == "h":
        return sv.apply_h(v, n, gate.qubits[0])
    if kind == "s":
        return sv.apply_s(v, n, gate.qubits[0])
    if kind == "sdg":
        return sv.apply_s(v, n, gate.qubits[0], dagger=True)
    if kind == "cz":
        return sv.apply_cz(v, n, *gate.qubits)
    return sv.apply_cnot(v, n, *gate.qubits)


def _undo_gate(v: np.ndarray, n: int, gate: Gate, angle: float | None) -> np.ndarray:
    if gate.kind == "rot":
        return sv.apply_rotation(v, n, gate.axis, -angle)
    if gate.kind == "s":
        return sv.apply_s(v, n, gate.qubits[0], dagger=True)
    if gate.kind == "sdg":
        return sv.apply_s(v, n, gate.qubits[0])
    return _apply_gate(v, n, gate, angle)  # h, cz, cnot self-inverse


def _prep_state_fresh(circuit: Circuit) -> np.ndarray:
    n = circuit.n_qubits
    if isinstance(circuit.prep, PrepTableau):
        return circuit.prep.tableau.to_statevector()
    v = sv.zero_state(n)
    for g in circuit.prep.gates:
        v = _apply_gate(v, n, g, None)
    return v


@lru_cache(maxsize=16)
def _prep_state_cached(circuit: Circuit) -> np.ndarray:
    v = _prep_state_fresh(circuit)
    v.setflags(write=False)
    return v


def prep_state(circuit: Circuit) -> np.ndarray:
    """Fresh statevector of the prep alone.  Optimizer loops rebuild the same
    prep thousands of times, so small preps come from a cache (18 qubits is
    4 MB; past that the memory trade stops being free)."""
    if circuit.n_qubits <= 18:
        return _prep_state_cached(circuit).copy()
    return _prep_state_fresh(circuit)


def build_state(bound: BoundCircuit) -> np.ndarray:
    """Prep plus bound ansatz, as a dense statevector (n <= 25)."""
    c = bound.circuit
    v = prep_state(c)
    for g, angle in zip(c.gates, bound.angles):
        v = _apply_gate(v, c.n_qubits, g, angle)
    return v


def expval_full(bound: BoundCircuit, obs: PauliSum | PauliString) -> float:
    v = build_state(bound)
    if isinstance(obs, PauliString):
        return sv.pauli_expectation(v, obs)
    return sv.sum_expectation(v, obs)


# -- causal-cone backend ------------------------------------------------------


@lru_cache(maxsize=4096)
def _cone_parts(circuit: Circuit, support_mask: int):
    """(cone, local circuit, read-only local prep state) for one term support."""
    cone = causal_cone(circuit, support_mask)
    local = slice_circuit(circuit, cone)
    state = prep_state(local)
    state.setflags(write=False)
    return cone, local, state


def _cone_state(circuit: Circuit, angles, support_mask: int):
    cone, local, frozen = _cone_parts(circuit, support_mask)
    v = frozen.copy()
    n_loc = local.n_qubits
    for idx, g in zip(cone.retained_gates, local.gates):
        v = _apply_gate(v, n_loc, g, angles[idx])
    return cone, local, v

def expval_cone(bound: BoundCircuit, obs: PauliSum | PauliString) -> float:
    """Sum of per-term cone-simulated expectations; equals expval_full exactly."""
    c = bound.circuit
    if not isinstance(c.prep, PrepCircuit):
        raise ValueError("cone evaluation needs a Clifford-prefix prep; "
                         "use the Heisenberg backend for tableau preps")
    terms = [(1.0, obs)] if isinstance(obs, PauliString) else list(obs)
    total = 0.0
    for coeff, p in terms:
        cone, _, v = _cone_state(c, bound.angles, p.support_mask())
        local_p = p.restrict(cone.cone_qubits)
        total += coeff * sv.pauli_expectation(v, local_p) * 1.0
    return total


# -- Heisenberg backend -------------------------------------------------------


def _rotate_terms(terms: dict, axis: PauliString, angle: float) -> dict:
    """Conjugate {(x, z): coeff} by exp(+i*angle/2*G) ... exp(-i*angle/2*G)."""
    gx, gz = axis.x_mask, axis.z_mask
    gy = (gx & gz).bit_count()
    cos_a = np.cos(angle)
    sin_a = np.sin(angle)
    out: dict[tuple[int, int], float] = {}
    for (x, z), c in terms.items():
        if ((x & gz).bit_count() ^ (z & gx).bit_count()) & 1 == 0:
            out[(x, z)] = out.get((x, z), 0.0) + c
            continue
        # branch: P -> cos(a) P + sin(a) * (i G P), with i G P Hermitian
        key = (x, z)
        out[key] = out.get(key, 0.0) + c * cos_a
        x3, z3 = x ^ gx, z ^ gz
        k = (1 + gy + (x & z).bit_count() - (x3 & z3).bit_count()
             + 2 * (gz & x).bit_count()) % 4
        sign = 1.0 if k == 0 else -1.0
        key3 = (x3, z3)
        val = out.get(key3, 0.0) + c * sin_a * sign
        if val == 0.0:
            out.pop(key3, None)
        else:
            out[key3] = val
    return out


def expval_heisenberg(
    bound: BoundCircuit,
    obs: PauliSum | PauliString,
    max_terms: int = HEISENBERG_TERM_CAP,
) -> float:
    """Backward-propagate each term through the gates, then read it off the
    prep tableau.  Exact for any prep; cost grows with the branch count."""
    c = bound.circuit
    tab = _prep_tableau_cached(c)
    n = c.n_qubits
    in_terms = [(1.0, obs)] if isinstance(obs, PauliString) else list(obs)
    total = 0.0
    for coeff, p in in_terms:
        sign = p.phase.real  # Hermitian input strings only
        terms: dict[tuple[int, int], float] = {(p.x_mask, p.z_mask): 1.0}
        for g, angle in zip(reversed(c.gates), reversed(bound.angles)):
            if g.kind == "rot":
                terms = _rotate_terms(terms, g.axis, angle)
            else:
                new: dict[tuple[int, int], float] = {}
                for (x, z), cval in terms.items():
                    x2, z2, extra = conjugate_masks(g, x, z, forward=False)
                    new[(x2, z2)] = new.get((x2, z2), 0.0) + (cval if extra == 0 else -cval)
                terms = new
            if len(terms) > max_terms:
                raise sv.ResourceCapError(
                    f"Heisenberg propagation exceeded {max_terms} terms"
                )
        val = 0.0
        for (x, z), cval in terms.items():
            if cval != 0.0:
                val += cval * tab.expectation(PauliString(n, x, z))
        total += coeff * sign * val
    return total


@lru_cache(maxsize=512)
def _prep_tableau_cached(circuit: Circuit):
    return prep_tableau(circuit)


# -- sampled measurement (the emulated device) --------------------------------


def measure_pauli_on_state(
    v: np.ndarray, p: PauliString, shots: int, seed: int
) -> ShotEstimate:
    if not p.is_hermitian():
        raise ValueError(f"cannot measure non-Hermitian string {p}")
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    n = p.n_qubits
    w = v.copy()
    for q in p.support():
        letter = p.letter(q)
        if letter == "X":
            w = sv.apply_h(w, n, q)
        elif letter == "Y":
            w = sv.apply_s(w, n, q, dagger=True)
            w = sv.apply_h(w, n, q)
    rng = np.random.default_rng(seed)
    idx = sv.sample_bitstrings(w, shots, rng)
    par = idx.astype(np.uint32) & np.uint32(p.support_mask())
    par ^= par >> np.uint32(16)
    par ^= par >> np.uint32(8)
    par ^= par >> np.uint32(4)
    par ^= par >> np.uint32(2)
    par ^= par >> np.uint32(1)
    outcomes = (1.0 - 2.0 * (par & np.uint32(1))) * p.phase.real
    mean = float(np.mean(outcomes))
    std = float(np.std(outcomes, ddof=1)) if shots > 1 else 0.0
    return ShotEstimate(mean, std / np.sqrt(shots), shots, seed)


def measure_pauli_sampled(
    bound: BoundCircuit, p: PauliString, shots: int, seed: int
) -> ShotEstimate:
    return measure_pauli_on_state(build_state(bound), p, shots, seed)


# -- dispatch -----------------------------------------------------------------

BACKENDS = ("full", "cone", "heisenberg", "auto")


def pick_backend(circuit: Circuit, backend: str = "auto") -> str:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    if backend != "auto":
        return backend
    # desk scale: dense is exact and fastest; beyond it, locality must pay
    if circuit.n_qubits <= 18:
        return "full"
    if isinstance(circuit.prep, PrepCircuit):
        return "cone"
    return "heisenberg"


def expval(bound: BoundCircuit, obs: PauliSum | PauliString, backend: str = "auto") -> float:
    chosen = pick_backend(bound.circuit, backend)
    if chosen == "full":
        return expval_full(bound, obs)
    if chosen == "cone":
        return expval_cone(bound, obs)
    return expval_heisenberg(bound, obs)
