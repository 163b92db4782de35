"""Causal-cone extraction: which gates and qubits can influence an observable.

The sweep walks the gate list backwards keeping an active qubit set, seeded
with the observable support.  Within a maximal run of consecutive pairwise
commuting gates the retention test uses the active set as of run entry: gates
in a commuting run can be reordered freely, so any gate not touching the
entry set can be commuted past the whole run toward the observable side and
cancels.  (For non-commuting neighbours the run breaks and the sweep is the
plain sequential rule.)  Without this, sequentially listed commuting layers,
e.g. the star/plaquette exponentials of a Hamiltonian-variational layer or a
nearest-neighbour CZ chain, cascade the active set across the whole register
and destroy the cone bound the construction is chosen to satisfy.

Commutation is decided conservatively: disjoint supports always commute, two
rotations commute iff their axes do, anything else is treated as
non-commuting.  A retained-set soundness oracle (cone expectation == full
expectation) pins the rule in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .pauli import PauliString, PauliSum
from .circuit import Circuit, Gate, PrepCircuit, PrepTableau

CONE_QUBIT_CAP = 26


def _gates_commute(a: Gate, b: Gate) -> bool:
    if a.support_mask & b.support_mask == 0:
        return True
    if a.kind == "rot" and b.kind == "rot":
        return a.axis.commutes(b.axis)
    return False


def _commuting_runs(gates: tuple[Gate, ...]) -> list[tuple[int, int]]:
    """Greedy maximal [start, stop) runs of consecutive pairwise-commuting gates."""
    runs: list[tuple[int, int]] = []
    i = 0
    while i < len(gates):
        j = i + 1
        while j < len(gates) and all(_gates_commute(gates[k], gates[j]) for k in range(i, j)):
            j += 1
        runs.append((i, j))
        i = j
    return runs


def _sweep(gates: tuple[Gate, ...], runs: list[tuple[int, int]], active: int) -> tuple[list[int], int]:
    retained: list[int] = []
    for start, stop in reversed(runs):
        entry = active
        grow = 0
        for i in range(start, stop):
            if gates[i].support_mask & entry:
                retained.append(i)
                grow |= gates[i].support_mask
        active |= grow
    retained.reverse()
    return retained, active


@dataclass(frozen=True)
class ConeSlice:
    """Result of a causal-cone sweep for one observable support."""

    cone_qubits: tuple[int, ...]
    retained_gates: tuple[int, ...]       # indices into circuit.gates, ascending
    retained_prep_gates: tuple[int, ...]  # indices into prep gates ("" for tableau prep)
    local_index_map: dict[int, int]

    @property
    def n_cone_qubits(self) -> int:
        return len(self.cone_qubits)


def _mask_to_qubits(mask: int) -> tuple[int, ...]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return tuple(out)


@lru_cache(maxsize=4096)
def _cone_cached(circuit: Circuit, support_mask: int) -> ConeSlice:
    runs = _commuting_runs(circuit.gates)
    retained, active = _sweep(circuit.gates, runs, support_mask)
    prep_retained: list[int] = []
    if isinstance(circuit.prep, PrepCircuit):
        prep_gates = circuit.prep.gates
        prep_runs = _commuting_runs(prep_gates)
        prep_retained, active = _sweep(prep_gates, prep_runs, active)
    cone_qubits = _mask_to_qubits(active)
    return ConeSlice(
        cone_qubits,
        tuple(retained),
        tuple(prep_retained),
        {q: i for i, q in enumerate(cone_qubits)},
    )


def causal_cone(circuit: Circuit, observable: PauliString | PauliSum | int) -> ConeSlice:
    """Cone slice for an observable (PauliString, PauliSum, or support mask).

    With a tableau prep the sweep covers the ansatz gates only; evaluation of
    such slices must go through the Heisenberg backend because the tableau may
    entangle across the cone cut.
    """
    if isinstance(observable, PauliString):
        mask = observable.support_mask()
    elif isinstance(observable, PauliSum):
        mask = 0
        for _, p in observable:
            mask |= p.support_mask()
    else:
        mask = int(observable)
    if mask == 0:
        raise ValueError("observable acts trivially; cone undefined")
    full = (1 << circuit.n_qubits) - 1
    if mask & ~full:
        raise ValueError("observable support outside circuit register")
    return _cone_cached(circuit, mask)


def slice_circuit(circuit: Circuit, cone: ConeSlice) -> Circuit:
    """Relabel the retained gates onto the cone sub-register."""
    n_loc = len(cone.cone_qubits)
    mapping = cone.local_index_map
    gates = tuple(circuit.gates[i].remap(mapping, n_loc) for i in cone.retained_gates)
    if isinstance(circuit.prep, PrepCircuit):
        prep = PrepCircuit(
            tuple(circuit.prep.gates[i].remap(mapping, n_loc) for i in cone.retained_prep_gates)
        )
    else:
        raise ValueError("cannot slice a tableau prep; use the Heisenberg backend")
    return Circuit(n_loc, gates, circuit.n_params, prep, circuit.n_layers)


@dataclass(frozen=True)
class ConeProfile:
    per_term: tuple[tuple[PauliString, int, int], ...]  # (term, cone size, retained gates)
    m_max: int
    cap: int
    tractable: bool


def cone_profile(circuit: Circuit, hamiltonian: PauliSum, cap: int = CONE_QUBIT_CAP) -> ConeProfile:
    per_term = []
    m_max = 0
    for _, p in hamiltonian:
        cone = causal_cone(circuit, p)
        m = cone.n_cone_qubits
        m_max = max(m_max, m)
        per_term.append((p, m, len(cone.retained_gates) + len(cone.retained_prep_gates)))
    return ConeProfile(tuple(per_term), m_max, cap, m_max <= cap)


@dataclass(frozen=True)
class ConstraintViolation:
    constraint: int  # 1: k-local terms, 2: prep, 3: gate locality, 4: depth
    message: str


def covqe_check(
    circuit: Circuit,
    hamiltonian: PauliSum,
    k_local: int = 4,
    gate_locality: int = 4,
    depth_cap: int | None = None,
) -> list[ConstraintViolation]:
    """Check the workflow preconditions: local observables, stabilizer prep,
    local gates, bounded depth.  Returns the (possibly empty) violation list."""
    violations = []
    for _, p in hamiltonian:
        if p.weight > k_local:
            violations.append(
                ConstraintViolation(1, f"term {p} has weight {p.weight} > {k_local}")
            )
    if not isinstance(circuit.prep, (PrepCircuit, PrepTableau)):
        violations.append(ConstraintViolation(2, "prep is not a stabilizer preparation"))
    for i, g in enumerate(circuit.gates):
        if len(g.qubits) > gate_locality:
            violations.append(
                ConstraintViolation(
                    3, f"gate {i} ({g.kind}) acts on {len(g.qubits)} > {gate_locality} qubits"
                )
            )
    if depth_cap is not None and circuit.n_layers > depth_cap:
        violations.append(
            ConstraintViolation(4, f"depth {circuit.n_layers} exceeds cap {depth_cap}")
        )
    return violations
