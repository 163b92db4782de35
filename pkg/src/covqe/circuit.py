"""Circuit IR: Clifford gates plus Pauli-axis rotations with shared parameters.

Rotation semantics are exp(-i * theta_eff / 2 * axis) with
theta_eff = scale * theta[param_ref]; several gates may reference the same
parameter (hardware-efficient and Hamiltonian-variational ansaetze both need
this).  State preparation is either a Clifford prefix acting on |0...0> or a
stabilizer tableau.

Clifford conjugation rules on (x, z) masks are provided in both directions:
``forward`` g P g^ (used to push computational-basis stabilizers through a
prep circuit) and adjoint g^ P g (used by the Heisenberg-picture evaluator
sweeping a circuit backwards).  Sign rules are the usual tableau updates and
are pinned by exhaustive dense-matrix tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString
from .tableau import Tableau

CLIFFORD_KINDS = ("h", "s", "sdg", "cz", "cnot")
GATE_KINDS = CLIFFORD_KINDS + ("rot",)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    axis: PauliString | None = None
    param_ref: int | None = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind in ("h", "s", "sdg"):
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on one qubit, got {self.qubits}")
        elif self.kind in ("cz", "cnot"):
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.kind} needs two distinct qubits, got {self.qubits}")
        else:
            if self.axis is None or self.param_ref is None:
                raise ValueError("rot gate needs axis and param_ref")
            if self.axis.phase_pow != 0:
                raise ValueError(f"rotation axis must carry phase +1, got {self.axis}")
            if self.axis.is_identity():
                raise ValueError("rotation axis must be non-trivial")
            if self.param_ref < 0:
                raise ValueError(f"param_ref must be >= 0, got {self.param_ref}")
            if tuple(self.qubits) != self.axis.support():
                raise ValueError(
                    f"rot qubits {self.qubits} must equal axis support {self.axis.support()}"
                )

    @staticmethod
    def h(q: int) -> "Gate":
        return Gate("h", (q,))

    @staticmethod
    def s(q: int) -> "Gate":
        return Gate("s", (q,))

    @staticmethod
    def sdg(q: int) -> "Gate":
        return Gate("sdg", (q,))

    @staticmethod
    def cz(a: int, b: int) -> "Gate":
        return Gate("cz", (a, b))

    @staticmethod
    def cnot(control: int, target: int) -> "Gate":
        return Gate("cnot", (control, target))

    @staticmethod
    def rot(axis: PauliString, param_ref: int, scale: float = 1.0) -> "Gate":
        return Gate("rot", axis.support(), axis, param_ref, scale)

    @property
    def support_mask(self) -> int:
        mask = 0
        for q in self.qubits:
            mask |= 1 << q
        return mask

    def inverse(self) -> "Gate":
        if self.kind == "s":
            return Gate.sdg(self.qubits[0])
        if self.kind == "sdg":
            return Gate.s(self.qubits[0])
        if self.kind == "rot":
            return Gate("rot", self.qubits, self.axis, self.param_ref, -self.scale)
        return self  # h, cz, cnot are self-inverse

    def remap(self, index_map: dict[int, int], new_n: int) -> "Gate":
        """Relabel qubits onto a sub-register (used by causal-cone slicing)."""
        qubits = tuple(index_map[q] for q in self.qubits)
        axis = None
        if self.axis is not None:
            ordered = sorted(self.axis.support(), key=lambda q: index_map[q])
            x = z = 0
            for q in ordered:
                x |= ((self.axis.x_mask >> q) & 1) << index_map[q]
                z |= ((self.axis.z_mask >> q) & 1) << index_map[q]
            axis = PauliString(new_n, x, z, self.axis.phase_pow)
            qubits = axis.support()
        return Gate(self.kind, qubits, axis, self.param_ref, self.scale)

    def shift_param(self, offset: int) -> "Gate":
        if self.kind != "rot":
            return self
        return Gate("rot", self.qubits, self.axis, self.param_ref + offset, self.scale)


@dataclass(frozen=True)
class PrepCircuit:
    """Clifford prefix applied to |0...0>."""

    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        for g in self.gates:
            if g.kind == "rot":
                raise ValueError("prep circuit must be Clifford-only")


@dataclass(frozen=True)
class PrepTableau:
    tableau: Tableau


Prep = PrepCircuit | PrepTableau


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int
    prep: Prep = field(default_factory=PrepCircuit)
    n_layers: int = 0

    def __post_init__(self) -> None:
        full = (1 << self.n_qubits) - 1
        prep_gates = self.prep.gates if isinstance(self.prep, PrepCircuit) else ()
        if isinstance(self.prep, PrepTableau) and self.prep.tableau.n_qubits != self.n_qubits:
            raise ValueError("prep tableau register mismatch")
        for g in tuple(prep_gates) + self.gates:
            if g.support_mask & ~full:
                raise ValueError(f"gate {g} outside register of {self.n_qubits}")
            if g.kind == "rot" and g.param_ref >= self.n_params:
                raise ValueError(
                    f"param_ref {g.param_ref} out of range (n_params={self.n_params})"
                )

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    def param_occurrences(self) -> list[list[int]]:
        """For each parameter index, the ansatz gate indices referencing it."""
        occ: list[list[int]] = [[] for _ in range(self.n_params)]
        for i, g in enumerate(self.gates):
            if g.kind == "rot":
                occ[g.param_ref].append(i)
        return occ


@dataclass
class BoundCircuit:
    """Circuit with resolved rotation angles (theta_eff per rot gate)."""

    circuit: Circuit
    theta: np.ndarray
    angles: tuple[float | None, ...]


def bind(circuit: Circuit, theta: Sequence[float] | np.ndarray) -> BoundCircuit:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_params,):
        raise ValueError(
            f"theta shape {theta.shape} does not match n_params={circuit.n_params}"
        )
    theta = theta.copy()
    theta.setflags(write=False)
    angles = tuple(
        g.scale * theta[g.param_ref] if g.kind == "rot" else None for g in circuit.gates
    )
    return BoundCircuit(circuit, theta, angles)


def inverse(circuit: Circuit) -> Circuit:
    """Gate-list inverse: reversed order, each gate inverted (scales negated).

    The prep is carried along unchanged; binding the inverse with the same
    theta undoes the ansatz applied to the prep state.
    """
    return Circuit(
        circuit.n_qubits,
        tuple(g.inverse() for g in reversed(circuit.gates)),
        circuit.n_params,
        circuit.prep,
        circuit.n_layers,
    )


# -- Clifford conjugation on masks -------------------------------------------


def conjugate_masks(
    gate: Gate, x: int, z: int, forward: bool
) -> tuple[int, int, int]:
    """Map (x, z, sign_pow) of a Pauli under g P g^ (forward) or g^ P g.

    Returns (x', z', extra_phase_pow) with extra_phase_pow in {0, 2}.
    """
    kind = gate.kind
    flip = 0
    if kind == "h":
        q = gate.qubits[0]
        xq = (x >> q) & 1
        zq = (z >> q) & 1
        if xq != zq:
            x ^= 1 << q
            z ^= 1 << q
        flip = xq & zq
    elif kind in ("s", "sdg"):
        q = gate.qubits[0]
        xq = (x >> q) & 1
        zq = (z >> q) & 1
        # s forward: X -> Y, Y -> -X; s adjoint: X -> -Y, Y -> X; sdg mirrors s
        s_forward = forward if kind == "s" else not forward
        flip = (xq & zq) if s_forward else (xq & (zq ^ 1))
        z ^= xq << q
    elif kind == "cnot":
        c, t = gate.qubits
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        flip = xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
    elif kind == "cz":
        a, b = gate.qubits
        xa, za = (x >> a) & 1, (z >> a) & 1
        xb, zb = (x >> b) & 1, (z >> b) & 1
        flip = xa & xb & (za ^ zb)
        z ^= xb << a
        z ^= xa << b
    else:
        raise ValueError(f"conjugate_masks does not handle gate kind {kind!r}")
    return x, z, 2 * flip


def conjugate_pauli(gate: Gate, p: PauliString, forward: bool) -> PauliString:
    x, z, extra = conjugate_masks(gate, p.x_mask, p.z_mask, forward)
    return PauliString(p.n_qubits, x, z, p.phase_pow + extra)


def clifford_prep_tableau(n_qubits: int, gates: Iterable[Gate]) -> Tableau:
    """Stabilizer tableau of (Clifford prefix) |0...0>."""
    gens = [PauliString.from_ops(n_qubits, {q: "Z"}) for q in range(n_qubits)]
    for g in gates:
        if g.kind == "rot":
            raise ValueError("prep circuit must be Clifford-only")
        gens = [conjugate_pauli(g, p, forward=True) for p in gens]
    return Tableau.from_generators(n_qubits, gens)


def prep_tableau(circuit: Circuit) -> Tableau:
    if isinstance(circuit.prep, PrepTableau):
        return circuit.prep.tableau
    return clifford_prep_tableau(circuit.n_qubits, circuit.prep.gates)


# -- serialization -----------------------------------------------------------


def _gate_line(g: Gate) -> str:
    if g.kind == "rot":
        body = " ".join(f"{g.axis.letter(q)}{q}" for q in g.axis.support())
        return f"rot {g.param_ref} {g.scale!r} {body}"
    return f"{g.kind} {' '.join(str(q) for q in g.qubits)}"


def _parse_gate_line(n_qubits: int, line: str) -> Gate:
    parts = line.split()
    kind = parts[0]
    if kind == "rot":
        axis = PauliString.from_label(n_qubits, " ".join(parts[3:]))
        return Gate.rot(axis, int(parts[1]), float(parts[2]))
    return Gate(kind, tuple(int(tok) for tok in parts[1:]))


def dump_circuit(circuit: Circuit) -> str:
    lines = [
        "covqe-circuit v1",
        f"n_qubits {circuit.n_qubits}",
        f"n_params {circuit.n_params}",
        f"n_layers {circuit.n_layers}",
    ]
    if isinstance(circuit.prep, PrepCircuit):
        lines.append("[prep-gates]")
        lines += [_gate_line(g) for g in circuit.prep.gates]
    else:
        lines.append("[prep-tableau]")
        lines += [g.label() for g in circuit.prep.tableau.generators]
    lines.append("[gates]")
    lines += [_gate_line(g) for g in circuit.gates]
    return "\n".join(lines) + "\n"


def load_circuit(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "covqe-circuit v1":
        raise ValueError("not a covqe-circuit v1 dump")
    n_qubits = int(lines[1].split()[1])
    n_params = int(lines[2].split()[1])
    n_layers = int(lines[3].split()[1])
    idx = 4
    prep: Prep
    if lines[idx] == "[prep-gates]":
        idx += 1
        prep_gates = []
        while lines[idx] != "[gates]":
            prep_gates.append(_parse_gate_line(n_qubits, lines[idx]))
            idx += 1
        prep = PrepCircuit(tuple(prep_gates))
    elif lines[idx] == "[prep-tableau]":
        idx += 1
        gens = []
        while lines[idx] != "[gates]":
            gens.append(PauliString.from_label(n_qubits, lines[idx]))
            idx += 1
        prep = PrepTableau(Tableau.from_generators(n_qubits, gens))
    else:
        raise ValueError(f"expected prep section, got {lines[idx]!r}")
    gates = tuple(_parse_gate_line(n_qubits, ln) for ln in lines[idx + 1 :])
    return Circuit(n_qubits, gates, n_params, prep, n_layers)
