"""Signed stabilizer tableaux: n commuting independent Pauli generators.

A tableau fixes a unique n-qubit stabilizer state.  Expectation values of
Pauli strings are computed by symplectic Gaussian elimination with exact sign
tracking, never by simulation: a string anticommuting with any group element
has expectation 0; otherwise it reduces to a product of generators and the
expectation is the +/-1 phase match of that product.

Symplectic vectors are encoded as (x_mask << n) | z_mask so that echelon rows
with pivot below n are exactly the Z-type subgroup, which is what
``to_statevector`` solves to find a support basis state.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString
from . import statevector as sv


class TableauError(ValueError):
    pass


class Tableau:
    __slots__ = ("n_qubits", "generators", "_rows")

    def __init__(self, n_qubits: int, generators: tuple[PauliString, ...]):
        self.n_qubits = n_qubits
        self.generators = tuple(generators)
        self._rows: list[tuple[int, PauliString]] | None = None

    @staticmethod
    def from_generators(n_qubits: int, generators: list[PauliString] | tuple[PauliString, ...]) -> "Tableau":
        gens = tuple(generators)
        if len(gens) != n_qubits:
            raise TableauError(
                f"need exactly {n_qubits} generators for a pure state, got {len(gens)} "
                "(underdetermined or overdetermined)"
            )
        for g in gens:
            if g.n_qubits != n_qubits:
                raise TableauError(f"generator register {g.n_qubits} != {n_qubits}")
            if not g.is_hermitian():
                raise TableauError(f"generator {g} has imaginary phase")
            if g.is_identity():
                raise TableauError("identity is not a valid generator")
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                if not gens[i].commutes(gens[j]):
                    raise TableauError(f"generators {gens[i]} and {gens[j]} anticommute")
        t = Tableau(n_qubits, gens)
        t._build_rows()  # validates independence / sign consistency
        return t

    # -- symplectic echelon form ------------------------------------------

    def _build_rows(self) -> list[tuple[int, PauliString]]:
        """Echelon basis of the stabilizer group with tracked sign products."""
        if self._rows is not None:
            return self._rows
        n = self.n_qubits
        rows: list[tuple[int, PauliString]] = []
        for g in self.generators:
            vec = (g.x_mask << n) | g.z_mask
            prod = g
            for rvec, rprod in rows:
                if vec & (1 << (rvec.bit_length() - 1)):
                    vec ^= rvec
                    prod = prod.mul(rprod)
            if vec == 0:
                # prod now equals g * (combination with the same masks) = +/- I
                if prod.phase_pow == 2:
                    raise TableauError(
                        f"contradictory generators: -identity in group (via {g})"
                    )
                raise TableauError(f"dependent generator {g}: state underdetermined")
            rows.append((vec, prod))
            rows.sort(key=lambda r: -r[0])
        self._rows = rows
        return rows

    # -- queries ------------------------------------------------------------

    def expectation(self, p: PauliString) -> float:
        """<P> on the stabilizer state: exactly one of -1.0, 0.0, +1.0 (times p's sign)."""
        if p.n_qubits != self.n_qubits:
            raise ValueError(f"register mismatch: {p.n_qubits} vs {self.n_qubits}")
        if not p.is_hermitian():
            raise ValueError(f"expectation of non-Hermitian string {p}")
        if p.is_identity():
            return 1.0 if p.phase_pow == 0 else -1.0
        n = self.n_qubits
        vec = (p.x_mask << n) | p.z_mask
        prod: PauliString | None = None
        for rvec, rprod in self._build_rows():
            if vec & (1 << (rvec.bit_length() - 1)):
                vec ^= rvec
                prod = rprod if prod is None else prod.mul(rprod)
        if vec != 0:
            # masks outside the group row space: p anticommutes with some
            # stabilizer (the group is maximal isotropic), so <p> = 0
            return 0.0
        assert prod is not None
        # prod and p share masks and both are Hermitian: phases differ by +/-1
        return 1.0 if prod.phase_pow == p.phase_pow else -1.0

    def to_statevector(self) -> np.ndarray:
        """Dense state (n <= 25).  Global phase: first nonzero amplitude real positive."""
        n = self.n_qubits
        if n > sv.FULL_STATE_QUBIT_CAP:
            raise sv.ResourceCapError(
                f"tableau statevector for {n} qubits exceeds the {sv.FULL_STATE_QUBIT_CAP}-qubit cap"
            )
        # Z-type subgroup rows give parity constraints on a support basis state.
        zrows = [
            (rvec, 1 if rprod.phase_pow == 2 else 0)
            for rvec, rprod in self._build_rows()
            if rvec.bit_length() <= n
        ]
        # reduce to RREF so each pivot appears in exactly one row
        zrows = [list(r) for r in zrows]
        for i in range(len(zrows)):
            piv = 1 << (zrows[i][0].bit_length() - 1)
            for j in range(len(zrows)):
                if j != i and zrows[j][0] & piv:
                    zrows[j][0] ^= zrows[i][0]
                    zrows[j][1] ^= zrows[i][1]
        b = 0
        for vec, rhs in zrows:
            if rhs:
                b |= 1 << (vec.bit_length() - 1)
        v = np.zeros(1 << n, dtype=np.complex128)
        v[b] = 1.0
        for g in self.generators:
            v += sv.apply_pauli(v, g)
            v *= 0.5
        return sv.normalize_phase(v)

    # -- serialization -------------------------------------------------------

    def dump(self) -> str:
        lines = [f"n_qubits {self.n_qubits}"]
        lines += [g.label() for g in self.generators]
        return "\n".join(lines) + "\n"

    @staticmethod
    def load(text: str) -> "Tableau":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n_qubits"):
            raise TableauError("tableau dump must start with 'n_qubits <int>'")
        n = int(lines[0].split()[1])
        gens = [PauliString.from_label(n, ln) for ln in lines[1:]]
        return Tableau.from_generators(n, gens)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tableau):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.generators == other.generators

    def __hash__(self) -> int:
        return hash((self.n_qubits, self.generators))

    def __repr__(self) -> str:
        return f"Tableau(n_qubits={self.n_qubits})"
