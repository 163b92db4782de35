"""Pauli strings and real-coefficient Pauli sums on n qubits.

A Pauli string is stored as a pair of bitmasks plus a phase.  Bit i of
``x_mask`` / ``z_mask`` says whether the operator acts with X / Z on qubit i;
a set bit in both masks means Y.  The stored operator is

    phase * prod_i sigma_i,    sigma_i in {I, X, Y, Z},

i.e. the letter Y is the honest Hermitian Y, not X*Z.  ``phase`` is one of
{+1, -1, +i, -i} and is kept internally as an exponent k with phase == i**k.
Masks are plain Python ints, so any qubit count works.

Products track phases exactly.  Writing the letter product on masks (x, z) as
i**|x & z| * X^x Z^z, the product of two strings picks up (-1)^|z1 & x2| from
commuting X^x2 through Z^z1, which gives the closed form used in ``mul``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

_PHASE_VALUES = (1 + 0j, 1j, -1 + 0j, -1j)
_LETTERS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_MASKS_TO_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


@dataclass(frozen=True)
class PauliString:
    """Immutable signed Pauli string on ``n_qubits`` qubits."""

    n_qubits: int
    x_mask: int
    z_mask: int
    phase_pow: int = 0  # phase == i**phase_pow

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError(
                f"mask exceeds register: n_qubits={self.n_qubits}, "
                f"x_mask={self.x_mask:#x}, z_mask={self.z_mask:#x}"
            )
        object.__setattr__(self, "phase_pow", self.phase_pow % 4)

    @property
    def phase(self) -> complex:
        return _PHASE_VALUES[self.phase_pow]

    @staticmethod
    def identity(n_qubits: int) -> "PauliString":
        return PauliString(n_qubits, 0, 0, 0)

    @staticmethod
    def from_ops(n_qubits: int, ops: dict[int, str], phase_pow: int = 0) -> "PauliString":
        """Build from {qubit: letter}, e.g. {0: "Z", 1: "X", 2: "Z"}."""
        x = z = 0
        for q, letter in ops.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} outside register of {n_qubits}")
            try:
                xb, zb = _LETTERS[letter.upper()]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {letter!r}") from None
            if (x >> q) & 1 or (z >> q) & 1:
                raise ValueError(f"qubit {q} assigned twice")
            x |= xb << q
            z |= zb << q
        return PauliString(n_qubits, x, z, phase_pow)

    @staticmethod
    def from_label(n_qubits: int, label: str) -> "PauliString":
        """Parse "X0 Z3" style labels with optional +/-/+i/-i prefix."""
        tokens = label.split()
        pow_ = 0
        if tokens and tokens[0] in ("+", "-", "+i", "-i", "i"):
            pow_ = {"+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}[tokens[0]]
            tokens = tokens[1:]
        ops: dict[int, str] = {}
        for tok in tokens:
            if tok == "I":
                continue
            letter, idx = tok[0], tok[1:]
            if letter.upper() not in _LETTERS or not idx.isdigit():
                raise ValueError(f"bad Pauli token {tok!r} in label {label!r}")
            q = int(idx)
            if q in ops:
                raise ValueError(f"qubit {q} assigned twice in label {label!r}")
            ops[q] = letter
        return PauliString.from_ops(n_qubits, ops, pow_)

    def letter(self, q: int) -> str:
        return _MASKS_TO_LETTER[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)]

    def support(self) -> tuple[int, ...]:
        """Qubits acted on non-trivially, ascending."""
        mask = self.x_mask | self.z_mask
        out = []
        q = 0
        while mask:
            if mask & 1:
                out.append(q)
            mask >>= 1
            q += 1
        return tuple(out)

    def support_mask(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def is_hermitian(self) -> bool:
        return self.phase_pow % 2 == 0

    def commutes(self, other: "PauliString") -> bool:
        """Symplectic criterion: parity of overlapping X/Z pairs."""
        _check_same_register(self, other)
        a = (self.x_mask & other.z_mask).bit_count()
        b = (self.z_mask & other.x_mask).bit_count()
        return (a ^ b) & 1 == 0

    def mul(self, other: "PauliString") -> "PauliString":
        """Exact operator product self * other."""
        _check_same_register(self, other)
        x3 = self.x_mask ^ other.x_mask
        z3 = self.z_mask ^ other.z_mask
        pow_ = (
            self.phase_pow
            + other.phase_pow
            + (self.x_mask & self.z_mask).bit_count()
            + (other.x_mask & other.z_mask).bit_count()
            - (x3 & z3).bit_count()
            + 2 * (self.z_mask & other.x_mask).bit_count()
        )
        return PauliString(self.n_qubits, x3, z3, pow_ % 4)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return self.mul(other)

    def with_phase_pow(self, pow_: int) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, pow_)

    def negate(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, self.phase_pow + 2)

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        """Reindex onto the sub-register ``qubits`` (local index = position).

        Every supported qubit must appear in ``qubits``.
        """
        pos = {q: i for i, q in enumerate(qubits)}
        x = z = 0
        for q in self.support():
            if q not in pos:
                raise ValueError(f"support qubit {q} not in sub-register {qubits}")
            xb = (self.x_mask >> q) & 1
            zb = (self.z_mask >> q) & 1
            x |= xb << pos[q]
            z |= zb << pos[q]
        return PauliString(max(len(qubits), 1), x, z, self.phase_pow)

    def label(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase_pow]
        body = " ".join(f"{self.letter(q)}{q}" for q in self.support())
        return f"{prefix} {body}" if body else f"{prefix} I"

    def __str__(self) -> str:
        return self.label()


def _check_same_register(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"register mismatch: {a.n_qubits} vs {b.n_qubits}")


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    return a.mul(b)


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


class PauliSum:
    """Real linear combination of Hermitian Pauli strings.

    Terms are kept canonical: phases folded into the coefficients (every
    stored string has phase +1), duplicates merged, exact zeros dropped, and
    terms sorted lexicographically on (z_mask, x_mask).
    """

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Iterable[tuple[float, PauliString]] = ()):
        acc: dict[tuple[int, int], float] = {}
        for coeff, ps in terms:
            if ps.n_qubits != n_qubits:
                raise ValueError(f"term register {ps.n_qubits} != {n_qubits}")
            folded = complex(coeff) * ps.phase
            if abs(folded.imag) > 1e-12 * max(1.0, abs(folded.real)):
                raise ValueError(f"non-real coefficient {folded} for term {ps}")
            key = (ps.z_mask, ps.x_mask)
            acc[key] = acc.get(key, 0.0) + folded.real
        self.n_qubits = n_qubits
        self.terms: tuple[tuple[float, PauliString], ...] = tuple(
            (c, PauliString(n_qubits, x, z))
            for (z, x), c in sorted(acc.items())
            if c != 0.0
        )

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"register mismatch: {self.n_qubits} vs {other.n_qubits}")
        return PauliSum(self.n_qubits, list(self.terms) + list(other.terms))

    def scale(self, factor: float) -> "PauliSum":
        return PauliSum(self.n_qubits, [(factor * c, p) for c, p in self.terms])

    def support(self) -> tuple[int, ...]:
        mask = 0
        for _, p in self.terms:
            mask |= p.support_mask()
        out = []
        q = 0
        while mask:
            if mask & 1:
                out.append(q)
            mask >>= 1
            q += 1
        return tuple(out)

    def max_weight(self) -> int:
        return max((p.weight for _, p in self.terms), default=0)

    def dump(self) -> str:
        lines = [f"n_qubits {self.n_qubits}"]
        for c, p in self.terms:
            body = " ".join(f"{p.letter(q)}{q}" for q in p.support()) or "I"
            lines.append(f"{c!r} * {body}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def load(text: str) -> "PauliSum":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n_qubits"):
            raise ValueError("PauliSum dump must start with 'n_qubits <int>'")
        n = int(lines[0].split()[1])
        terms = []
        for ln in lines[1:]:
            coeff_str, _, body = ln.partition("*")
            terms.append((float(coeff_str), PauliString.from_label(n, body.strip())))
        return PauliSum(n, terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self.terms)})"
