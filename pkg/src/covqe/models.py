"""Model builders: 1D cluster chain and the planar toric code.

Cluster chain (open boundary, 0-based sites):

    H = - sum_{i=1}^{N-2} Z_{i-1} X_i Z_{i+1}  -  J sum_i X_i

prepared by H on every site followed by nearest-neighbour CZ.  The CZ chain is
emitted in two parity layers (even pairs then odd pairs) so that the causal
cone of a local term stays local; a single sequential chain would cascade the
backward sweep across the register.

Toric code on a planar patch: qubits sit on the points of a (2L-1) x (2L-1)
grid with even coordinate sum, L^2 on even rows plus (L-1)^2 on odd rows.
Stars (X-type) are centred on odd-row/even-column points, plaquettes (Z-type)
on even-row/odd-column points; both act on their diamond neighbourhoods and
are 3-body on the boundary.  That makes L(L-1) of each, leaving exactly one
logical qubit, fixed by the logical Z string down the leftmost column.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from .pauli import PauliString, PauliSum, pauli_mul
from .circuit import Circuit, Gate, PrepCircuit, PrepTableau
from .tableau import Tableau


# -- cluster chain ------------------------------------------------------------


def _k_term(n: int, center: int) -> PauliString:
    return PauliString.from_ops(n, {center - 1: "Z", center: "X", center + 1: "Z"})


def cluster_hamiltonian(n_sites: int, coupling: float) -> PauliSum:
    if n_sites < 3:
        raise ValueError(f"cluster chain needs >= 3 sites, got {n_sites}")
    terms: list[tuple[float, PauliString]] = []
    for i in range(1, n_sites - 1):
        terms.append((-1.0, _k_term(n_sites, i)))
    for i in range(n_sites):
        terms.append((-coupling, PauliString.from_ops(n_sites, {i: "X"})))
    return PauliSum(n_sites, terms)


def cluster_prep(n_sites: int) -> PrepCircuit:
    gates = [Gate.h(q) for q in range(n_sites)]
    gates += [Gate.cz(i, i + 1) for i in range(0, n_sites - 1, 2)]
    gates += [Gate.cz(i, i + 1) for i in range(1, n_sites - 1, 2)]
    return PrepCircuit(tuple(gates))


def cluster_tableau(n_sites: int) -> Tableau:
    gens = [PauliString.from_ops(n_sites, {0: "X", 1: "Z"})]
    gens += [_k_term(n_sites, i) for i in range(1, n_sites - 1)]
    gens.append(PauliString.from_ops(n_sites, {n_sites - 2: "Z", n_sites - 1: "X"}))
    return Tableau.from_generators(n_sites, gens)


def cluster_ansatz(n_sites: int, depth: int) -> Circuit:
    """Brickwall of depth layers; each brick carries 5 independent angles:
    RZ, RX on both sites and a ZZ rotation."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    gates: list[Gate] = []
    p = 0
    for layer in range(1, depth + 1):
        offset = 0 if layer % 2 == 1 else 1
        for i in range(offset, n_sites - 1, 2):
            zi = PauliString.from_ops(n_sites, {i: "Z"})
            xi = PauliString.from_ops(n_sites, {i: "X"})
            zj = PauliString.from_ops(n_sites, {i + 1: "Z"})
            xj = PauliString.from_ops(n_sites, {i + 1: "X"})
            zz = PauliString.from_ops(n_sites, {i: "Z", i + 1: "Z"})
            gates += [
                Gate.rot(zi, p),
                Gate.rot(xi, p + 1),
                Gate.rot(zj, p + 2),
                Gate.rot(xj, p + 3),
                Gate.rot(zz, p + 4),
            ]
            p += 5
    return Circuit(n_sites, tuple(gates), p, cluster_prep(n_sites), depth)


def omega_string(n_sites: int) -> PauliString:
    """String order parameter: product of every second stabilizer generator.

    Telescopes to Z X X ... X Z acting on one boundary-to-boundary string.
    """
    centers = [2 * k - 1 for k in range(1, (n_sites - 1) // 2 + 1)]
    if not centers:
        raise ValueError(f"no string order parameter for {n_sites} sites")
    omega = reduce(pauli_mul, (_k_term(n_sites, c) for c in centers))
    assert omega.phase_pow == 0
    return omega


# -- planar toric code ---------------------------------------------------------


@dataclass(frozen=True)
class ToricLattice:
    L: int
    n_qubits: int
    coords: tuple[tuple[int, int], ...]
    stars: tuple[tuple[int, ...], ...]
    plaquettes: tuple[tuple[int, ...], ...]
    gamma1: tuple[int, ...]        # logical-Z path, leftmost column
    gamma2: tuple[int, ...]        # top-row X string
    gamma2_tilde: tuple[int, ...]  # bottom-row X string

    def index(self, r: int, c: int) -> int:
        return self.coords.index((r, c))


def toric_lattice(L: int) -> ToricLattice:
    if L < 2:
        raise ValueError(f"lattice needs L >= 2, got {L}")
    span = 2 * L - 1
    coords = tuple(
        (r, c) for r in range(span) for c in range(span) if (r + c) % 2 == 0
    )
    index = {rc: i for i, rc in enumerate(coords)}

    def diamond(r: int, c: int) -> tuple[int, ...]:
        out = []
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= rr < span and 0 <= cc < span:
                out.append(index[(rr, cc)])
        return tuple(sorted(out))

    stars = tuple(
        diamond(r, c) for r in range(1, span, 2) for c in range(0, span, 2)
    )
    plaquettes = tuple(
        diamond(r, c) for r in range(0, span, 2) for c in range(1, span, 2)
    )
    gamma1 = tuple(index[(r, 0)] for r in range(0, span, 2))
    gamma2 = tuple(index[(0, c)] for c in range(0, span, 2))
    gamma2_tilde = tuple(index[(span - 1, c)] for c in range(0, span, 2))
    return ToricLattice(
        L, len(coords), coords, stars, plaquettes, gamma1, gamma2, gamma2_tilde
    )


def _x_string(n: int, qubits: tuple[int, ...]) -> PauliString:
    return PauliString.from_ops(n, {q: "X" for q in qubits})


def _z_string(n: int, qubits: tuple[int, ...]) -> PauliString:
    return PauliString.from_ops(n, {q: "Z" for q in qubits})


def toric_hamiltonian(lat: ToricLattice, h_z: float) -> PauliSum:
    n = lat.n_qubits
    terms: list[tuple[float, PauliString]] = []
    for s in lat.stars:
        terms.append((-1.0, _x_string(n, s)))
    for p in lat.plaquettes:
        terms.append((-1.0, _z_string(n, p)))
    for q in range(n):
        terms.append((-h_z, PauliString.from_ops(n, {q: "Z"})))
    return PauliSum(n, terms)


def logical_z(lat: ToricLattice) -> PauliString:
    return _z_string(lat.n_qubits, lat.gamma1)


def wilson_loop(lat: ToricLattice) -> PauliString:
    """Product of all stars; interior X's cancel pairwise leaving the
    top-row and bottom-row boundary loop."""
    n = lat.n_qubits
    w = reduce(pauli_mul, (_x_string(n, s) for s in lat.stars))
    assert w.phase_pow == 0
    return w


def toric_tableau(lat: ToricLattice) -> Tableau:
    """Ground state of the h_z = 0 code in the logical sector L_Z = +1."""
    n = lat.n_qubits
    gens = [_x_string(n, s) for s in lat.stars]
    gens += [_z_string(n, p) for p in lat.plaquettes]
    gens.append(logical_z(lat))
    return Tableau.from_generators(n, gens)


def toric_hva(lat: ToricLattice, depth: int, h_z: float) -> Circuit:
    """Hamiltonian-variational ansatz: per layer, a shared-angle Z rotation on
    every site (field part, angle scaled by h_z) followed by shared-angle
    rotations along every star and plaquette (code part).

    Parameters are laid out [beta_1, gamma_1, ..., beta_D, gamma_D].
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    n = lat.n_qubits
    gates: list[Gate] = []
    for layer in range(depth):
        beta, gamma = 2 * layer, 2 * layer + 1
        for q in range(n):
            gates.append(Gate.rot(PauliString.from_ops(n, {q: "Z"}), gamma, -2.0 * h_z))
        for s in lat.stars:
            gates.append(Gate.rot(_x_string(n, s), beta, -2.0))
        for p in lat.plaquettes:
            gates.append(Gate.rot(_z_string(n, p), beta, -2.0))
    return Circuit(n, tuple(gates), 2 * depth, PrepTableau(toric_tableau(lat)), depth)


# -- uniform access for sweeps and the CLI -------------------------------------


@dataclass(frozen=True)
class ModelPoint:
    model: str
    size: int
    depth: int
    coupling: float
    circuit: Circuit
    hamiltonian: PauliSum
    order_parameter: PauliString


def make_point(model: str, size: int, depth: int, coupling: float) -> ModelPoint:
    if model == "cluster":
        return ModelPoint(
            model, size, depth, coupling,
            cluster_ansatz(size, depth),
            cluster_hamiltonian(size, coupling),
            omega_string(size),
        )
    if model == "toric":
        lat = toric_lattice(size)
        return ModelPoint(
            model, size, depth, coupling,
            toric_hva(lat, depth, coupling),
            toric_hamiltonian(lat, coupling),
            wilson_loop(lat),
        )
    raise ValueError(f"unknown model {model!r}; choose 'cluster' or 'toric'")
