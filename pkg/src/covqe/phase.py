"""Post-optimization analysis: fidelities between optimized states, sampled
overlap estimation (compute-uncompute), spectral clustering of the fidelity
matrix into two phases, and order-parameter curves.

Clustering is the symmetric normalized Laplacian variant with the raw fidelity
as affinity, embedded rows L2-normalized, then Lloyd k-means with seeded
restarts.  k-means is written out here rather than imported because the
tie-break rules (lowest inertia, then lowest restart index, k=2 labels
anchored so grid point 0 gets label 1) are part of the reproducibility
contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .pauli import PauliString
from .circuit import BoundCircuit, Circuit, PrepCircuit, PrepTableau, bind, inverse
from .evaluator import ShotEstimate, build_state, measure_pauli_on_state
from .statevector import pauli_expectation
from .models import make_point
from .optimize import SweepRecord


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"state dimensions differ: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(a, b)))


@dataclass(frozen=True)
class FidelityMatrix:
    grid: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.shape != (len(self.grid), len(self.grid)):
            raise ValueError("fidelity matrix shape does not match grid")
        if np.max(np.abs(v - v.T)) > 1e-10:
            raise ValueError("fidelity matrix not symmetric")
        if np.max(np.abs(np.diag(v) - 1.0)) > 1e-10:
            raise ValueError("fidelity matrix diagonal differs from 1")
        if v.min() < -1e-10 or v.max() > 1 + 1e-10:
            raise ValueError("fidelity entries outside [0, 1]")
        v.flags.writeable = False


@dataclass(frozen=True)
class PhaseLabels:
    grid: tuple[float, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.grid):
            raise ValueError("one label per grid point required")
        if len(set(self.labels)) != 2:
            raise ValueError("expected exactly two distinct labels")


def record_state(record: SweepRecord) -> np.ndarray:
    point = make_point(record.model, record.size, record.depth, record.coupling)
    return build_state(bind(point.circuit, np.asarray(record.theta_opt)))


def _check_records(records: list[SweepRecord]):
    if not records:
        raise ValueError("no sweep records")
    key = (records[0].model, records[0].size, records[0].depth)
    for r in records:
        if (r.model, r.size, r.depth) != key:
            raise ValueError("sweep records mix models or sizes")
    grid = [r.coupling for r in records]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be strictly increasing")
    return tuple(grid)


def fidelity_matrix(records: list[SweepRecord]) -> FidelityMatrix:
    grid = _check_records(records)
    states = [record_state(r) for r in records]
    n = len(states)
    f = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            f[i, j] = f[j, i] = fidelity(states[i], states[j])
    return FidelityMatrix(grid, f)


def _same_prep(a: Circuit, b: Circuit) -> bool:
    if isinstance(a.prep, PrepCircuit) and isinstance(b.prep, PrepCircuit):
        return a.prep.gates == b.prep.gates
    if isinstance(a.prep, PrepTableau) and isinstance(b.prep, PrepTableau):
        return a.prep.tableau == b.prep.tableau
    return False


def overlap_sampled(
    bound_a: BoundCircuit, bound_b: BoundCircuit, shots: int, seed: int
) -> ShotEstimate:
    """Compute-uncompute fidelity estimate: run A forward, B backward, and
    count returns to the shared preparation state.  The success probability is
    F^2; the reported mean is F = sqrt(max(p, 0)) with a delta-method error
    bar (clamped near F = 0, where the sqrt is not differentiable)."""
    ca, cb = bound_a.circuit, bound_b.circuit
    if ca.n_qubits != cb.n_qubits:
        raise ValueError("circuits act on different register sizes")
    if not _same_prep(ca, cb):
        raise ValueError("compute-uncompute requires a shared preparation")
    if shots <= 0:
        raise ValueError("shots must be positive")
    from .evaluator import prep_state, _apply_gate

    n = ca.n_qubits
    start = prep_state(ca)
    # gate application consumes its input array; keep a pristine reference
    v = start.copy()
    for g, angle in zip(ca.gates, bound_a.angles):
        v = _apply_gate(v, n, g, angle)
    inv = inverse(cb)
    for g, angle in zip(inv.gates, reversed(bound_b.angles)):
        v = _apply_gate(v, n, g, None if angle is None else -angle)
    p0 = float(min(1.0, abs(np.vdot(start, v)) ** 2))
    rng = np.random.default_rng(seed)
    hits = int(rng.binomial(shots, p0))
    p_hat = hits / shots
    f_est = float(np.sqrt(max(p_hat, 0.0)))
    if shots > 1:
        se_p = float(np.sqrt(p_hat * (1 - p_hat) * shots / (shots - 1)) / np.sqrt(shots))
    else:
        se_p = 0.0
    if se_p == 0.0:
        se_f = 0.0
    else:
        se_f = se_p / (2.0 * max(f_est, np.sqrt(se_p)))
    return ShotEstimate(f_est, se_f, shots, seed)


def _lloyd(rows: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    n = rows.shape[0]
    centers = rows[rng.choice(n, size=k, replace=False)].copy()
    labels = np.zeros(n, dtype=int)
    for _ in range(100):
        d2 = ((rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        for c in range(k):
            members = new_labels == c
            if members.any():
                centers[c] = rows[members].mean(axis=0)
            else:
                # re-seed an emptied cluster at the worst-fit point
                centers[c] = rows[np.argmax(d2[np.arange(n), new_labels])]
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(((rows - centers[labels]) ** 2).sum())
    return labels, inertia


def spectral_cluster(
    fm: FidelityMatrix | np.ndarray, k: int = 2, seed: int = 0, restarts: int = 20
) -> PhaseLabels:
    if isinstance(fm, FidelityMatrix):
        f, grid = np.asarray(fm.values, dtype=float), fm.grid
    else:
        f = np.asarray(fm, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1] or np.max(np.abs(f - f.T)) > 1e-10:
            raise ValueError("affinity must be a symmetric square matrix")
        if f.min() < -1e-12:
            raise ValueError("affinity must be nonnegative")
        grid = tuple(float(i) for i in range(f.shape[0]))
    n = f.shape[0]
    if k < 2 or k > n:
        raise ValueError(f"cannot split {n} points into {k} clusters")
    deg = f.sum(axis=1)
    if np.any(deg <= 0):
        raise ValueError("degenerate affinity: zero row sum")
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(n) - inv_sqrt[:, None] * f * inv_sqrt[None, :]
    lap = 0.5 * (lap + lap.T)
    _, vecs = scipy.linalg.eigh(lap, subset_by_index=[0, k - 1])
    rows = vecs.copy()
    norms = np.linalg.norm(rows, axis=1)
    good = norms > 1e-15
    rows[good] /= norms[good, None]
    best_labels, best_inertia = None, np.inf
    for r in range(restarts):
        labels, inertia = _lloyd(rows, k, np.random.default_rng((seed, r)))
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    labels = best_labels
    if k == 2 and labels[0] == 0:
        labels = 1 - labels
    return PhaseLabels(grid, tuple(int(x) for x in labels))


@dataclass(frozen=True)
class CurvePoint:
    coupling: float
    value: float
    sampled: ShotEstimate | None = None


def order_parameter_curve(
    records: list[SweepRecord],
    op: PauliString,
    shots: int | None = None,
    seed: int = 0,
) -> list[CurvePoint]:
    _check_records(records)
    r0 = records[0]
    n = make_point(r0.model, r0.size, r0.depth, r0.coupling).circuit.n_qubits
    if op.n_qubits != n:
        raise ValueError(f"order parameter acts on {op.n_qubits} qubits, model has {n}")
    out = []
    for i, r in enumerate(records):
        state = record_state(r)
        value = pauli_expectation(state, op)
        est = None
        if shots is not None:
            child = int(np.random.SeedSequence((seed, i)).generate_state(1)[0])
            est = measure_pauli_on_state(state, op, shots, seed=child)
        out.append(CurvePoint(r.coupling, value, est))
    return out
