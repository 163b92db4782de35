"""Exact-diagonalization reference: dense solve for small registers, matrix-free
Lanczos (full reorthogonalization, restarted) beyond.

Dense is memory-bound at 2^n x 2^n; on a small machine that means n <= 13 or
so, and the auto route switches to Lanczos at n > 12.  Lanczos never builds the
matrix: the matvec is the mask-arithmetic Pauli apply.  Hamiltonians whose
terms all have an even number of Y factors (both spin models here) are real
symmetric, so Lanczos runs in float64, halving memory; that is what makes the
2^25 slow path fit at all.

Degeneracy counting: a single Krylov run started from one vector can only ever
show one Ritz copy of a degenerate eigenvalue, so multiplicity is estimated by
deflated reruns (re-solving in the orthogonal complement of the ground vectors
found so far) and counting energies within 1e-8 of the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .pauli import PauliSum
from . import statevector as sv

DENSE_QUBIT_CAP = 13
LANCZOS_QUBIT_CAP = 25
DENSE_AUTO_SWITCH = 12
_KRYLOV_BYTES_BUDGET = 1 << 30
_DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class EDResult:
    e0: float
    residual: float
    method: str
    converged: bool
    degeneracy: int | None = None
    vector: np.ndarray | None = None


def apply_hamiltonian(hamiltonian: PauliSum, v: np.ndarray) -> np.ndarray:
    if v.shape != (1 << hamiltonian.n_qubits,):
        raise ValueError(
            f"vector of dim {v.shape} does not match {hamiltonian.n_qubits} qubits"
        )
    return sv.apply_sum(v, hamiltonian)


def is_real_hamiltonian(hamiltonian: PauliSum) -> bool:
    """True when every term has an even number of Y factors, i.e. the matrix
    is real symmetric (coefficients are always real by PauliSum contract)."""
    return all(int(p.x_mask & p.z_mask).bit_count() % 2 == 0 for _, p in hamiltonian)


def hamiltonian_matrix(hamiltonian: PauliSum) -> np.ndarray:
    n = hamiltonian.n_qubits
    if n > DENSE_QUBIT_CAP:
        raise sv.ResourceCapError(
            f"dense matrix for {n} qubits needs {(1 << (2 * n)) * 8 / 2**30:.0f}+ GiB; "
            f"cap is {DENSE_QUBIT_CAP} qubits, use the lanczos method instead"
        )
    dim = 1 << n
    real = is_real_hamiltonian(hamiltonian)
    mat = np.zeros((dim, dim), dtype=np.float64 if real else np.complex128)
    idx = np.arange(dim, dtype=np.int64)
    for coeff, p in hamiltonian:
        front = coeff * (1j ** ((p.phase_pow + int(p.x_mask & p.z_mask).bit_count()) % 4))
        front = front.real if real else front
        signs = 1 - 2 * (_parity(idx & p.z_mask))
        mat[idx ^ p.x_mask, idx] += front * signs
    return mat


def _parity(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        a ^= a >> shift
    return (a & 1).astype(np.int64)


# sign/scatter arrays are dim-sized per distinct mask; caching them is a big
# win for repeated matvecs but only fits in memory for moderate registers
_MATVEC_CACHE_MAX_DIM = 1 << 20


def _matvec_builder(hamiltonian: PauliSum, real: bool):
    n = hamiltonian.n_qubits
    dim = 1 << n
    cache_ok = dim <= _MATVEC_CACHE_MAX_DIM
    sign_cache: dict[int, np.ndarray] = {}
    scatter_cache: dict[int, np.ndarray] = {}

    def signs_for(z_mask: int) -> np.ndarray:
        got = sign_cache.get(z_mask)
        if got is None:
            idx = np.arange(dim, dtype=np.int64)
            got = 1.0 - 2.0 * _parity(idx & z_mask)
            if cache_ok:
                sign_cache[z_mask] = got
        return got

    def scatter_for(x_mask: int) -> np.ndarray:
        got = scatter_cache.get(x_mask)
        if got is None:
            got = np.arange(dim, dtype=np.int64) ^ x_mask
            if cache_ok:
                scatter_cache[x_mask] = got
        return got

    terms = []
    for coeff, p in hamiltonian:
        front = coeff * (1j ** ((p.phase_pow + int(p.x_mask & p.z_mask).bit_count()) % 4))
        if real:
            front = complex(front).real
        terms.append((front, p.x_mask, p.z_mask))

    def matvec(v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        for front, x_mask, z_mask in terms:
            piece = v if z_mask == 0 else signs_for(z_mask) * v
            if x_mask == 0:
                out += front * piece
            else:
                out[scatter_for(x_mask)] += front * piece
        return out

    return matvec


def _lanczos_lowest(matvec, v0: np.ndarray, krylov: int, ortho_against=()):
    """One restarted-from-v0 Krylov pass; returns (ritz value, ritz vector).
    Full reorthogonalization against the stored basis and any deflation set."""
    v = v0.copy()
    for d in ortho_against:
        v -= np.vdot(d, v) * d
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise np.linalg.LinAlgError("start vector lies in the deflated subspace")
    v /= nrm
    basis = np.empty((krylov, v.shape[0]), dtype=v.dtype)
    basis[0] = v
    m = 1
    alphas: list[float] = []
    betas: list[float] = []
    w = matvec(v)
    while True:
        a = float(np.vdot(basis[m - 1], w).real)
        alphas.append(a)
        w = w - a * basis[m - 1]
        if m > 1:
            w = w - betas[-1] * basis[m - 2]
        for d in ortho_against:
            w -= np.vdot(d, w) * d
        coeffs = basis[:m].conj() @ w
        w -= coeffs @ basis[:m]
        if m == krylov:
            break
        nb = float(np.linalg.norm(w))
        if nb < 1e-13:
            break
        betas.append(nb)
        basis[m] = w / nb
        m += 1
        w = matvec(basis[m - 1])
    evals, evecs = scipy.linalg.eigh_tridiagonal(alphas, betas[: len(alphas) - 1])
    x = evecs[:, 0] @ basis[: len(alphas)]
    x /= np.linalg.norm(x)
    return float(evals[0]), x


def _lanczos_ground(
    hamiltonian: PauliSum,
    seed: int,
    krylov: int,
    restarts: int,
    tol: float,
    ortho_against=(),
):
    n = hamiltonian.n_qubits
    dim = 1 << n
    real = is_real_hamiltonian(hamiltonian)
    matvec = _matvec_builder(hamiltonian, real)
    itemsize = 8 if real else 16
    krylov = max(4, min(krylov, _KRYLOV_BYTES_BUDGET // (dim * itemsize)))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    if not real:
        v = v + 1j * rng.standard_normal(dim)
    v = v.astype(np.float64 if real else np.complex128)
    e = res = np.inf
    for _ in range(restarts):
        e, v = _lanczos_lowest(matvec, v, krylov, ortho_against)
        res = float(np.linalg.norm(matvec(v) - e * v))
        if res <= tol:
            return e, v, res, True
    return e, v, res, False


def ground_state(
    hamiltonian: PauliSum,
    want_vector: bool = False,
    method: str = "auto",
    seed: int = 7,
    krylov: int = 200,
    restarts: int = 60,
    tol: float = 1e-9,
    want_degeneracy: bool = False,
    max_degeneracy: int = 4,
) -> EDResult:
    n = hamiltonian.n_qubits
    if method not in ("auto", "dense", "lanczos"):
        raise ValueError(f"unknown ED method {method!r}")
    if method == "auto":
        method = "dense" if n <= DENSE_AUTO_SWITCH else "lanczos"
    if method == "lanczos" and n > LANCZOS_QUBIT_CAP:
        raise sv.ResourceCapError(f"{n} qubits exceeds the {LANCZOS_QUBIT_CAP}-qubit Lanczos cap")

    if method == "dense":
        mat = hamiltonian_matrix(hamiltonian)
        k_top = max_degeneracy if want_degeneracy else 0
        evals, evecs = scipy.linalg.eigh(
            mat, subset_by_index=[0, min(k_top, mat.shape[0] - 1)]
        )
        e0 = float(evals[0])
        vec = np.ascontiguousarray(evecs[:, 0].astype(np.complex128))
        residual = float(np.linalg.norm(mat @ evecs[:, 0] - e0 * evecs[:, 0]))
        degeneracy = None
        if want_degeneracy:
            degeneracy = int(np.sum(evals <= e0 + _DEGENERACY_TOL))
        return EDResult(e0, residual, "dense", True, degeneracy, vec if want_vector else None)

    e0, v, res, converged = _lanczos_ground(hamiltonian, seed, krylov, restarts, tol)
    degeneracy = None
    if want_degeneracy and converged:
        degeneracy = 1
        found = [v]
        for _ in range(max_degeneracy - 1):
            try:
                ek, vk, rk, ck = _lanczos_ground(
                    hamiltonian, seed + len(found), krylov, restarts, tol,
                    ortho_against=tuple(found),
                )
            except np.linalg.LinAlgError:
                break
            if not ck or ek > e0 + _DEGENERACY_TOL:
                break
            degeneracy += 1
            found.append(vk)
    vec = None
    if want_vector:
        vec = v if np.iscomplexobj(v) else v.astype(np.complex128)
    return EDResult(e0, res, "lanczos", converged, degeneracy, vec)
