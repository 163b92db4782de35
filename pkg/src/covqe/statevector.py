"""Dense statevector kernels used by the evaluator, tableau, and ED modules.

Amplitude layout is little-endian: bit i of the amplitude index is the state
of qubit i.  States are numpy complex128 arrays of length 2**n.  The hard cap
of 25 qubits keeps a single vector within ~0.5 GB.

Mutation contract: the gate-application kernels (apply_rotation, apply_h,
apply_s, apply_cz, apply_cnot) consume their input -- some paths mutate it in
place, others return a fresh array.  Always rebind to the return value and
copy first if the old state is still needed.  Pure queries (expectations,
sampling) never mutate.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString, PauliSum

FULL_STATE_QUBIT_CAP = 25

_INDEX_CACHE: dict[int, np.ndarray] = {}
_INDEX_CACHE_MAX_N = 20  # cache index arrays up to 1M entries; larger rebuilt per call


class ResourceCapError(RuntimeError):
    """A computation exceeded a configured resource cap."""


def _indices(n: int) -> np.ndarray:
    if n <= _INDEX_CACHE_MAX_N:
        arr = _INDEX_CACHE.get(n)
        if arr is None:
            arr = np.arange(1 << n, dtype=np.uint32)
            _INDEX_CACHE[n] = arr
        return arr
    return np.arange(1 << n, dtype=np.uint32)


def _check_cap(n: int) -> None:
    if n > FULL_STATE_QUBIT_CAP:
        raise ResourceCapError(
            f"statevector for {n} qubits exceeds the {FULL_STATE_QUBIT_CAP}-qubit cap"
        )


def zero_state(n: int) -> np.ndarray:
    _check_cap(n)
    v = np.zeros(1 << n, dtype=np.complex128)
    v[0] = 1.0
    return v


def _parity_of(masked: np.ndarray) -> np.ndarray:
    """Popcount parity per element (uint32 input)."""
    m = masked.copy()
    m ^= m >> np.uint32(16)
    m ^= m >> np.uint32(8)
    m ^= m >> np.uint32(4)
    m ^= m >> np.uint32(2)
    m ^= m >> np.uint32(1)
    return m & np.uint32(1)


# the parity fold dominates gate cost on repeated masks (optimizer loops hit
# the same handful of axes thousands of times), so memoize the sign vectors;
# int8 keeps the cache small and bounded caching avoids blowup at large n
_SIGN_CACHE: dict[tuple[int, int], np.ndarray] = {}
_SIGN_CACHE_MAX_N = 18
_SIGN_CACHE_MAX_ENTRIES = 160


def _signs_for(n: int, mask: int) -> np.ndarray:
    """(-1)^parity(idx & mask) per amplitude index, int8."""
    key = (n, mask)
    arr = _SIGN_CACHE.get(key)
    if arr is None:
        par = _parity_of(_indices(n) & np.uint32(mask))
        arr = (1 - 2 * par.astype(np.int8)).astype(np.int8)
        arr.setflags(write=False)
        if n <= _SIGN_CACHE_MAX_N:
            if len(_SIGN_CACHE) >= _SIGN_CACHE_MAX_ENTRIES:
                _SIGN_CACHE.pop(next(iter(_SIGN_CACHE)))
            _SIGN_CACHE[key] = arr
    return arr


def apply_pauli_masks(
    v: np.ndarray, n: int, x_mask: int, z_mask: int, phase: complex = 1.0
) -> np.ndarray:
    """Return phase * P(x_mask, z_mask) |v> for the Hermitian letter product P."""
    front = phase * (1j) ** ((x_mask & z_mask).bit_count() % 4)
    if z_mask:
        w = front * _signs_for(n, z_mask) * v
    else:
        w = front * v
    if x_mask:
        out = np.empty_like(v)
        if x_mask & (x_mask - 1) == 0:
            # single flipped qubit: swap contiguous halves instead of the
            # index scatter (~3x faster, and this is the gate hot path)
            q = x_mask.bit_length() - 1
            hi, lo = 1 << (n - q - 1), 1 << q
            w3 = np.asarray(w).reshape(hi, 2, lo)
            o3 = out.reshape(hi, 2, lo)
            o3[:, 0, :] = w3[:, 1, :]
            o3[:, 1, :] = w3[:, 0, :]
            return out
        out[_indices(n) ^ np.uint32(x_mask)] = w
        return out
    return np.ascontiguousarray(w)


def apply_pauli(v: np.ndarray, p: PauliString) -> np.ndarray:
    return apply_pauli_masks(v, p.n_qubits, p.x_mask, p.z_mask, p.phase)


def apply_rotation(v: np.ndarray, n: int, axis: PauliString, theta_eff: float) -> np.ndarray:
    """In-place-ish exp(-i * theta_eff / 2 * axis) |v>; returns the new array."""
    half = 0.5 * theta_eff
    if axis.x_mask == 0:
        # diagonal axis: pure phases exp(-i*half*s) with s = +-1 per amplitude
        signs = _signs_for(n, axis.z_mask)
        v *= np.cos(half) - (1j * np.sin(half)) * signs
        return v
    pv = apply_pauli(v, axis)
    pv *= -1j * np.sin(half)
    pv += np.cos(half) * v
    return pv


def apply_h(v: np.ndarray, n: int, q: int) -> np.ndarray:
    w = v.reshape(1 << (n - q - 1), 2, 1 << q)
    a = w[:, 0, :].copy()
    b = w[:, 1, :]
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    w[:, 0, :] = (a + b) * inv_sqrt2
    w[:, 1, :] = (a - b) * inv_sqrt2
    return v

def apply_s(v: np.ndarray, n: int, q: int, dagger: bool = False) -> np.ndarray:
    w = v.reshape(1 << (n - q - 1), 2, 1 << q)
    w[:, 1, :] *= -1j if dagger else 1j
    return v


def apply_cz(v: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    hi, lo = (a, b) if a > b else (b, a)
    w = v.reshape(1 << (n - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    w[:, 1, :, 1, :] *= -1.0
    return v


def apply_cnot(v: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    hi, lo = (control, target) if control > target else (target, control)
    w = v.reshape(1 << (n - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if control > target:
        tmp = w[:, 1, :, 0, :].copy()
        w[:, 1, :, 0, :] = w[:, 1, :, 1, :]
        w[:, 1, :, 1, :] = tmp
    else:
        tmp = w[:, 0, :, 1, :].copy()
        w[:, 0, :, 1, :] = w[:, 1, :, 1, :]
        w[:, 1, :, 1, :] = tmp
    return v


def pauli_expectation(v: np.ndarray, p: PauliString) -> float:
    """<v|P|v>; imaginary part is discarded (P Hermitian up to stored phase)."""
    pv = apply_pauli(v, p)
    return float(np.vdot(v, pv).real)


def apply_sum(v: np.ndarray, H: PauliSum) -> np.ndarray:
    """H |v> accumulated term by term."""
    out = np.zeros_like(v)
    for coeff, p in H:
        out += coeff * apply_pauli(v, p)
    return out


def sum_expectation(v: np.ndarray, H: PauliSum) -> float:
    return float(np.vdot(v, apply_sum(v, H)).real)


def sample_bitstrings(v: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Sample ``shots`` basis-state indices from |v|^2."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = np.abs(v) ** 2
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    draws = rng.random(shots)
    idx = np.searchsorted(cdf, draws, side="right")
    return np.minimum(idx, len(v) - 1)


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """Normalize and fix the global phase: first non-negligible amplitude real positive."""
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("zero vector")
    v = v / norm
    cutoff = 1e-9 * np.max(np.abs(v))
    nz = np.flatnonzero(np.abs(v) > cutoff)
    amp = v[nz[0]]
    v *= np.conj(amp) / abs(amp)
    return v
