"""Energy minimization: analytic parameter-shift gradients plus BFGS.

The gradient of a Pauli-rotation angle is the exact parameter-shift value

    dE/dtheta_j = sum_g (scale_g / 2) * [E(theta_eff_g + pi/2) - E(theta_eff_g - pi/2)]

summed over the gate occurrences g referencing parameter j.  The production
path evaluates the bracket through the algebraically identical commutator
form  E+ - E- = -2 Im <u_g| G |w_g>  (u_g: state up to and including g,
w_g: the observable back-propagated to just after g), which costs one
backward sweep instead of two fresh simulations per occurrence.  The literal
two-point form is kept as ``gradient_parameter_shift`` and pinned equal in
tests.

The quasi-Newton loop is BFGS with scipy's strong-Wolfe line search and an
inf-norm gradient stop.  The update loop is kept in-house for one reason:
warm-started coupling sweeps converge several times faster when the inverse
Hessian learned at the previous grid point seeds the next one, and scipy's
minimize() cannot be handed an initial H.  Identical contract otherwise:
``converged`` means the final gradient inf-norm is <= tol.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

try:  # scipy >= 1.8 keeps the Wolfe searches here; the public scipy.optimize
    # surface only exposes the python wolfe2 variant, which gives visibly
    # worse steps on ill-conditioned problems than the dcsrch-based wolfe1
    from scipy.optimize._linesearch import line_search_wolfe1, line_search_wolfe2
except ImportError:  # pragma: no cover
    from scipy.optimize.linesearch import line_search_wolfe1, line_search_wolfe2

from .pauli import PauliSum, PauliString
from .circuit import BoundCircuit, Circuit, PrepCircuit, bind
from .evaluator import (
    _apply_gate,
    _cone_parts,
    _undo_gate,
    build_state,
    expval,
    expval_heisenberg,
    pick_backend,
)
from . import statevector as sv
from .models import make_point


def energy(circuit: Circuit, hamiltonian: PauliSum, theta, backend: str = "auto") -> float:
    return expval(bind(circuit, theta), hamiltonian, backend)


def _angles_with(bound: BoundCircuit, gate_index: int, angle: float) -> BoundCircuit:
    angles = list(bound.angles)
    angles[gate_index] = angle
    return replace(bound, angles=tuple(angles))


def gradient_parameter_shift(
    circuit: Circuit, hamiltonian: PauliSum, theta, backend: str = "auto"
) -> np.ndarray:
    """Literal two-point rule, one pair of evaluations per gate occurrence."""
    bound = bind(circuit, theta)
    grad = np.zeros(circuit.n_params)
    for i, g in enumerate(circuit.gates):
        if g.kind != "rot":
            continue
        base = bound.angles[i]
        e_plus = expval(_angles_with(bound, i, base + np.pi / 2), hamiltonian, backend)
        e_minus = expval(_angles_with(bound, i, base - np.pi / 2), hamiltonian, backend)
        grad[g.param_ref] += 0.5 * g.scale * (e_plus - e_minus)
    return grad


def _grad_sweep(u: np.ndarray, w: np.ndarray, n: int, gates, angles, indices, grad, weight):
    """Shared backward sweep: accumulate -scale * Im<u|G|w> per rotation."""
    for k in range(len(gates) - 1, -1, -1):
        g = gates[k]
        angle = angles[indices[k]] if indices is not None else angles[k]
        if g.kind == "rot":
            gw = sv.apply_pauli(w, g.axis)
            grad[g.param_ref] += -weight * g.scale * np.vdot(u, gw).imag
        u = _undo_gate(u, n, g, angle)
        w = _undo_gate(w, n, g, angle)


def _energy_grad_full(circuit: Circuit, bound: BoundCircuit, hamiltonian: PauliSum):
    n = circuit.n_qubits
    psi = build_state(bound)
    w = sv.apply_sum(psi, hamiltonian)
    e = float(np.vdot(psi, w).real)
    grad = np.zeros(circuit.n_params)
    _grad_sweep(psi, w, n, circuit.gates, bound.angles, None, grad, 1.0)
    return e, grad


def _energy_grad_cone(circuit: Circuit, bound: BoundCircuit, hamiltonian: PauliSum):
    if not isinstance(circuit.prep, PrepCircuit):
        raise ValueError("cone gradients need a Clifford-prefix prep")
    e = 0.0
    grad = np.zeros(circuit.n_params)
    for coeff, p in hamiltonian:
        cone, local, frozen = _cone_parts(circuit, p.support_mask())
        n_loc = local.n_qubits
        v = frozen.copy()
        for idx, g in zip(cone.retained_gates, local.gates):
            v = _apply_gate(v, n_loc, g, bound.angles[idx])
        w = sv.apply_pauli(v, p.restrict(cone.cone_qubits))
        e += coeff * float(np.vdot(v, w).real)
        _grad_sweep(v, w, n_loc, local.gates, bound.angles, cone.retained_gates, grad, coeff)
    return e, grad


def energy_and_gradient(
    circuit: Circuit, hamiltonian: PauliSum, theta, backend: str = "auto"
) -> tuple[float, np.ndarray]:
    chosen = pick_backend(circuit, backend)
    bound = bind(circuit, theta)
    if chosen == "full":
        return _energy_grad_full(circuit, bound, hamiltonian)
    if chosen == "cone":
        return _energy_grad_cone(circuit, bound, hamiltonian)
    e = expval_heisenberg(bound, hamiltonian)
    return e, gradient_parameter_shift(circuit, hamiltonian, theta, "heisenberg")


def gradient(circuit: Circuit, hamiltonian: PauliSum, theta, backend: str = "auto") -> np.ndarray:
    return energy_and_gradient(circuit, hamiltonian, theta, backend)[1]


@dataclass(frozen=True)
class OptResult:
    theta_opt: tuple[float, ...]
    energy: float
    grad_norm: float
    iterations: int
    n_evals: int
    converged: bool
    wall_time: float = field(compare=False)


def _bfgs_core(fun, x0, tol, max_iter, h0=None):
    """BFGS on fun(x) -> (f, grad).  Returns
    (x_best, f_best, g_best, nit, nfev, converged, H).

    h0 seeds the inverse-Hessian approximation (identity when None).  No
    first-step rescaling: it wrecks the usual quasi-Newton behaviour on
    ill-conditioned problems (measured 5x more iterations on a kappa=1e4
    quadratic).  On a line-search failure the approximation is reset to
    identity once; a second failure stops with converged=False at the best
    iterate seen.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    nfev = 0

    def call(xv):
        nonlocal nfev
        nfev += 1
        f, g = fun(xv)
        return float(f), np.asarray(g, dtype=float)

    f, g = call(x)
    best = (x.copy(), f, g.copy())
    if np.max(np.abs(g)) <= tol:
        H = np.eye(n) if h0 is None else np.array(h0, dtype=float)
        return best[0], best[1], best[2], 0, nfev, True, H

    H = np.eye(n) if h0 is None else np.array(h0, dtype=float)
    f_prev = None
    nit = 0
    reset_used = False
    while nit < max_iter:
        p = -(H @ g)
        seen: dict[bytes, tuple[float, np.ndarray]] = {}

        def f_only(xv):
            key = xv.tobytes()
            if key not in seen:
                seen[key] = call(xv)
            return seen[key][0]

        def g_only(xv):
            key = xv.tobytes()
            if key not in seen:
                seen[key] = call(xv)
            return seen[key][1]

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            # amin/amax widened as in scipy's own BFGS driver; the defaults
            # clamp the step to [1e-8, 50] and stall rescaled descent
            alpha = line_search_wolfe1(
                f_only, g_only, x, p, g, f, f_prev, amin=1e-100, amax=1e100
            )[0]
            if alpha is None:
                alpha = line_search_wolfe2(f_only, g_only, x, p, g, f, f_prev)[0]
        if alpha is None:
            if not reset_used:
                # stale curvature from a carried-in H; retry from scratch
                H = np.eye(n)
                reset_used = True
                continue
            break
        x_new = x + alpha * p
        hit = seen.get(x_new.tobytes())
        f_new, g_new = hit if hit is not None else call(x_new)
        nit += 1
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            Hy = H @ y
            H += ((sy + float(y @ Hy)) / sy**2) * np.outer(s, s)
            H -= (np.outer(Hy, s) + np.outer(s, Hy)) / sy
        f_prev, x, f, g = f, x_new, f_new, g_new
        if f < best[1]:
            best = (x.copy(), f, g.copy())
        if np.max(np.abs(g)) <= tol:
            return best[0], best[1], best[2], nit, nfev, True, H
    return best[0], best[1], best[2], nit, nfev, False, H


def _minimize_with_memory(
    circuit: Circuit,
    hamiltonian: PauliSum,
    theta0,
    backend: str = "auto",
    tol: float = 1e-6,
    max_iter: int = 500,
    h0: np.ndarray | None = None,
) -> tuple[OptResult, np.ndarray | None]:
    """minimize_bfgs plus the final inverse-Hessian, for warm-chained sweeps."""
    t0 = time.perf_counter()
    theta0 = np.asarray(theta0, dtype=float)
    if circuit.n_params == 0:
        e = energy(circuit, hamiltonian, theta0, backend)
        return OptResult((), e, 0.0, 0, 1, True, time.perf_counter() - t0), None

    def objective(theta):
        return energy_and_gradient(circuit, hamiltonian, theta, backend)

    x, f, g, nit, nfev, converged, H = _bfgs_core(objective, theta0, tol, max_iter, h0)
    result = OptResult(
        tuple(float(t) for t in x),
        float(f),
        float(np.max(np.abs(g))),
        nit,
        nfev,
        converged,
        time.perf_counter() - t0,
    )
    return result, H


def minimize_bfgs(
    circuit: Circuit,
    hamiltonian: PauliSum,
    theta0,
    backend: str = "auto",
    tol: float = 1e-6,
    max_iter: int = 500,
) -> OptResult:
    """BFGS with analytic gradients.  ``converged`` means the inf-norm of the
    gradient at the returned point is <= tol; on line-search failure or the
    iteration cap the best iterate found is returned with converged=False."""
    return _minimize_with_memory(circuit, hamiltonian, theta0, backend, tol, max_iter)[0]


@dataclass(frozen=True)
class SweepRecord:
    model: str
    size: int
    depth: int
    coupling: float
    energy: float
    theta_opt: tuple[float, ...]
    grad_norm: float
    iterations: int
    n_evals: int
    converged: bool
    backend: str
    seed: int
    wall_time: float = field(compare=False)


def coupling_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    if step <= 0:
        raise ValueError(f"grid step must be > 0, got {step}")
    count = int(round((stop - start) / step))
    grid = tuple(round(start + k * step, 12) for k in range(count + 1))
    if not grid or grid[-1] > stop + 1e-9:
        raise ValueError(f"empty or inconsistent grid [{start}, {stop}] step {step}")
    return grid


# The identity point theta = 0 prepares the exact stabilizer ground state of
# the coupling-free Hamiltonian part, and it stays a stationary point of the
# energy at EVERY coupling (all first-order parameter-shift brackets are
# expectations of Paulis outside the stabilizer group, hence exactly zero).
# A plain zeros/warm start therefore never moves.  When BFGS accepts a start
# without taking a step away from such a point, we probe seeded perturbations
# with a cheap loose-tolerance run each and polish only the best basin found.
_ESCAPE_SCALES = (0.05, 0.1, 0.2)
_ESCAPE_TOL = 1e-3
_ESCAPE_MAX_ITER = 80


def _optimize_point(
    circuit: Circuit,
    hamiltonian: PauliSum,
    starts: list[np.ndarray],
    backend: str,
    tol: float,
    max_iter: int,
    rng_key: tuple[int, ...],
    escape: bool,
    h0: np.ndarray | None = None,
) -> tuple[OptResult, np.ndarray | None]:
    """Best result over the given starts; h0 (inverse-Hessian carried from a
    neighbouring point) applies to the first start only, which is the one the
    warm chain supplies."""
    best: OptResult | None = None
    best_h: np.ndarray | None = None
    for k, s in enumerate(starts):
        r, h = _minimize_with_memory(
            circuit, hamiltonian, s, backend, tol, max_iter, h0=h0 if k == 0 else None
        )
        if best is None or r.energy < best.energy:
            best, best_h = r, h
        if escape and k == 0 and r.iterations == 0 and circuit.n_params > 0:
            rng = np.random.default_rng(rng_key)
            probe: OptResult | None = None
            probe_h: np.ndarray | None = None
            for scale in _ESCAPE_SCALES:
                s2 = s + rng.normal(scale=scale, size=circuit.n_params)
                r2, h2 = _minimize_with_memory(
                    circuit, hamiltonian, s2, backend,
                    max(tol, _ESCAPE_TOL), min(max_iter, _ESCAPE_MAX_ITER),
                )
                if probe is None or r2.energy < probe.energy:
                    probe, probe_h = r2, h2
                if r2.energy < r.energy - 1e-9:
                    break
            if probe is not None and probe.energy < r.energy:
                polished, hp = _minimize_with_memory(
                    circuit, hamiltonian, np.asarray(probe.theta_opt), backend,
                    tol, max_iter, h0=probe_h,
                )
                if polished.energy < best.energy:
                    best, best_h = polished, hp
    return best, best_h


def _sweep_pass(
    model, size, depth, couplings, order, backend, warm_start, seed, tol, max_iter,
    extra_inits, trace=None,
):
    results: dict[int, OptResult] = {}
    prev: np.ndarray | None = None
    prev_h: np.ndarray | None = None
    for pos, i in enumerate(order):
        g = couplings[i]
        point = make_point(model, size, depth, g)
        n_params = point.circuit.n_params
        warm = warm_start and prev is not None
        starts = [prev.copy() if warm else np.zeros(n_params)]
        if extra_inits is not None:
            starts += [np.asarray(s, dtype=float) for s in extra_inits(g, i)]
        r, h = _optimize_point(
            point.circuit, point.hamiltonian, starts, backend, tol, max_iter,
            rng_key=(seed, order[0], i), escape=True,
            h0=prev_h if warm else None,
        )
        results[i] = r
        prev, prev_h = np.asarray(r.theta_opt), h
        if trace is not None:
            trace(g, r)
    return results


def sweep(
    model: str,
    size: int,
    depth: int,
    couplings,
    backend: str = "auto",
    warm_start: bool = True,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 500,
    extra_inits=None,
    progress=None,
    bidirectional: bool = True,
    trace=None,
) -> list[SweepRecord]:
    """Optimize the model at each coupling.

    Forward pass warm-starts each point from the previous optimum (first
    point from theta = 0, exact at zero coupling).  Any point whose start is
    accepted without a step (the theta = 0 stall, or a converged warm start)
    gets the seeded-perturbation escape.  With ``bidirectional`` a second
    pass runs the grid in reverse (anchored at the far end, where the escape
    supplies the starting basin) and the lower energy per point wins; this
    removes the hysteresis a single warm-started pass shows around a phase
    transition.  ``extra_inits(coupling, i)`` may supply additional starting
    vectors per point.  Deterministic for a fixed seed.
    """
    couplings = [float(g) for g in couplings]
    idx = list(range(len(couplings)))
    fwd = _sweep_pass(
        model, size, depth, couplings, idx, backend, warm_start, seed, tol,
        max_iter, extra_inits, trace=trace,
    )
    merged = dict(fwd)
    if bidirectional and len(couplings) > 1 and warm_start:
        bwd = _sweep_pass(
            model, size, depth, couplings, idx[::-1], backend, warm_start, seed,
            tol, max_iter, extra_inits, trace=trace,
        )
        for i in idx:
            if bwd[i].energy < merged[i].energy:
                merged[i] = bwd[i]
    records = []
    for i in idx:
        r = merged[i]
        records.append(
            SweepRecord(
                model, size, depth, couplings[i], r.energy, r.theta_opt,
                r.grad_norm, r.iterations, r.n_evals, r.converged,
                backend, seed, r.wall_time,
            )
        )
        if progress is not None:
            progress(records[-1])
    return records
