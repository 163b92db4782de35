"""Gradients pinned to analytic values and finite differences; BFGS behaviour
on known landscapes; sweep determinism and stall escape."""

import numpy as np
import pytest

from covqe.pauli import PauliString, PauliSum
from covqe.circuit import Circuit, Gate, PrepCircuit
from covqe.ed import ground_state
from covqe.models import make_point
from covqe.optimize import (
    OptResult,
    _bfgs_core,
    _minimize_with_memory,
    coupling_grid,
    energy,
    energy_and_gradient,
    gradient,
    gradient_parameter_shift,
    minimize_bfgs,
    sweep,
)

import oracles as oc


def _rx_problem():
    x0 = PauliString.from_ops(1, {0: "X"})
    c = Circuit(1, (Gate.rot(x0, 0),), 1, PrepCircuit())
    h = PauliSum(1, [(1.0, PauliString.from_ops(1, {0: "Z"}))])
    return c, h


def test_single_rotation_analytic():
    # RX(t) on |0>: <Z> = cos t, d<Z>/dt = -sin t
    c, h = _rx_problem()
    for t in (-1.3, 0.0, 0.4, 2.2):
        for backend in ("full", "cone", "heisenberg"):
            assert energy(c, h, [t], backend) == pytest.approx(np.cos(t), abs=1e-12)
            g = gradient(c, h, [t], backend)
            assert g[0] == pytest.approx(-np.sin(t), abs=1e-10)


def test_gradient_matches_parameter_shift_and_fd():
    rng = np.random.default_rng(71)
    for trial in range(12):
        n = int(rng.integers(2, 5))
        tab = bool(rng.random() < 0.25)
        c = oc.random_circuit(rng, n, depth=2, max_rotations=6, with_tableau_prep=tab)
        if c.n_params == 0:
            continue
        h = oc.random_sum(rng, n, 4, max_weight=2)
        theta = rng.normal(size=c.n_params)
        backends = ["full", "heisenberg"] + ([] if tab else ["cone"])
        shift = gradient_parameter_shift(c, h, theta, "full")
        eps = 1e-5
        fd = np.zeros(c.n_params)
        for j in range(c.n_params):
            tp, tm = theta.copy(), theta.copy()
            tp[j] += eps
            tm[j] -= eps
            fd[j] = (energy(c, h, tp, "full") - energy(c, h, tm, "full")) / (2 * eps)
        for backend in backends:
            g = gradient(c, h, theta, backend)
            assert np.abs(g - shift).max() < 1e-8, backend
            assert np.abs(g - fd).max() < 1e-6, backend


def test_shared_parameter_accumulation():
    # two gates referencing the same parameter with different scales: the
    # chain rule sums scale-weighted shift brackets
    x0 = PauliString.from_ops(2, {0: "X"})
    x1 = PauliString.from_ops(2, {1: "X"})
    c = Circuit(2, (Gate.rot(x0, 0, 1.0), Gate.rot(x1, 0, -0.5)), 1, PrepCircuit())
    h = PauliSum(2, [(1.0, PauliString.from_ops(2, {0: "Z"})),
                     (1.0, PauliString.from_ops(2, {1: "Z"}))])
    t = 0.7
    # E = cos t + cos(t/2); dE = -sin t - 0.5 sin(-0.5 t) * (-1) ... do it by FD
    eps = 1e-6
    fd = (energy(c, h, [t + eps]) - energy(c, h, [t - eps])) / (2 * eps)
    assert gradient(c, h, [t])[0] == pytest.approx(fd, abs=1e-7)
    assert gradient_parameter_shift(c, h, [t])[0] == pytest.approx(fd, abs=1e-7)


def test_identity_point_is_stationary():
    # theta = 0 keeps the prep stabilizer state; every shift bracket is the
    # expectation of a Pauli outside the stabilizer group, hence exactly zero
    for coupling in (0.0, 0.7, 2.0):
        pt = make_point("cluster", 8, 2, coupling)
        g = gradient(pt.circuit, pt.hamiltonian, np.zeros(pt.circuit.n_params))
        assert np.all(g == 0.0)
    r = minimize_bfgs(pt.circuit, pt.hamiltonian, np.zeros(pt.circuit.n_params))
    assert r.iterations == 0 and r.converged  # BFGS alone cannot leave it


def test_minimize_exact_on_single_rotation():
    c, h = _rx_problem()
    r = minimize_bfgs(c, h, [2.0])
    assert r.converged
    assert r.energy == pytest.approx(-1.0, abs=1e-10)
    assert abs(r.theta_opt[0] - np.pi) < 1e-5
    assert r.iterations < 20


def test_minimize_result_consistency():
    pt = make_point("cluster", 6, 2, 0.5)
    ed = ground_state(pt.hamiltonian).e0
    rng = np.random.default_rng(72)
    r = minimize_bfgs(pt.circuit, pt.hamiltonian, rng.normal(scale=0.2, size=pt.circuit.n_params))
    assert r.converged and r.grad_norm <= 1e-6
    assert r.energy >= ed - 1e-9  # variational bound
    # the stored energy and gradient norm are reproducible from the angles
    assert energy(pt.circuit, pt.hamiltonian, np.asarray(r.theta_opt)) == pytest.approx(
        r.energy, abs=1e-12
    )
    assert np.abs(gradient(pt.circuit, pt.hamiltonian, np.asarray(r.theta_opt))).max() <= 1e-6


def test_zero_parameter_circuit():
    pt = make_point("cluster", 5, 0, 0.3)
    r = minimize_bfgs(pt.circuit, pt.hamiltonian, np.zeros(0))
    assert r.converged and r.iterations == 0 and r.theta_opt == ()
    assert r.energy == pytest.approx(-3.0, abs=1e-12)


def test_bfgs_core_quadratic():
    # convex quadratic with condition number 1e4: full-memory BFGS should
    # land well under the dimension-squared budget and match the true minimum
    rng = np.random.default_rng(73)
    n = 12
    q = np.linalg.qr(rng.normal(size=(n, n)))[0]
    a = q @ np.diag(np.geomspace(1.0, 1e4, n)) @ q.T
    b = rng.normal(size=n)
    xstar = np.linalg.solve(a, -b)

    def fun(x):
        return 0.5 * x @ a @ x + b @ x, a @ x + b

    x, f, g, nit, nfev, conv, h = _bfgs_core(fun, np.zeros(n), 1e-8, 400)
    assert conv
    assert nit < 8 * n
    assert np.abs(x - xstar).max() < 1e-6
    # the returned inverse Hessian approximates a^-1 along the visited space
    assert np.abs(h @ a - np.eye(n)).max() < 1.0


def test_bfgs_inverse_hessian_carry():
    # re-solving a shifted copy of the same quadratic with the learned H
    # should take far fewer iterations than restarting from identity
    rng = np.random.default_rng(74)
    n = 10
    q = np.linalg.qr(rng.normal(size=(n, n)))[0]
    a = q @ np.diag(np.geomspace(1.0, 1e3, n)) @ q.T

    def make(b):
        def fun(x):
            return 0.5 * x @ a @ x + b @ x, a @ x + b
        return fun

    b1, b2 = rng.normal(size=n), rng.normal(size=n)
    x1, _, _, nit1, _, _, h1 = _bfgs_core(make(b1), np.zeros(n), 1e-7, 400)
    _, _, _, nit_cold, _, conv_cold, _ = _bfgs_core(make(b2), x1, 1e-7, 400)
    _, _, _, nit_warm, _, conv_warm, _ = _bfgs_core(make(b2), x1, 1e-7, 400, h0=h1)
    assert conv_cold and conv_warm
    assert nit_warm < nit_cold / 2


def test_coupling_grid():
    assert coupling_grid(0.0, 2.0, 0.5) == (0.0, 0.5, 1.0, 1.5, 2.0)
    assert coupling_grid(0.0, 0.5, 0.05)[3] == 0.15  # no float drift
    assert coupling_grid(1.0, 1.0, 0.1) == (1.0,)
    with pytest.raises(ValueError):
        coupling_grid(0.0, 1.0, 0.0)


def test_sweep_deterministic_and_escapes_stall():
    grid = (0.0, 0.2, 0.4)
    kw = dict(backend="full", seed=3, tol=1e-6, max_iter=300)
    recs1 = sweep("cluster", 6, 2, grid, **kw)
    recs2 = sweep("cluster", 6, 2, grid, **kw)
    assert recs1 == recs2  # bit-identical angles, energies, counters
    ed = ground_state(make_point("cluster", 6, 2, 0.4).hamiltonian).e0
    r = recs1[-1]
    assert r.energy >= ed - 1e-9
    # -4.2394875 is this instance's variational floor (established by a
    # 40-start multistart at scales 0.3/0.7/1.2; depth 2 at this size cannot
    # get closer to the exact -4.5061).  The warm chain must reach that
    # basin, not just leave the theta=0 stall at -4.
    assert r.energy < -4.2394874
    assert recs1[0].energy == pytest.approx(-4.0, abs=1e-12)


def test_sweep_rejects_unknown_model():
    with pytest.raises(ValueError):
        sweep("ising", 6, 2, (0.1,))
