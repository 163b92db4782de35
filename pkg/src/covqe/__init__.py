"""covqe: classically optimized VQE for local spin Hamiltonians.

Shallow variational circuits are optimized entirely on a classical simulator
by exploiting causal-cone reduction of local observables; the full-state
simulator (optionally with shot noise) plays the role of the quantum device
for nonlocal order parameters, state fidelities, and phase classification.
"""

from .pauli import PauliString, PauliSum
from .tableau import Tableau
from .circuit import Circuit, Gate, PrepCircuit, PrepTableau, bind, inverse
from .lightcone import causal_cone, cone_profile, covqe_check
from .evaluator import expval, measure_pauli_sampled, ShotEstimate
from .models import make_point, omega_string, wilson_loop
from .optimize import minimize_bfgs, sweep, energy, gradient, OptResult, SweepRecord
from .ed import ground_state, EDResult
from .phase import fidelity_matrix, spectral_cluster, order_parameter_curve, overlap_sampled

__version__ = "0.1.0"

__all__ = [
    "PauliString", "PauliSum", "Tableau", "Circuit", "Gate", "PrepCircuit",
    "PrepTableau", "bind", "inverse", "causal_cone", "cone_profile",
    "covqe_check", "expval", "measure_pauli_sampled", "ShotEstimate",
    "make_point", "omega_string", "wilson_loop", "minimize_bfgs", "sweep",
    "energy", "gradient", "OptResult", "SweepRecord", "ground_state",
    "EDResult", "fidelity_matrix", "spectral_cluster",
    "order_parameter_curve", "overlap_sampled", "__version__",
]
