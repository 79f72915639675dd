"""Autonomous Bell-state stabilization of two qubits through a lossy cavity.

The modules mirror the workflow: ``hilbert`` builds operators, ``model``
holds parameters and the rotating-frame generator, ``solver`` integrates the
master equation, ``analysis`` turns states into numbers, ``tomography`` and
``readout`` simulate the measurement chain, and ``harness`` drives it all
from a JSON config (also reachable as ``python -m bellstab``).
"""
from .analysis import (
    ErrorBudget,
    ExponentialFit,
    FitError,
    PauliVector,
    basis_weights,
    bell_diagonal_state,
    concurrence,
    error_budget,
    fidelity,
    fit_exponential,
    pauli_averages,
)
from .hilbert import HilbertSpace, annihilation, embed, expectation, kron, partial_trace_cavity
from .model import (
    PHI_MINUS,
    PHI_PLUS,
    CollapseChannel,
    DriveParams,
    LindbladModel,
    SystemParams,
    bell_projector,
    build_model,
    collapse_channels,
    epsilon_from_nbar,
    hamiltonian_at,
    initial_state,
    tphi_from_t1_t2,
    zeno_parameter,
)
from .readout import (
    Conditioned,
    Histogram,
    ReadoutModel,
    assignment_fidelity,
    condition_on_m1,
    fit_gaussian,
    histogram,
    overlap_fidelity,
    sample_outcomes,
)
from .solver import SolverError, SteadyState, Trajectory, evolve, free_decay, lindblad_rhs, steady_state
from .tomography import (
    DesignMatrix,
    build_design_matrix,
    clifford_suite,
    default_design,
    reconstruct,
    simulate_tomography,
)

__version__ = "0.1.0"
