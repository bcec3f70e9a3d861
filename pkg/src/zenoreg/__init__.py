"""Measurement-stabilized initialization of a unit-filled atomic register.

Physical parameter derivation, restricted-basis open-system dynamics under
continuous pair measurement, closed-form fidelity laws, and an exact
Bose-Hubbard oracle for small lattices.
"""

from .analytics import (
    PreparationStats,
    free_evolution_fidelity,
    perturbative_ground_energy,
    preparation_stats,
    time_averaged_infidelity,
)
from .dynamics import (
    BlochSeries,
    BlochState,
    EnsembleResult,
    IntegrationError,
    ReducedDensityState,
    RMESeries,
    TrajectorySeries,
    bloch_evolution,
    collective_coupling,
    evolve,
    finite_efficiency_fidelity,
    ground_reduced_density,
    jump_ensemble,
    nonselective_fidelity_closed,
    null_trajectory,
    reduced_master_equation,
    zeno_decay_rate,
)
from .oracle import (
    FockBasis,
    build_bose_hubbard,
    double_occupancy_basis,
    double_occupancy_evolve,
    exact_evolve_fidelity,
    exact_ground_state,
    fock_basis,
)
from .params import (
    DerivedParams,
    ParameterError,
    PhysicalConfig,
    RegimeReport,
    derive_params,
    hole_leak_log,
    hole_leak_probability,
    onsite_interaction_hz,
    reference_config,
    parse_config_text,
    read_config,
    recoil_energy_hz,
    regime_check,
    trap_energy_scale_hz,
    tunneling_rate_hz,
)
from .register import (
    ModelError,
    RestrictedBasis,
    SparseOperator,
    StateVector,
    build_basis,
    build_effective_hamiltonian,
    build_eliminated_hamiltonian,
    build_free_hamiltonian,
    build_interaction_hamiltonian,
    coherence_damping_rate,
    fidelity,
    pair_state_energy,
    perturbative_ground_state,
)

__version__ = "0.1.0"
