"""Simulator and analysis toolkit for a Rydberg-blocked atomic ensemble
collectively coupled to a cavity mode via a two-photon transition."""

from .core import (
    FockLadderState,
    PhysicalParams,
    SingleExcState,
    angular,
    collective_coupling,
    load_config,
    params_from_config,
    params_to_config,
    parse_config,
    to_mhz,
)
from .dynamics import (
    Trajectory,
    effective_coupling,
    eom_adiabatic,
    eom_full,
    integrate,
)
from .gate import (
    ForsterModel,
    GateGeometry,
    GateQuantities,
    ScanAxis,
    ScanSpec,
    ScanTable,
    auto_two_photon_resonance,
    build_geometry,
    fidelity,
    forster_coupling,
    gate_quantities,
    reflection_blocked,
    reflection_unblocked,
    scan,
)
from .mcwf import (
    EnsembleResult,
    JumpEvent,
    JumpKind,
    ObservableTrace,
    apply_jump,
    coherent_ladder,
    ensemble_average,
    eom_fock,
    jump_probabilities,
    run_trajectory,
)
from .oracle import (
    FullSystemSpec,
    build_gate_hamiltonian,
    build_hamiltonian,
    evolve_dense,
    lindblad_evolve,
    run_oracle_checks,
)

__version__ = "0.1.0"
