"""Pulse-level simulator of Grover search on an Ising-coupled spin chain."""

__version__ = "0.1.0"

from .engines import (
    AmbiguousCarrierError,
    EngineKind,
    IntegrationError,
    Trajectory,
    basis_vector,
    evolve_exact,
    evolve_near_resonant,
    evolve_resonant_only,
    ground_state,
    run_program,
)
from .experiments import (
    DegenerateDataError,
    EnsembleResult,
    FitError,
    FitResult,
    eval_decay_model,
    fidelity,
    fit_decay,
    mixed_fidelity,
    reference_trajectory,
    run_ensemble,
    subensemble_error,
    sweep_amplitudes,
)
from .grover_compiler import (
    AmbiguousOracleError,
    RegisterLayout,
    compile_grover,
    compile_hadamard,
    compile_oracle,
    compile_s0,
    grover_steps,
)
from .noise_model import (
    NoiseRealization,
    NoiseSpec,
    RejectedSampleError,
    apply_larmor_noise,
    apply_rabi_noise,
    sample_realization,
)
from .pulse_kernel import (
    GateMarker,
    Pulse,
    PulseProgram,
    detuned_block,
    make_pulse,
    phase_time_unit,
    pulse_duration,
    rabi_for_2pik,
    resonant_rotation,
)
from .spin_model import (
    BasisState,
    SpinSystem,
    TransitionLabel,
    diagonal_energy,
    first_neighbors,
    second_neighbors,
    transition_context,
    transition_frequency,
    valid_contexts,
    validate_spectrum,
)
from .config import ConfigError, RunConfig, load_config, parse_config

__all__ = [
    "AmbiguousCarrierError",
    "AmbiguousOracleError",
    "BasisState",
    "ConfigError",
    "DegenerateDataError",
    "EngineKind",
    "EnsembleResult",
    "FitError",
    "FitResult",
    "GateMarker",
    "IntegrationError",
    "NoiseRealization",
    "NoiseSpec",
    "Pulse",
    "PulseProgram",
    "RegisterLayout",
    "RejectedSampleError",
    "RunConfig",
    "SpinSystem",
    "Trajectory",
    "TransitionLabel",
    "apply_larmor_noise",
    "apply_rabi_noise",
    "basis_vector",
    "compile_grover",
    "compile_hadamard",
    "compile_oracle",
    "compile_s0",
    "detuned_block",
    "diagonal_energy",
    "eval_decay_model",
    "evolve_exact",
    "evolve_near_resonant",
    "evolve_resonant_only",
    "fidelity",
    "first_neighbors",
    "fit_decay",
    "grover_steps",
    "ground_state",
    "load_config",
    "make_pulse",
    "mixed_fidelity",
    "parse_config",
    "phase_time_unit",
    "pulse_duration",
    "rabi_for_2pik",
    "reference_trajectory",
    "resonant_rotation",
    "run_ensemble",
    "run_program",
    "sample_realization",
    "second_neighbors",
    "subensemble_error",
    "sweep_amplitudes",
    "transition_context",
    "transition_frequency",
    "valid_contexts",
    "validate_spectrum",
]
