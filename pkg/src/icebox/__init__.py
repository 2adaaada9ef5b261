"""Matrix-free spin dynamics for ground-state search by coherent bath cooling."""

__version__ = "0.1.0"

from .basis import (
    BATH,
    COMPOSITE,
    EFFECTIVE4,
    SYSTEM,
    SystemDims,
    hamming_distance,
    xor_parity,
)
from .states import (
    StateVector,
    apply_pauli,
    basis_state,
    composite_basis_state,
    uniform_over_system,
    uniform_state,
)
from .operators import (
    OperatorSpec,
    RadialModel,
    SubspaceProblem,
    build_effective_4x4,
    build_local_interaction,
    build_local_model,
    build_nonlocal_interaction,
    build_nonlocal_model,
    build_projector_hamiltonians,
    build_radial_tridiagonal,
    build_reduced_hamiltonian,
    build_toy_model,
    build_xxx_bath,
    interaction_strength,
)
from .dynamics import (
    PropagatorConfig,
    SpectrumResult,
    TimeSeries,
    audit_evolution,
    evolve,
    fourier_spectrum,
    ground_state_probability,
    local_magnetization,
    magnetization_profile,
)
from .analytics import (
    EffectiveBasis,
    GroverReport,
    IterationSolution,
    SpinWaveSetup,
    effective_eigensystem,
    evolve_effective,
    grover_equivalence,
    magnon_mode_amplitudes,
    mean_search_time,
    nonlocal_frequency,
    nonlocal_ground_probability,
    nonlocal_wavefunction,
    project_effective,
    spinwave_perturbative,
    toy_model_spinwave,
    wavepacket_iteration,
)
from .subspace import (
    GapResult,
    ScalingFit,
    ShellProfile,
    block_embed,
    block_project,
    decompose_initial_state,
    fit_scaling,
    scaling_study,
    shell_profile,
    subspace_gap,
    well_packets,
)
from .errors import (
    CapacityError,
    DomainError,
    IceboxError,
    NumericalError,
    UnsupportedInputError,
    UsageError,
)
