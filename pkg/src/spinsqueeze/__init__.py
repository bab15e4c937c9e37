"""Quench dynamics and squeezing analysis for dipolar XY spin arrays.

Conventions used across the package: energies are frequencies in MHz (E/h),
times are in microseconds, propagators apply exp(-i 2 pi H t), basis index
bit i holds site i with bit value 1 meaning spin up.
"""
from .engine import KrylovParams, PropagationError, evolve, evolve_dense_oracle
from .errors import (
    ErrorModel,
    apply_stirap_holes,
    detection_forward_moments,
    detection_forward_shots,
    detection_inverse,
)
from .lattice import (
    CouplingMatrix,
    LatticeError,
    LatticeSpec,
    build_lattice,
    coupling_matrix,
    lattice_coupling,
    twisting_rate,
)
from .measurement import (
    MomentSummary,
    ShotSet,
    SqueezingRecord,
    moment_summary,
    sample_shots,
    shot_statistics,
    sm_depth_bound,
    squeezing_record,
    theta_star,
    var_along,
)
from .operators import (
    Hamiltonian,
    apply_hamiltonian,
    collective_expectations,
    heisenberg_hamiltonian,
    oat_hamiltonian,
    xy_hamiltonian,
    zz_hamiltonian,
)
from .protocols import (
    FinitePulse,
    FreeEvolution,
    ProtocolSchedule,
    Pulse,
    apply_pulse,
    prepare_coherent_y,
    run_schedule,
    wahuha_average_hamiltonian,
    wahuha_cycle,
)
from .rotor import (
    DickeState,
    coherent_y_dicke,
    dicke_moments,
    oat_evolve,
    oat_squeezing_curve,
    rotor_magnetization,
)
from .semiclassical import ClassicalEnsemble, sc_evolve, sc_initial, sc_rotate, sc_squeezing

__version__ = "0.1.0"
