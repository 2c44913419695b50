"""Geometric phases of quantum paths and the decoherence functional of histories."""

__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    DensityMatrix,
    HilbertError,
    Projector,
    Ray,
    StateVector,
    UnitaryMatrix,
    fs_distance,
    geodesic_interpolate,
    inner_product,
    normalize,
    orthonormal_basis_of,
    projector_from_ray,
)
from .geometry import (  # noqa: E402
    DiscretePath,
    PhaseResult,
    connection_integral,
    convergence_study,
    geometric_phase_open,
    loop_holonomy,
    pancharatnam_product,
    refine_path,
)
from .dynamics import (  # noqa: E402
    PropagatorTable,
    TimeDependentHamiltonian,
    action_functional,
    evolve_state,
    heisenberg_projector,
    phase_split,
    propagate,
)
from .histories import (  # noqa: E402
    History,
    HistorySet,
    build_history_set,
    class_operator,
    coarse_phase_sum,
    trace_class_operator,
)
from .decoherence import (  # noqa: E402
    DecoherenceMatrix,
    build_decoherence_matrix,
    consistency_check,
    decoherence_functional,
    df_coarse_sum,
    df_dynamical_finegrained,
    df_kinematic_finegrained,
    interference,
    probability,
)
