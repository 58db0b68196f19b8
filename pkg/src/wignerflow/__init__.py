"""Wigner functions, Wigner flow and flow topology for a tunnelling double well."""

from .config import PhysicsConfig
from .errors import (
    ConfigError,
    DomainOverflowError,
    GridInsufficientError,
    InvalidAsymmetryError,
    LoopThroughZeroError,
    NonIntegerWindingError,
    NotConvergedError,
    UnsupportedOrderError,
    WignerFlowError,
)
from .potential import (
    CatichaPotential,
    HarmonicPotential,
    eval_potential,
    find_extrema,
    potential_derivative,
)
from .states import (
    EigenstatePair,
    SuperpositionWeights,
    momentum_wavefunction,
    superposition_weights,
)
from .wigner import (
    PhaseSpaceGrid,
    WignerBasisFields,
    compute_basis_fields,
    marginals,
    wigner_at,
    wigner_time_derivative,
)
from .flow import (
    FlowField,
    continuity_residual,
    flow_field,
    probability_current_p,
    probability_current_x,
)
from .topology import (
    ChargeLedger,
    ExactFlow,
    GridFlow,
    StagnationPoint,
    TopologyEvent,
    TrackResult,
    WindingLoop,
    charge_ledger,
    classify,
    iso_contours,
    locate_stagnation_points,
    track,
    winding_number,
)

__version__ = "0.1.0"
