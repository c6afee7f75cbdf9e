"""Forced crystalline facet dynamics in a chessboard medium."""

from .calibrability import (
    BreakingThresholds,
    CalibrabilityVerdict,
    CandidateField,
    candidate_field,
    classify_positive_curvature,
    classify_zero_curvature,
    oracle_is_calibrable,
    thresholds,
)
from .cracking import (
    BoundaryEdgeVelocities,
    BreakingConfiguration,
    CrackingSetup,
    boundary_velocities,
    breaking_configuration,
    cracking_setup,
    cracking_setup_on_grid,
)
from .effective import (
    CaseTag,
    EffectiveState,
    RectangleMotion,
    SquareMotion,
    classify_rectangle,
    classify_square,
    integrate_rectangle,
    integrate_square,
    invariants,
)
from .flow import (
    EventKind,
    FacetFlow,
    FlowEvent,
    FlowState,
    FlowTrajectory,
    advance_to_next_event,
    filippov_intervals,
    run,
    velocity_field,
)
from .geometry import (
    Direction,
    EdgeView,
    Polyrectangle,
    edges,
    energy,
    from_vertices,
    hausdorff_distance,
    polygon_hausdorff,
)
from .medium import ChessboardMedium, EndpointState, JumpKind, LineTrace, PhaseDecomposition

__version__ = "0.1.0"
