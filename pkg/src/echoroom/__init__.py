"""echoroom: 2D room-geometry estimation from synthetic acoustic echoes.

A simulated robot carrying a sound source and four arm-mounted microphones
synthesizes room impulse responses, extracts first-order image sources by
combinatorial trilateration, and walks an unknown polygonal room with a
three-stop wall-confirmation strategy until the estimated wall lines close
into a polygon.
"""

from ._backend import BACKEND
from .acoustics import ImageSource, Rir, Room, SimConfig, enumerate_image_sources, synthesize_rir, toa
from .echoes import EchoEvent, PeakPickConfig, extract_toas
from .geometry import (
    Line2,
    Point2,
    Polygon2,
    Segment2,
    line_intersection,
    mirror_point,
    point_side,
    polygon_contains,
    wall_line_from_source_and_is,
)
from .harness import BatchReport, ExperimentConfig, TrialReport, run_batch, run_trial
from .planner import (
    PlannerConfig,
    PlannerState,
    StepOutcome,
    WallHypothesis,
    advance,
    observe_and_hypothesize,
    propose_next_stop,
    room_closure,
    walls_approximate,
)
from .rig import (
    ISCluster,
    RigPose,
    cluster_candidates,
    corner_mitigation_sweep,
    mic_positions,
    pick_best_cluster,
    rotation_sweep,
)
from .trilateration import (
    CandidateIS,
    CommonISConfig,
    MicArrayObservation,
    find_common_is,
    reflective_point_filter,
    solve_is_triple,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # geometry
    "Point2",
    "Line2",
    "Segment2",
    "Polygon2",
    "mirror_point",
    "wall_line_from_source_and_is",
    "line_intersection",
    "point_side",
    "polygon_contains",
    # acoustics
    "Room",
    "ImageSource",
    "SimConfig",
    "Rir",
    "enumerate_image_sources",
    "toa",
    "synthesize_rir",
    # echoes
    "EchoEvent",
    "PeakPickConfig",
    "extract_toas",
    # trilateration
    "MicArrayObservation",
    "CandidateIS",
    "CommonISConfig",
    "solve_is_triple",
    "find_common_is",
    "reflective_point_filter",
    # rig
    "RigPose",
    "ISCluster",
    "mic_positions",
    "rotation_sweep",
    "cluster_candidates",
    "pick_best_cluster",
    "corner_mitigation_sweep",
    # planner
    "WallHypothesis",
    "PlannerConfig",
    "PlannerState",
    "StepOutcome",
    "observe_and_hypothesize",
    "walls_approximate",
    "propose_next_stop",
    "advance",
    "room_closure",
    # harness
    "ExperimentConfig",
    "TrialReport",
    "BatchReport",
    "run_trial",
    "run_batch",
]
