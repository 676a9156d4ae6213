"""Common image sources from four microphones' echo lists.

Each microphone's echo list gives unlabeled source/image distances. A
candidate common image source is a combination of one echo per mic whose
three overlapping mic-triple trilaterations (mics 1-2-3, 2-3-4, 3-4-1) agree
within a small radius; the fourth mic thereby cross-verifies every solution.
Candidates whose implied reflection point is impossible (some microphone on
the far side of the would-be wall) are rejected as noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .echoes import EchoEvent
from .errors import DegenerateInput, SingularGeometry
from .geometry import Point2, point_side, wall_line_from_source_and_is
from .tolerances import TOL

__all__ = [
    "MicArrayObservation",
    "CandidateIS",
    "CommonISConfig",
    "solve_is_triple",
    "find_common_is",
    "reflective_point_filter",
]


@dataclass(frozen=True)
class MicArrayObservation:
    """One acoustic measurement: 4 mic positions, their echo lists, and the
    known source position (all in the same working frame)."""

    mic_positions: tuple[Point2, Point2, Point2, Point2]
    echo_lists: tuple[list[EchoEvent], ...]
    source_position: Point2

    def __post_init__(self) -> None:
        if len(self.mic_positions) != 4 or len(self.echo_lists) != 4:
            raise DegenerateInput("exactly four microphones are required")
        if any(len(e) == 0 for e in self.echo_lists):
            raise DegenerateInput("every echo list must be nonempty")


@dataclass(frozen=True)
class CandidateIS:
    position: Point2
    supporting_toas: tuple[float, float, float, float]
    residual: float
    # Which observation (sweep orientation) produced this candidate; -1 when
    # unknown. Clusters count support per distinct observation.
    observation: int = -1

    def __post_init__(self) -> None:
        if self.residual < 0:
            raise DegenerateInput("residual must be nonnegative")


@dataclass(frozen=True)
class CommonISConfig:
    speed_of_sound: float = 343.0
    sample_rate: float = 96000.0
    match_radius: float = 0.05
    max_echoes_per_mic: int = 12
    # Echoes within this many sample-equivalents of the known source-mic
    # distance are treated as the direct path and discarded.
    direct_discard_samples: float = 1.5


def solve_is_triple(
    m1: Point2, m2: Point2, m3: Point2, t1: float, t2: float, t3: float, c: float
) -> Point2:
    """Trilaterate one image source from three mics and their TOAs.

    Differencing the squared-range equations pairwise cancels the quadratic
    term, leaving the 2x2 linear system with rows (m1-m2) and (m2-m3).
    """
    a11 = m1.x - m2.x
    a12 = m1.y - m2.y
    a21 = m2.x - m3.x
    a22 = m2.y - m3.y
    det = a11 * a22 - a12 * a21
    if abs(det) <= TOL.det_eps:
        raise SingularGeometry("collinear microphone triple")
    d1, d2, d3 = t1 * c, t2 * c, t3 * c
    b1 = 0.5 * (m1.x * m1.x - m2.x * m2.x + m1.y * m1.y - m2.y * m2.y - d1 * d1 + d2 * d2)
    b2 = 0.5 * (m2.x * m2.x - m3.x * m3.x + m2.y * m2.y - m3.y * m3.y - d2 * d2 + d3 * d3)
    return Point2((b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det)


def reflective_point_filter(candidate: CandidateIS, source: Point2, mic: Point2) -> bool:
    """Plausibility test for a candidate image source against one microphone.

    The candidate's would-be wall is the perpendicular bisector of (source,
    candidate). A real reflection requires the candidate-to-mic segment to
    cross that wall at a reflective point, which happens exactly when the mic
    sits on the source's side of the wall; otherwise the candidate is noise.
    """
    line = wall_line_from_source_and_is(source, candidate.position)
    side_cand = point_side(candidate.position, line)
    side_mic = point_side(mic, line)
    if side_cand == 0.0 or side_mic == 0.0 or (side_cand > 0.0) == (side_mic > 0.0):
        return False
    # Intersection parameter along candidate -> mic; strictly interior.
    t = side_cand / (side_cand - side_mic)
    if not (0.0 < t < 1.0):
        return False
    side_src = point_side(source, line)
    return (side_src > 0.0) == (side_mic > 0.0)


def find_common_is(obs: MicArrayObservation, cfg: CommonISConfig) -> list[CandidateIS]:
    """All candidate common image sources for one observation.

    Per mic: drop the direct-path echo (known source-mic distance), keep the
    earliest max_echoes_per_mic echoes; then search every combination with
    the triple-agreement and reflective-point criteria. Combinations that
    agree within match_radius of an already-kept, lower-residual candidate
    are the same physical image source seen through neighboring echo picks
    and are dropped, so one observation contributes at most one candidate per
    image source. Results are sorted by (residual, x, y) so the output is
    canonical regardless of backend or internal execution order.
    """
    c = cfg.speed_of_sound
    tol_direct = cfg.direct_discard_samples * c / cfg.sample_rate
    dist_arrays: list[np.ndarray] = []
    toa_arrays: list[np.ndarray] = []
    for mic, events in zip(obs.mic_positions, obs.echo_lists):
        known = obs.source_position.distance_to(mic)
        toas = [e.toa for e in events if abs(e.toa * c - known) > tol_direct]
        toas = toas[: cfg.max_echoes_per_mic]
        arr = np.asarray(toas, dtype=np.float64)
        toa_arrays.append(arr)
        dist_arrays.append(arr * c)
    if min(a.size for a in dist_arrays) == 0:
        return []

    mic_xy = np.asarray([[m.x, m.y] for m in obs.mic_positions], dtype=np.float64)
    pos, res, idx = _backend.common_is_search(
        mic_xy,
        dist_arrays,
        cfg.match_radius,
        TOL.det_eps,
        obs.source_position.x,
        obs.source_position.y,
        TOL.min_source_is_dist,
    )
    out = [
        CandidateIS(
            Point2(float(pos[k, 0]), float(pos[k, 1])),
            tuple(float(toa_arrays[m][idx[k, m]]) for m in range(4)),
            float(res[k]),
        )
        for k in range(pos.shape[0])
    ]
    out.sort(key=lambda cand: (cand.residual, cand.position.x, cand.position.y))
    kept: list[CandidateIS] = []
    for cand in out:
        if all(cand.position.distance_to(k.position) > cfg.match_radius for k in kept):
            kept.append(cand)
    return kept
