"""Three-stop wall confirmation and room closure.

The robot confirms a wall only after three successive stops produce mutually
approximate wall lines. At each stop it sweeps the rig, clusters candidate
image sources, derives a wall line (the perpendicular bisector of source and
cluster centroid), and moves parallel to that line, preferring the direction
farther from every wall already examined. Failed matches retry once with the
arm-extension schedule before the robot restarts at a random nearby spot.
After each confirmation the second biggest cluster at the current stop seeds
the next wall, and the room is complete as soon as every confirmed wall line
has two intersections with the others bounding a simple polygon around the
robot's starting point.

All coordinates live in the working frame anchored at the first stop: the
robot never learns the true room frame, only relative motion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol, Sequence

import numpy as np

from .acoustics import rng_from_key
from .errors import DegenerateInput, MaxStepsExceeded
from .geometry import Line2, Point2, Polygon2, line_intersection, point_side, wall_line_from_source_and_is
from .rig import (
    ISCluster,
    RigPose,
    SweepConfig,
    cluster_candidates,
    corner_mitigation_with_stats,
    sweep_with_stats,
)
from .trilateration import CommonISConfig, MicArrayObservation

__all__ = [
    "WallStatus",
    "WallHypothesis",
    "PlannerConfig",
    "PlannerState",
    "StepOutcome",
    "PlannerSim",
    "initial_state",
    "observe_and_hypothesize",
    "walls_approximate",
    "propose_next_stop",
    "advance",
    "room_closure",
]


class WallStatus(enum.Enum):
    TENTATIVE_1 = "tentative_1"
    TENTATIVE_2 = "tentative_2"
    CONFIRMED = "confirmed"


@dataclass(frozen=True)
class WallHypothesis:
    """A wall line with its supporting robot stops.

    ``line`` is the most recent supporting line while tentative and the
    support-weighted fusion once confirmed; ``lines``/``weights`` keep the
    individual per-stop estimates (weights are cluster sizes).
    """

    line: Line2
    support_stops: tuple[int, ...]
    status: WallStatus
    lines: tuple[Line2, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        need = {WallStatus.TENTATIVE_1: 1, WallStatus.TENTATIVE_2: 2}.get(self.status)
        if need is not None and len(self.support_stops) != need:
            raise DegenerateInput(f"{self.status.value} requires {need} support stop(s)")
        if self.status is WallStatus.CONFIRMED and len(self.support_stops) < 3:
            raise DegenerateInput("confirmed walls need at least 3 support stops")


@dataclass(frozen=True)
class PlannerConfig:
    angle_tol: float = math.radians(3.0)
    mag_tol: float = 0.05
    step_dist: float = 0.5
    max_steps: int = 300
    default_extension: float = 0.5
    extension_schedule: tuple[float, ...] = (0.5, 0.35, 0.2, 0.1)
    restart_radius: float = 1.0
    restart_margin: float = 0.3
    move_margin: float = 0.12
    # A cluster centroid closer to the source than this cannot seed a wall.
    min_image_distance: float = 0.05
    # Wall-line intersections farther than this from the working origin are
    # ignored by the closure test (guards against near-parallel estimates).
    closure_max_vertex: float = 50.0
    # "strict": compare the single best cluster against the chain (the wall
    # must stay the dominant return). "expected": accept any qualifying
    # cluster that matches the chain.
    confirm_policy: str = "strict"
    # The robot keeps a map of confirmed walls and skips their clusters when
    # hypothesizing (seeding after a confirmation always does). Disable to
    # model a robot that re-derives and re-confirms walls it already holds.
    exclude_confirmed_in_selection: bool = True
    sweep: SweepConfig = field(default_factory=SweepConfig)
    islocate: CommonISConfig = field(default_factory=CommonISConfig)


@dataclass
class PlannerState:
    current_pose: RigPose
    stop_count: int
    confirmed_walls: list[WallHypothesis]
    active_hypothesis: Optional[WallHypothesis]
    rng_seed: int
    origin: Point2
    rng: np.random.Generator
    sweep_serial: int = 0


@dataclass(frozen=True)
class StepOutcome:
    new_state: PlannerState
    action: str  # parallel_move | extension_retry | random_restart | wall_confirmed | room_complete
    room: Optional[Polygon2]
    record: dict

    def __post_init__(self) -> None:
        if (self.room is not None) != (self.action == "room_complete"):
            raise DegenerateInput("room present iff action == room_complete")


class PlannerSim(Protocol):
    """What the planner needs from the world.

    ``observe`` returns None for physically infeasible poses (a mic would
    leave the room); ``is_traversable`` is the collision guard that keeps
    proposed stops inside the real room, which the robot itself cannot know.
    """

    def observe(self, pose: RigPose, key: tuple[int, ...]) -> Optional[MicArrayObservation]: ...

    def is_traversable(self, p: Point2, margin: float) -> bool: ...


def initial_state(start: RigPose, rng_seed: int = 0) -> PlannerState:
    """Planner state at the first stop; the working origin is pinned there."""
    return PlannerState(
        current_pose=start,
        stop_count=1,
        confirmed_walls=[],
        active_hypothesis=None,
        rng_seed=rng_seed,
        origin=start.center,
        rng=rng_from_key(rng_seed, (0xE0,)),
    )


def walls_approximate(
    w1: Line2, w2: Line2, origin: Point2, angle_tol: float, mag_tol: float
) -> bool:
    """Same wall? Angles agree mod pi, and the perpendicular feet from the
    working origin point the same way with similar lengths (which is what
    separates a wall from its parallel twin across the room).

    Symmetric and reflexive, deliberately not transitive.
    """
    if angle_tol <= 0 or mag_tol <= 0:
        raise DegenerateInput("tolerances must be positive")
    da = abs(w1.angle() - w2.angle())
    da = min(da, math.pi - da)
    if da > angle_tol:
        return False
    f1 = w1.foot_from(origin)
    f2 = w2.foot_from(origin)
    if f1.dot(f2) <= 0.0:
        return False
    m1, m2 = f1.norm(), f2.norm()
    return abs(m1 - m2) <= mag_tol * max(m1, m2)


def propose_next_stop(state: PlannerState, hypothesis: Line2, step_dist: float) -> RigPose:
    """Next stop: step parallel to the hypothesis, in whichever direction
    maximizes the minimum distance to all examined walls (exploration first);
    ties take the canonical tangent direction."""
    if not (0.0 < step_dist <= 0.5 + 1e-12):
        raise DegenerateInput("parallel step must lie in (0, 0.5] m")
    t = hypothesis.tangent()
    c = state.current_pose.center
    pos = Point2(c.x + step_dist * t.x, c.y + step_dist * t.y)
    neg = Point2(c.x - step_dist * t.x, c.y - step_dist * t.y)
    examined = [w.line for w in state.confirmed_walls]
    if state.active_hypothesis is not None:
        examined.append(state.active_hypothesis.line)
    if not examined:
        choice = pos
    else:
        score_pos = min(abs(point_side(pos, l)) for l in examined)
        score_neg = min(abs(point_side(neg, l)) for l in examined)
        choice = pos if score_pos >= score_neg - 1e-12 else neg
    return replace(state.current_pose, center=choice)


# ---------------------------------------------------------------------------
# Stop observation


@dataclass(frozen=True)
class StopObservation:
    """Clustered result of one stop's sweeping, post-qualification."""

    clusters: tuple[ISCluster, ...]  # qualifying, best first, confirmed walls excluded
    lines: tuple[Line2, ...]  # wall line per cluster
    used_mitigation: bool
    feasible: int
    n_candidates: int


def _qualify(
    candidates,
    feasible: int,
    state: PlannerState,
    cfg: PlannerConfig,
    used_mitigation: bool,
) -> StopObservation:
    source = state.current_pose.center
    clusters = cluster_candidates(candidates, cfg.sweep.cluster_radius)
    support = cfg.sweep.min_support(feasible)
    keep: list[tuple[ISCluster, Line2]] = []
    for cl in clusters:
        if cl.support < support:
            continue
        if cl.centroid.distance_to(source) < cfg.min_image_distance:
            continue
        line = wall_line_from_source_and_is(source, cl.centroid)
        if cfg.exclude_confirmed_in_selection and any(
            walls_approximate(line, w.line, state.origin, cfg.angle_tol, cfg.mag_tol)
            for w in state.confirmed_walls
        ):
            continue
        keep.append((cl, line))
    keep.sort(
        key=lambda cl_line: (
            -cl_line[0].support,
            cl_line[0].centroid.distance_to(source),
            cl_line[0].centroid.x,
            cl_line[0].centroid.y,
        )
    )
    return StopObservation(
        clusters=tuple(c for c, _ in keep),
        lines=tuple(l for _, l in keep),
        used_mitigation=used_mitigation,
        feasible=feasible,
        n_candidates=len(candidates),
    )


def _observe(state: PlannerState, sim: PlannerSim, cfg: PlannerConfig, phase: int) -> StopObservation:
    serial = state.sweep_serial
    state.sweep_serial += 1
    cands, feas = sweep_with_stats(
        sim.observe,
        state.current_pose,
        cfg.sweep.delta_deg,
        cfg.islocate,
        sweep_key=(serial, phase, 0),
    )
    return _qualify(cands, feas, state, cfg, used_mitigation=False)


def _observe_mitigated(
    state: PlannerState, sim: PlannerSim, cfg: PlannerConfig, phase: int
) -> StopObservation:
    serial = state.sweep_serial
    state.sweep_serial += 1
    cands, feas = corner_mitigation_with_stats(
        sim.observe,
        state.current_pose,
        cfg.extension_schedule,
        cfg.sweep.delta_deg,
        cfg.islocate,
        sweep_key=(serial, phase, 1),
    )
    return _qualify(cands, feas, state, cfg, used_mitigation=True)


def _select(
    obs: StopObservation,
    state: PlannerState,
    cfg: PlannerConfig,
    expected: Sequence[Line2],
) -> Optional[tuple[ISCluster, Line2]]:
    """Pick the cluster to act on at this stop.

    With no expectation: the best qualifying cluster. Extending a chain: the
    chosen cluster's line must approximate every support line so far; the
    "strict" policy only ever considers the single best cluster (the wall
    must remain the dominant return at the new stop), while "expected"
    accepts the first qualifying cluster that matches.
    """
    if not obs.clusters:
        return None
    if not expected:
        return obs.clusters[0], obs.lines[0]
    pool = obs.clusters[:1] if cfg.confirm_policy == "strict" else obs.clusters
    for cl, line in zip(pool, obs.lines):
        if all(
            walls_approximate(line, e, state.origin, cfg.angle_tol, cfg.mag_tol)
            for e in expected
        ):
            return cl, line
    return None


def observe_and_hypothesize(
    state: PlannerState, sim: PlannerSim, cfg: PlannerConfig | None = None
) -> Optional[Line2]:
    """Sweep the current stop (falling back to the extension schedule when the
    plain sweep yields nothing) and return the best new wall line, if any."""
    cfg = cfg or PlannerConfig()
    obs = _observe(state, sim, cfg, phase=0)
    sel = _select(obs, state, cfg, expected=())
    if sel is None:
        obs = _observe_mitigated(state, sim, cfg, phase=0)
        sel = _select(obs, state, cfg, expected=())
    return None if sel is None else sel[1]


# ---------------------------------------------------------------------------
# Wall fusion and closure


def _fuse_lines(lines: Sequence[Line2], weights: Sequence[float]) -> Line2:
    """Support-weighted mean in (normal, foot-distance) parameters."""
    ref = lines[0]
    sx = sy = sd = 0.0
    for line, w in zip(lines, weights):
        nx, ny, d = line.normal.x, line.normal.y, line.offset
        if nx * ref.normal.x + ny * ref.normal.y < 0.0:
            nx, ny, d = -nx, -ny, -d
        sx += w * nx
        sy += w * ny
        sd += w * d
    return Line2(Point2(sx, sy), sd)


def room_closure(
    walls: Sequence[Line2],
    interior: Optional[Point2] = None,
    max_vertex_distance: float = 50.0,
) -> Optional[Polygon2]:
    """The closed room bounded by the wall lines, or None while still open.

    Closure requires every line to meet the others in at least two distinct
    points, and those intersections to bound a simple polygon containing the
    interior reference (default: the mean of all pairwise intersections).
    Intersections beyond max_vertex_distance of the reference do not count:
    two near-parallel estimates of opposite walls meet kilometers away and
    must not close a room.
    """
    lines = list(walls)
    if len(lines) < 3:
        return None
    pts: list[Point2] = []
    per_line: list[list[Point2]] = [[] for _ in lines]
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            p = line_intersection(lines[i], lines[j])
            if p is None:
                continue
            pts.append(p)
            per_line[i].append(p)
            per_line[j].append(p)
    if not pts:
        return None
    hint = interior or Point2(
        sum(p.x for p in pts) / len(pts), sum(p.y for p in pts) / len(pts)
    )

    def distinct_qualifying(points: list[Point2]) -> int:
        kept: list[Point2] = []
        for p in points:
            if p.distance_to(hint) > max_vertex_distance:
                continue
            if all(p.distance_to(q) > 1e-9 for q in kept):
                kept.append(p)
        return len(kept)

    if any(distinct_qualifying(ps) < 2 for ps in per_line):
        return None

    # Clip a large box around the hint by each wall's half-plane (hint side).
    h = max_vertex_distance
    cell: list[Point2] = [
        Point2(hint.x - h, hint.y - h),
        Point2(hint.x + h, hint.y - h),
        Point2(hint.x + h, hint.y + h),
        Point2(hint.x - h, hint.y + h),
    ]
    for line in lines:
        s_hint = point_side(hint, line)
        if abs(s_hint) <= 1e-9:
            return None  # reference on a wall: cannot orient the half-plane
        sign = 1.0 if s_hint > 0 else -1.0
        nxt: list[Point2] = []
        m = len(cell)
        for i in range(m):
            a, b = cell[i], cell[(i + 1) % m]
            sa = sign * point_side(a, line)
            sb = sign * point_side(b, line)
            if sa >= 0.0:
                nxt.append(a)
            if (sa > 0.0) != (sb > 0.0) and sa != sb:
                t = sa / (sa - sb)
                nxt.append(Point2(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
        cell = nxt
        if len(cell) < 3:
            return None

    dedup: list[Point2] = []
    for p in cell:
        if not dedup or (p.distance_to(dedup[-1]) > 1e-9 and p.distance_to(dedup[0]) > 1e-9):
            dedup.append(p)
    if len(dedup) < 3:
        return None
    if any(p.distance_to(hint) >= max_vertex_distance * 0.999 for p in dedup):
        return None  # cell not bounded by the walls alone
    try:
        return Polygon2(tuple(dedup))
    except DegenerateInput:
        return None


# ---------------------------------------------------------------------------
# The per-stop state machine


def _restart_target(state: PlannerState, sim: PlannerSim, cfg: PlannerConfig) -> Point2:
    """Random nearby relocation, rejection-sampled into traversable space."""
    c = state.current_pose.center
    radius = cfg.restart_radius
    for attempt in range(200):
        if attempt and attempt % 50 == 0:
            radius *= 1.5
        u = state.rng.random()
        theta = state.rng.random() * 2.0 * math.pi
        r = radius * math.sqrt(u)
        p = Point2(c.x + r * math.cos(theta), c.y + r * math.sin(theta))
        if sim.is_traversable(p, cfg.restart_margin):
            return p
    return c  # pathological; stay put and let the next stop retry


def _parallel_target(
    state: PlannerState, sim: PlannerSim, cfg: PlannerConfig, line: Line2
) -> Optional[Point2]:
    preferred = propose_next_stop(state, line, cfg.step_dist).center
    c = state.current_pose.center
    alternate = Point2(2.0 * c.x - preferred.x, 2.0 * c.y - preferred.y)
    for target in (preferred, alternate):
        if sim.is_traversable(target, cfg.move_margin):
            return target
    return None


def advance(state: PlannerState, sim: PlannerSim, cfg: PlannerConfig | None = None) -> StepOutcome:
    """Process the current stop and move (unless the room just closed).

    Raises MaxStepsExceeded past cfg.max_steps stops. The returned state is
    the same object, mutated.
    """
    cfg = cfg or PlannerConfig()
    if state.stop_count > cfg.max_steps:
        raise MaxStepsExceeded(f"no closure after {cfg.max_steps} stops")

    active = state.active_hypothesis
    expected = () if active is None else active.lines
    obs = _observe(state, sim, cfg, phase=0)
    sel = _select(obs, state, cfg, expected)
    used_mitigation = False
    if sel is None:
        # One extension-schedule retry per stop before giving up on it.
        obs = _observe_mitigated(state, sim, cfg, phase=1)
        sel = _select(obs, state, cfg, expected)
        used_mitigation = True

    record = {
        "stop": state.stop_count,
        "center": (state.current_pose.center.x, state.current_pose.center.y),
        "extension": state.current_pose.arm_extension,
        "n_candidates": obs.n_candidates,
        "feasible_orientations": obs.feasible,
        "used_mitigation": used_mitigation,
        "cluster_sizes": [c.support for c in obs.clusters[:6]],
        "confirmed_walls": len(state.confirmed_walls),
    }

    action: str
    room: Optional[Polygon2] = None

    if sel is None:
        state.active_hypothesis = None
        target = _restart_target(state, sim, cfg)
        action = "random_restart"
    else:
        cluster, line = sel
        record["selected_cluster_size"] = cluster.support
        record["hypothesis"] = _line_params(line)
        if active is None:
            state.active_hypothesis = WallHypothesis(
                line, (state.stop_count,), WallStatus.TENTATIVE_1, (line,), (float(cluster.support),)
            )
            target = _move_or_restart(state, sim, cfg, line, record)
            action = record.pop("_move_action")
        else:
            lines = active.lines + (line,)
            weights = active.weights + (float(cluster.support),)
            stops = active.support_stops + (state.stop_count,)
            if len(stops) < 3:
                state.active_hypothesis = WallHypothesis(
                    line, stops, WallStatus.TENTATIVE_2, lines, weights
                )
                target = _move_or_restart(state, sim, cfg, line, record)
                action = record.pop("_move_action")
            else:
                fused = _fuse_lines(lines, weights)
                duplicate = any(
                    walls_approximate(fused, w.line, state.origin, cfg.angle_tol, cfg.mag_tol)
                    for w in state.confirmed_walls
                )
                if not duplicate:
                    state.confirmed_walls.append(
                        WallHypothesis(fused, stops, WallStatus.CONFIRMED, lines, weights)
                    )
                state.active_hypothesis = None
                record["confirmed_line"] = _line_params(fused)
                record["re_confirmation"] = duplicate
                room = room_closure(
                    [w.line for w in state.confirmed_walls],
                    interior=state.origin,
                    max_vertex_distance=cfg.closure_max_vertex,
                )
                if room is not None:
                    record["action"] = "room_complete"
                    return StepOutcome(state, "room_complete", room, record)
                # Seed the next wall from this stop's second biggest cluster.
                seeded = _seed_next(obs, cluster, state, cfg)
                if seeded is not None:
                    seed_cluster, seed_line = seeded
                    state.active_hypothesis = WallHypothesis(
                        seed_line,
                        (state.stop_count,),
                        WallStatus.TENTATIVE_1,
                        (seed_line,),
                        (float(seed_cluster.support),),
                    )
                    record["seeded"] = _line_params(seed_line)
                    target = _move_or_restart(state, sim, cfg, seed_line, record)
                    record.pop("_move_action")
                else:
                    target = _restart_target(state, sim, cfg)
                action = "wall_confirmed"

    if action == "parallel_move" and used_mitigation:
        action = "extension_retry"
    record["action"] = action
    state.current_pose = replace(state.current_pose, center=target)
    state.stop_count += 1
    return StepOutcome(state, action, room, record)


def _seed_next(
    obs: StopObservation, used: ISCluster, state: PlannerState, cfg: PlannerConfig
) -> Optional[tuple[ISCluster, Line2]]:
    source_line_pairs = [
        (cl, ln)
        for cl, ln in zip(obs.clusters, obs.lines)
        if cl is not used
        and not any(
            walls_approximate(ln, w.line, state.origin, cfg.angle_tol, cfg.mag_tol)
            for w in state.confirmed_walls
        )
    ]
    return source_line_pairs[0] if source_line_pairs else None


def _move_or_restart(
    state: PlannerState, sim: PlannerSim, cfg: PlannerConfig, line: Line2, record: dict
) -> Point2:
    target = _parallel_target(state, sim, cfg, line)
    if target is None:
        # Both parallel directions blocked: abandon the chain and relocate.
        state.active_hypothesis = None
        record["_move_action"] = "random_restart"
        return _restart_target(state, sim, cfg)
    record["_move_action"] = "parallel_move"
    return target


def _line_params(line: Line2) -> dict:
    return {"nx": line.normal.x, "ny": line.normal.y, "offset": line.offset}
