"""Experiment orchestration: single trials, Monte-Carlo batches, scoring.

A trial drops the robot at a random interior start of a hidden rectangular
room, runs the planner to closure, then scores each true wall against its
matched estimate. The working frame is anchored at the robot's first stop;
scoring translates estimates back into the room frame. All randomness is
derived from (master_seed, trial_index, purpose) keys, so batches are
reproducible byte-for-byte regardless of worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .acoustics import Room, SimConfig, enumerate_image_sources, synthesize_rir
from .echoes import EchoEvent, PeakPickConfig, extract_toas
from .errors import ConfigError, MaxStepsExceeded
from .geometry import (
    Line2,
    Point2,
    Polygon2,
    point_side,
    polygon_contains_with_margin,
    rectangle,
)
from .planner import PlannerConfig, advance, initial_state
from .rig import (
    RigPose,
    SweepConfig,
    cluster_candidates,
    corner_mitigation_with_stats,
    mic_positions,
    pick_best_cluster,
    sweep_with_stats,
)
from .trilateration import CommonISConfig, MicArrayObservation

__all__ = [
    "ExperimentConfig",
    "TrialReport",
    "BatchReport",
    "RoomSimulation",
    "run_trial",
    "run_batch",
    "write_batch_outputs",
    "score_walls",
    "corner_trial",
    "run_corner_experiment",
    "CSV_HEADER",
]

CSV_HEADER = "trial,success,steps,err_w1,err_w2,err_w3,err_w4"


def derive_seed(root: int, key: tuple[int, ...]) -> int:
    """Stable 64-bit child seed for (root, key)."""
    ss = np.random.SeedSequence(root, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])


def _rng(root: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence(root, spawn_key=key)))


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "fixed"  # fixed | random
    room_width: float = 6.0
    room_height: float = 5.0
    random_min_side: float = 3.0
    random_max_side: float = 10.0
    absorption: float = 0.9
    trials: int = 100
    snr_db: float = 30.0
    master_seed: int = 0
    workers: int = 1
    save_traces: bool = False
    # Simulation
    speed_of_sound: float = 343.0
    sample_rate: float = 96000.0
    rt60: float = 0.8
    max_order: int = 3
    # Rig / sweep
    delta_deg: float = 10.0
    cluster_radius: float = 0.1
    default_extension: float = 0.5
    extension_schedule: tuple[float, ...] = (0.5, 0.35, 0.2, 0.1)
    # Peak picking
    rel_threshold: float = 0.02
    min_separation: int = 8
    max_peaks: int = 40
    # Common-IS search
    match_radius: float = 0.05
    max_echoes_per_mic: int = 12
    # Planner
    angle_tol_deg: float = 3.0
    mag_tol: float = 0.05
    step_dist: float = 0.5
    max_steps: int = 300
    confirm_policy: str = "strict"
    start_margin: float = 0.3
    mic_margin: float = 0.01

    def __post_init__(self) -> None:
        if self.scenario not in ("fixed", "random"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not (self.random_min_side >= 1.5 and self.random_max_side <= 20.0):
            raise ConfigError("random room sides out of supported range")
        if self.random_min_side > self.random_max_side:
            raise ConfigError("random_min_side > random_max_side")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.room_width <= 0 or self.room_height <= 0:
            raise ConfigError("room dimensions must be positive")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        fields = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - fields
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "extension_schedule" in d:
            d = dict(d, extension_schedule=tuple(d["extension_schedule"]))
        if "snr_db" in d and isinstance(d["snr_db"], str):
            d = dict(d, snr_db=float(d["snr_db"]))
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["extension_schedule"] = list(self.extension_schedule)
        d["snr_db"] = "inf" if math.isinf(self.snr_db) else self.snr_db
        return d

    def sim_config(self, rng_seed: int = 0) -> SimConfig:
        return SimConfig(
            speed_of_sound=self.speed_of_sound,
            sample_rate=self.sample_rate,
            rt60=self.rt60,
            max_order=self.max_order,
            noise_snr_db=self.snr_db,
            rng_seed=rng_seed,
        )

    def peak_config(self) -> PeakPickConfig:
        return PeakPickConfig(self.rel_threshold, self.min_separation, self.max_peaks)

    def islocate_config(self) -> CommonISConfig:
        return CommonISConfig(
            speed_of_sound=self.speed_of_sound,
            sample_rate=self.sample_rate,
            match_radius=self.match_radius,
            max_echoes_per_mic=self.max_echoes_per_mic,
        )

    def planner_config(self) -> PlannerConfig:
        return PlannerConfig(
            angle_tol=math.radians(self.angle_tol_deg),
            mag_tol=self.mag_tol,
            step_dist=self.step_dist,
            max_steps=self.max_steps,
            default_extension=self.default_extension,
            extension_schedule=self.extension_schedule,
            confirm_policy=self.confirm_policy,
            sweep=SweepConfig(delta_deg=self.delta_deg, cluster_radius=self.cluster_radius),
            islocate=self.islocate_config(),
        )


# ---------------------------------------------------------------------------
# The simulated world behind the planner interface


class RoomSimulation:
    """Planner-facing oracle over a hidden ground-truth room.

    Poses arrive in the robot's working frame; ``world_origin`` maps them to
    the room frame. Orientations that would put a microphone within
    mic_margin of a wall (or outside) are infeasible and return None, which
    mirrors the physical constraint that the arms must not hit walls.
    """

    def __init__(
        self,
        room: Room,
        world_origin: Point2,
        sim_cfg: SimConfig,
        peak_cfg: PeakPickConfig,
        noise_root: int,
        mic_margin: float = 0.01,
    ) -> None:
        self.room = room
        self.world_origin = world_origin
        self.sim_cfg = sim_cfg
        self.peak_cfg = peak_cfg
        self.noise_root = noise_root
        self.mic_margin = mic_margin
        self._image_cache: tuple[tuple[float, float], list] | None = None

    def to_world(self, p: Point2) -> Point2:
        return Point2(p.x + self.world_origin.x, p.y + self.world_origin.y)

    def _images_for(self, source: Point2) -> list:
        key = (source.x, source.y)
        if self._image_cache is None or self._image_cache[0] != key:
            self._image_cache = (
                key,
                enumerate_image_sources(self.room, source, self.sim_cfg.max_order),
            )
        return self._image_cache[1]

    def observe(self, pose: RigPose, key: tuple[int, ...]) -> Optional[MicArrayObservation]:
        world_pose = replace(pose, center=self.to_world(pose.center))
        poly = self.room.polygon
        if not polygon_contains_with_margin(poly, world_pose.center, self.mic_margin):
            return None
        mics_world = mic_positions(world_pose)
        if not all(polygon_contains_with_margin(poly, m, self.mic_margin) for m in mics_world):
            return None
        cfg = replace(self.sim_cfg, rng_seed=derive_seed(self.noise_root, tuple(key)))
        images = self._images_for(world_pose.center)
        echo_lists: list[list[EchoEvent]] = []
        for k, mic in enumerate(mics_world):
            rir = synthesize_rir(
                self.room, world_pose.center, mic, cfg, mic_index=k + 1, images=images
            )
            echo_lists.append(extract_toas(rir, self.peak_cfg))
        return MicArrayObservation(mic_positions(pose), tuple(echo_lists), pose.center)

    def is_traversable(self, p: Point2, margin: float) -> bool:
        return polygon_contains_with_margin(self.room.polygon, self.to_world(p), margin)


# ---------------------------------------------------------------------------
# Scoring


def match_walls(true_lines: Sequence[Line2], est_lines: Sequence[Line2], ref: Point2) -> list[int]:
    """Greedy matching of estimates to true walls: smallest angle difference,
    then distance between the reference-point feet. Returns est index per
    true wall (-1 when estimates run out)."""
    used: set[int] = set()
    assignment: list[int] = []
    for t in true_lines:
        t_foot = t.project(ref)
        best, best_cost = -1, float("inf")
        for j, e in enumerate(est_lines):
            if j in used:
                continue
            da = abs(t.angle() - e.angle())
            da = min(da, math.pi - da)
            cost = da * 1000.0 + t_foot.distance_to(e.project(ref))
            if cost < best_cost:
                best, best_cost = j, cost
        if best >= 0:
            used.add(best)
        assignment.append(best)
    return assignment


def score_walls(true_lines: Sequence[Line2], est_lines: Sequence[Line2], ref: Point2) -> list[float]:
    """Per-true-wall error: perpendicular distance from the true wall
    (evaluated at the reference point's foot) to the matched estimate.

    Built entirely from relative geometry, so applying one rigid transform to
    both line sets and the reference leaves the scores unchanged.
    """
    assignment = match_walls(true_lines, est_lines, ref)
    errors = []
    for t, j in zip(true_lines, assignment):
        if j < 0:
            errors.append(float("inf"))
        else:
            errors.append(abs(point_side(t.project(ref), est_lines[j])))
    return errors


def _translate_line(line: Line2, offset: Point2) -> Line2:
    return Line2(line.normal, line.offset + line.normal.dot(offset))


def _translate_polygon(poly: Polygon2, offset: Point2) -> Polygon2:
    return Polygon2(tuple(Point2(v.x + offset.x, v.y + offset.y) for v in poly.vertices))


# ---------------------------------------------------------------------------
# Trials and batches


@dataclass(frozen=True)
class TrialReport:
    trial_index: int
    success: bool
    steps: int
    wall_errors: tuple[float, ...]
    recovered_polygon: Optional[Polygon2]
    room_polygon: Polygon2
    start: Point2
    trace: tuple[dict, ...]

    def csv_row(self) -> str:
        errs = list(self.wall_errors) + [float("nan")] * (4 - len(self.wall_errors))
        err_s = ",".join("nan" if math.isnan(e) or math.isinf(e) else f"{e:.6f}" for e in errs[:4])
        return f"{self.trial_index},{int(self.success)},{self.steps},{err_s}"


@dataclass(frozen=True)
class BatchReport:
    config: ExperimentConfig
    trials: tuple[TrialReport, ...]
    aggregate: dict


def _build_room(cfg: ExperimentConfig, trial_index: int) -> Room:
    if cfg.scenario == "fixed":
        return Room.from_polygon(rectangle(cfg.room_width, cfg.room_height), cfg.absorption)
    rng = _rng(cfg.master_seed, (trial_index, 1))
    w = cfg.random_min_side + (cfg.random_max_side - cfg.random_min_side) * rng.random()
    h = cfg.random_min_side + (cfg.random_max_side - cfg.random_min_side) * rng.random()
    return Room.from_polygon(rectangle(w, h), cfg.absorption)


def _draw_start(cfg: ExperimentConfig, room: Room, trial_index: int) -> Point2:
    rng = _rng(cfg.master_seed, (trial_index, 2))
    xs = [v.x for v in room.polygon.vertices]
    ys = [v.y for v in room.polygon.vertices]
    for _ in range(10000):
        p = Point2(
            min(xs) + (max(xs) - min(xs)) * rng.random(),
            min(ys) + (max(ys) - min(ys)) * rng.random(),
        )
        if polygon_contains_with_margin(room.polygon, p, cfg.start_margin):
            return p
    raise ConfigError("could not draw a start pose; room too small for start_margin")


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialReport:
    """One full exploration trial. Estimation failure is reported, not raised."""
    if trial_index < 0 or trial_index >= cfg.trials:
        raise ConfigError("trial_index out of range")
    room = _build_room(cfg, trial_index)
    start = _draw_start(cfg, room, trial_index)
    sim = RoomSimulation(
        room=room,
        world_origin=start,
        sim_cfg=cfg.sim_config(),
        peak_cfg=cfg.peak_config(),
        noise_root=derive_seed(cfg.master_seed, (trial_index, 4)),
        mic_margin=cfg.mic_margin,
    )
    pcfg = cfg.planner_config()
    pose0 = RigPose(Point2(0.0, 0.0), 0.0, cfg.default_extension)
    state = initial_state(pose0, rng_seed=derive_seed(cfg.master_seed, (trial_index, 3)))

    trace: list[dict] = []
    polygon = None
    try:
        while True:
            outcome = advance(state, sim, pcfg)
            trace.append(outcome.record)
            if outcome.action == "room_complete":
                polygon = outcome.room
                break
    except MaxStepsExceeded:
        pass

    true_lines = room.wall_lines()
    if polygon is not None:
        est_lines = [_translate_line(w.line, start) for w in state.confirmed_walls]
        success = len(est_lines) == len(true_lines) and len(polygon.vertices) == len(true_lines)
    else:
        est_lines = []
        success = False
    ref = room.polygon.centroid()
    errors = tuple(score_walls(true_lines, est_lines, ref)) if success else ()
    return TrialReport(
        trial_index=trial_index,
        success=success,
        steps=min(state.stop_count, cfg.max_steps),
        wall_errors=errors,
        recovered_polygon=_translate_polygon(polygon, start) if polygon else None,
        room_polygon=room.polygon,
        start=start,
        trace=tuple(trace),
    )


def _trial_job(args: tuple) -> TrialReport:
    cfg_dict, idx = args
    return run_trial(ExperimentConfig.from_dict(cfg_dict), idx)


def _histogram(values: Sequence[float], bin_width: float) -> dict:
    if not values:
        return {"bin_width": bin_width, "start": 0.0, "counts": []}
    lo = 0.0
    hi = max(values)
    nbins = max(1, int(math.floor(hi / bin_width)) + 1)
    counts = [0] * nbins
    for v in values:
        counts[min(nbins - 1, int(v // bin_width))] += 1
    return {"bin_width": bin_width, "start": lo, "counts": counts}


def _hist_mode_center(hist: dict) -> Optional[float]:
    counts = hist["counts"]
    if not counts:
        return None
    i = max(range(len(counts)), key=lambda k: (counts[k], -k))
    return hist["start"] + (i + 0.5) * hist["bin_width"]


def _quantile(sorted_vals: list[float], q: float) -> float:
    if not sorted_vals:
        return float("nan")
    pos = q * (len(sorted_vals) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(sorted_vals) - 1)
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def aggregate_reports(cfg: ExperimentConfig, reports: Sequence[TrialReport]) -> dict:
    errors = sorted(e for r in reports if r.success for e in r.wall_errors)
    steps = sorted(float(r.steps) for r in reports)
    err_hist = _histogram(errors, 0.001)  # 0.1 cm bins, meters
    step_hist = _histogram(steps, 4.0)
    n = len(reports)
    agg = {
        "n_trials": n,
        "success_rate": sum(r.success for r in reports) / n,
        "errors": {
            "count": len(errors),
            "median_m": _quantile(errors, 0.5),
            "p95_m": _quantile(errors, 0.95),
            "max_m": errors[-1] if errors else float("nan"),
            "frac_below_1cm": (sum(e < 0.01 for e in errors) / len(errors)) if errors else 0.0,
            "hist": err_hist,
        },
        "steps": {
            "median": _quantile(steps, 0.5),
            "p90": _quantile(steps, 0.9),
            "max": steps[-1] if steps else float("nan"),
            "frac_below_100": sum(s < 100 for s in steps) / n,
            "mode_bin_center": _hist_mode_center(step_hist),
            "hist": step_hist,
        },
    }
    return agg


def run_batch(cfg: ExperimentConfig, out_dir: Optional[str | Path] = None) -> BatchReport:
    """Monte-Carlo batch; deterministic for a given config regardless of
    worker count. Writes CSV/JSON outputs when out_dir is given."""
    indices = list(range(cfg.trials))
    if cfg.workers > 1:
        cfg_dict = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_trial_job, [(cfg_dict, i) for i in indices], chunksize=1))
    else:
        reports = [run_trial(cfg, i) for i in indices]
    reports.sort(key=lambda r: r.trial_index)
    batch = BatchReport(cfg, tuple(reports), aggregate_reports(cfg, reports))
    if out_dir is not None:
        write_batch_outputs(batch, out_dir)
    return batch


def batch_csv_text(batch: BatchReport) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in batch.trials)
    return "\n".join(lines) + "\n"


def trace_payload(report: TrialReport) -> dict:
    return {
        "trial": report.trial_index,
        "success": report.success,
        "steps": report.steps,
        "start": [report.start.x, report.start.y],
        "true_room": [[v.x, v.y] for v in report.room_polygon.vertices],
        "recovered_room": (
            [[v.x, v.y] for v in report.recovered_polygon.vertices]
            if report.recovered_polygon
            else None
        ),
        "stops": list(report.trace),
    }


def write_batch_outputs(batch: BatchReport, out_dir: str | Path) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / "batch.csv",
        "summary": out / "summary.json",
    }
    paths["csv"].write_text(batch_csv_text(batch), encoding="ascii")
    summary = {"config": batch.config.to_dict(), "aggregate": batch.aggregate}
    paths["summary"].write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="ascii"
    )
    if batch.config.save_traces:
        paths["traces"] = out / "traces.json"
        payload = [trace_payload(r) for r in batch.trials]
        paths["traces"].write_text(
            json.dumps(payload, sort_keys=True) + "\n", encoding="ascii"
        )
    return paths


# ---------------------------------------------------------------------------
# Corner phenomenon experiment (the near-corner failure and its mitigation)


@dataclass(frozen=True)
class CornerTrialResult:
    source: Point2
    # "found": some qualifying cluster exists. "recovered": a qualifying
    # cluster sits on a true first image source. "best_correct": the winning
    # cluster itself is a true first image source.
    full_found: bool
    full_recovered: bool
    full_best_correct: bool
    mitigated_found: bool
    mitigated_recovered: bool
    mitigated_best_correct: bool

    @property
    def full_failed_or_mislabeled(self) -> bool:
        return not (self.full_recovered and self.full_best_correct)


def _qualifying_clusters(cands, feasible, source, sweep_cfg: SweepConfig):
    clusters = cluster_candidates(cands, sweep_cfg.cluster_radius)
    support = sweep_cfg.min_support(feasible)
    keep = [c for c in clusters if c.support >= support]
    keep.sort(key=lambda c: (-c.support, c.centroid.distance_to(source)))
    return keep


def corner_trial(cfg: ExperimentConfig, seed_index: int, corner_distance: float = 0.3) -> CornerTrialResult:
    """One seeded near-corner scenario: does the full-extension sweep find a
    true first image source, and does the extension schedule rescue it?"""
    room = Room.from_polygon(rectangle(cfg.room_width, cfg.room_height), cfg.absorption)
    rng = _rng(cfg.master_seed, (seed_index, 7))
    theta = math.radians(15.0) + rng.random() * math.radians(60.0)
    source = Point2(corner_distance * math.cos(theta), corner_distance * math.sin(theta))
    sim = RoomSimulation(
        room=room,
        world_origin=Point2(0.0, 0.0),
        sim_cfg=cfg.sim_config(),
        peak_cfg=cfg.peak_config(),
        noise_root=derive_seed(cfg.master_seed, (seed_index, 8)),
        mic_margin=cfg.mic_margin,
    )
    sweep_cfg = SweepConfig(delta_deg=cfg.delta_deg, cluster_radius=cfg.cluster_radius)
    is_cfg = cfg.islocate_config()
    pose = RigPose(source, 0.0, cfg.default_extension)

    # The four true first image sources of the rectangle, mirrored source.
    first_is = [
        Point2(source.x, -source.y),
        Point2(2 * cfg.room_width - source.x, source.y),
        Point2(source.x, 2 * cfg.room_height - source.y),
        Point2(-source.x, source.y),
    ]

    def on_first_is(cluster) -> bool:
        return cluster is not None and min(
            cluster.centroid.distance_to(p) for p in first_is
        ) <= cfg.match_radius

    full_c, full_f = sweep_with_stats(sim.observe, pose, cfg.delta_deg, is_cfg, sweep_key=(0,))
    full_q = _qualifying_clusters(full_c, full_f, source, sweep_cfg) if full_f else []
    mit_c, mit_f = corner_mitigation_with_stats(
        sim.observe, pose, cfg.extension_schedule, cfg.delta_deg, is_cfg, sweep_key=(1,)
    )
    mit_q = _qualifying_clusters(mit_c, mit_f, source, sweep_cfg) if mit_f else []
    return CornerTrialResult(
        source=source,
        full_found=bool(full_q),
        full_recovered=any(on_first_is(c) for c in full_q),
        full_best_correct=on_first_is(full_q[0]) if full_q else False,
        mitigated_found=bool(mit_q),
        mitigated_recovered=any(on_first_is(c) for c in mit_q),
        mitigated_best_correct=on_first_is(mit_q[0]) if mit_q else False,
    )


def run_corner_experiment(cfg: ExperimentConfig, n_trials: int = 100) -> dict:
    results = [corner_trial(cfg, i) for i in range(n_trials)]
    full_bad = [r for r in results if r.full_failed_or_mislabeled]
    rescued = sum(r.mitigated_recovered for r in full_bad)
    return {
        "n_trials": n_trials,
        "full_recovered": sum(r.full_recovered for r in results),
        "full_best_correct": sum(r.full_best_correct for r in results),
        "full_failed_or_mislabeled": len(full_bad),
        "rescued_by_mitigation": rescued,
        "rescue_rate": rescued / len(full_bad) if full_bad else float("nan"),
        "mitigated_recovered": sum(r.mitigated_recovered for r in results),
        "mitigated_rate": sum(r.mitigated_recovered for r in results) / n_trials,
        "mitigated_best_correct": sum(r.mitigated_best_correct for r in results),
    }
