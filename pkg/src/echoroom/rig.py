"""The sensing rig: four mics on rotatable, extendable arms around the source.

A rotation sweep re-observes the same spot at many arm angles and pools the
candidate image sources; real image sources re-appear at every orientation
while combinatorial ghosts move, so clustering the pooled candidates and
keeping the biggest cluster nearest the source isolates the true first image
source. When the rig sits near a corner, first- and second-order arrivals
merge at large arm extension; re-running the sweep at shorter extensions
(corner mitigation) separates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Protocol, Sequence

import numpy as np

from .errors import DegenerateInput
from .geometry import Point2
from .trilateration import CandidateIS, CommonISConfig, MicArrayObservation, find_common_is

__all__ = [
    "RigPose",
    "ISCluster",
    "SweepConfig",
    "SweepOracle",
    "mic_positions",
    "rotation_sweep",
    "sweep_with_stats",
    "cluster_candidates",
    "pick_best_cluster",
    "corner_mitigation_sweep",
]

MAX_ARM_EXTENSION = 0.5


@dataclass(frozen=True)
class RigPose:
    """Rig state: source position, arm angle (folded into [0, pi/2) by the
    4-fold symmetry), and arm extension in (0, 0.5] m."""

    center: Point2
    arm_angle: float
    arm_extension: float

    def __post_init__(self) -> None:
        if not (0.0 < self.arm_extension <= MAX_ARM_EXTENSION):
            raise DegenerateInput("arm extension must lie in (0, 0.5] m")
        object.__setattr__(self, "arm_angle", self.arm_angle % (math.pi / 2.0))


@dataclass(frozen=True)
class ISCluster:
    members: tuple[CandidateIS, ...]
    centroid: Point2

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def support(self) -> int:
        """Distinct observations backing the cluster: one vote per sweep
        orientation, so stray ghost combinations riding along in the same
        orientations cannot outvote a real image source. Untagged members
        count individually."""
        tagged = {m.observation for m in self.members if m.observation >= 0}
        untagged = sum(1 for m in self.members if m.observation < 0)
        return len(tagged) + untagged


@dataclass(frozen=True)
class SweepConfig:
    delta_deg: float = 10.0
    cluster_radius: float = 0.1
    min_support_floor: int = 3
    min_support_frac: float = 0.25
    extension_schedule: tuple[float, ...] = (0.5, 0.35, 0.2, 0.1)

    def min_support(self, n_observations: int) -> int:
        return max(self.min_support_floor, int(round(self.min_support_frac * n_observations)))


class SweepOracle(Protocol):
    """Produces an observation for a rig pose, or None when the pose is
    physically infeasible (a mic would hit a wall). ``key`` keys the
    measurement-noise stream so repeated observations are independent."""

    def __call__(self, pose: RigPose, key: tuple[int, ...]) -> Optional[MicArrayObservation]: ...


def mic_positions(pose: RigPose) -> tuple[Point2, Point2, Point2, Point2]:
    """Four mics at arm_extension from the center, 90 degrees apart."""
    pts = []
    for k in range(4):
        a = pose.arm_angle + k * math.pi / 2.0
        pts.append(
            Point2(
                pose.center.x + pose.arm_extension * math.cos(a),
                pose.center.y + pose.arm_extension * math.sin(a),
            )
        )
    return tuple(pts)


def sweep_with_stats(
    sim_oracle: SweepOracle,
    pose: RigPose,
    delta_deg: float,
    is_cfg: CommonISConfig,
    sweep_key: tuple[int, ...] = (),
    observation_base: int = 0,
) -> tuple[list[CandidateIS], int]:
    """Rotation sweep returning (pooled candidates, feasible orientations).

    Candidates are tagged with a per-orientation observation id (offset by
    observation_base) for support counting."""
    n = 360.0 / delta_deg
    if abs(n - round(n)) > 1e-9:
        raise DegenerateInput("delta_deg must divide 360")
    candidates: list[CandidateIS] = []
    feasible = 0
    for k in range(int(round(n))):
        angle = pose.arm_angle + math.radians(k * delta_deg)
        obs = sim_oracle(replace(pose, arm_angle=angle), sweep_key + (k,))
        if obs is None:
            continue
        feasible += 1
        candidates.extend(
            replace(c, observation=observation_base + k)
            for c in find_common_is(obs, is_cfg)
        )
    return candidates, feasible


def rotation_sweep(
    sim_oracle: SweepOracle,
    pose: RigPose,
    delta_deg: float,
    is_cfg: CommonISConfig | None = None,
    sweep_key: tuple[int, ...] = (),
) -> list[CandidateIS]:
    """Pooled common-IS candidates over all arm angles at fixed center and
    extension."""
    cands, _ = sweep_with_stats(sim_oracle, pose, delta_deg, is_cfg or CommonISConfig(), sweep_key)
    return cands


def corner_mitigation_sweep(
    sim_oracle: SweepOracle,
    pose: RigPose,
    extensions: Sequence[float],
    delta_deg: float = 10.0,
    is_cfg: CommonISConfig | None = None,
    sweep_key: tuple[int, ...] = (),
) -> list[CandidateIS]:
    """Rotation sweeps at every arm extension in the schedule, concatenated.

    Intended for stops where the plain sweep finds nothing usable: shrinking
    the source-mic distance pulls merged corner arrivals apart.
    """
    cands, _ = corner_mitigation_with_stats(sim_oracle, pose, extensions, delta_deg, is_cfg, sweep_key)
    return cands


def corner_mitigation_with_stats(
    sim_oracle: SweepOracle,
    pose: RigPose,
    extensions: Sequence[float],
    delta_deg: float = 10.0,
    is_cfg: CommonISConfig | None = None,
    sweep_key: tuple[int, ...] = (),
) -> tuple[list[CandidateIS], int]:
    cfg = is_cfg or CommonISConfig()
    out: list[CandidateIS] = []
    feasible = 0
    n_orient = int(round(360.0 / delta_deg))
    for j, ext in enumerate(extensions):
        if not (0.0 < ext <= MAX_ARM_EXTENSION):
            raise DegenerateInput("extensions must lie in (0, 0.5] m")
        c, f = sweep_with_stats(
            sim_oracle,
            replace(pose, arm_extension=ext),
            delta_deg,
            cfg,
            sweep_key + (j,),
            observation_base=j * n_orient,
        )
        out.extend(c)
        feasible += f
    return out, feasible


def _canonical(candidates: Sequence[CandidateIS]) -> list[CandidateIS]:
    return sorted(candidates, key=lambda c: (c.residual, c.position.x, c.position.y))


def cluster_candidates(candidates: Sequence[CandidateIS], cluster_radius: float) -> list[ISCluster]:
    """Greedy most-neighbors agglomeration.

    Repeatedly seed from the unassigned candidate with the most unassigned
    neighbors within cluster_radius (ties: canonical candidate order), absorb
    every unassigned candidate within cluster_radius of the seed, and set the
    centroid to the member mean. Input order does not matter: candidates are
    canonicalized first, so the partition is deterministic.
    """
    if cluster_radius <= 0:
        raise DegenerateInput("cluster_radius must be positive")
    cands = _canonical(candidates)
    n = len(cands)
    if n == 0:
        return []
    xy = np.asarray([[c.position.x, c.position.y] for c in cands])
    nbr_idx, offsets = _neighbor_lists(xy, cluster_radius)
    unassigned = np.ones(n, dtype=bool)
    clusters: list[ISCluster] = []
    counts = np.empty(n, dtype=np.int64)
    while unassigned.any():
        # Unassigned neighbors per unassigned candidate (CSR reduce).
        live = unassigned[nbr_idx].astype(np.int64)
        counts[:] = np.add.reduceat(live, offsets[:-1]) if nbr_idx.size else 0
        counts[offsets[:-1] == offsets[1:]] = 0
        counts[~unassigned] = -1
        seed = int(np.argmax(counts))  # first max in canonical order
        nbrs = nbr_idx[offsets[seed] : offsets[seed + 1]]
        members_idx = nbrs[unassigned[nbrs]]
        unassigned[members_idx] = False
        members = tuple(cands[i] for i in members_idx)
        cx = float(np.mean(xy[members_idx, 0]))
        cy = float(np.mean(xy[members_idx, 1]))
        clusters.append(ISCluster(members, Point2(cx, cy)))
    return clusters


def _neighbor_lists(xy: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """CSR neighbor lists (including self) within radius, via grid hashing."""
    n = xy.shape[0]
    cells = np.floor(xy / radius).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, (cx, cy) in enumerate(map(tuple, cells)):
        buckets.setdefault((cx, cy), []).append(i)
    r2 = radius * radius
    nbr_chunks: list[np.ndarray] = []
    offsets = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        cx, cy = cells[i]
        cand: list[int] = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cand.extend(buckets.get((cx + dx, cy + dy), ()))
        cand_arr = np.asarray(cand, dtype=np.int64)
        d = xy[cand_arr] - xy[i]
        keep = cand_arr[(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]) <= r2]
        keep.sort()
        nbr_chunks.append(keep)
        offsets[i + 1] = offsets[i] + keep.size
    nbr_idx = np.concatenate(nbr_chunks) if nbr_chunks else np.empty(0, dtype=np.int64)
    return nbr_idx, offsets


def pick_best_cluster(
    clusters: Sequence[ISCluster], source: Point2, min_support: int = 3
) -> Optional[ISCluster]:
    """Best-supported cluster with at least min_support observations behind
    it; ties go to the one whose centroid is closest to the source."""
    eligible = [cl for cl in clusters if cl.support >= min_support]
    if not eligible:
        return None
    return min(
        eligible,
        key=lambda cl: (
            -cl.support,
            cl.centroid.distance_to(source),
            cl.centroid.x,
            cl.centroid.y,
        ),
    )
