"""Forward acoustic model: image-source enumeration and RIR synthesis.

The room impulse response seen by a microphone is modeled as a train of
attenuated impulses, one per image source, plus white measurement noise:
an order-n image source is the source mirrored across n walls (consecutive
walls distinct), its amplitude is the product of the wall absorption factors
divided by travel distance, and its arrival sample is the rounded
time-of-flight. No fractional-delay interpolation is applied, so one sample
(c / sample_rate, about 3.6 mm at 96 kHz / 343 m/s) is the quantization floor
of every downstream range estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CoincidentSourceMic, DegenerateInput, MicOutsideRoom, SourceOutsideRoom
from .geometry import Line2, Point2, Polygon2, Segment2, mirror_point, polygon_contains, rectangle
from .tolerances import TOL

__all__ = [
    "Room",
    "ImageSource",
    "SimConfig",
    "Rir",
    "enumerate_image_sources",
    "toa",
    "synthesize_rir",
    "rng_from_key",
]

# Spherical-spreading floor: avoids amplitude blow-up for near-zero distances.
MIN_SPREAD_DISTANCE = 0.01


def rng_from_key(root_seed: int, key: tuple[int, ...] = ()) -> np.random.Generator:
    """Deterministic, stateless stream derivation from an integer seed and a
    structured key. SFC64 is used for raw throughput; noise generation
    dominates batch runtime."""
    ss = np.random.SeedSequence(root_seed, spawn_key=key)
    return np.random.Generator(np.random.SFC64(ss))


@dataclass(frozen=True)
class Room:
    """Ground-truth room: a CCW polygon whose edges are reflective walls."""

    polygon: Polygon2
    absorption: tuple[float, ...]

    def __post_init__(self) -> None:
        betas = tuple(float(b) for b in self.absorption)
        if len(betas) != len(self.polygon.vertices):
            raise DegenerateInput("need one absorption factor per wall")
        if any(not (0.0 < b <= 1.0) for b in betas):
            raise DegenerateInput("absorption factors must lie in (0, 1]")
        object.__setattr__(self, "absorption", betas)

    @classmethod
    def from_polygon(cls, polygon: Polygon2, beta: float | Sequence[float] = 0.9) -> "Room":
        if isinstance(beta, (int, float)):
            betas: tuple[float, ...] = (float(beta),) * len(polygon.vertices)
        else:
            betas = tuple(float(b) for b in beta)
        return cls(polygon, betas)

    @classmethod
    def rectangular(cls, width: float, height: float, beta: float = 0.9) -> "Room":
        return cls.from_polygon(rectangle(width, height), beta)

    @property
    def walls(self) -> tuple[Segment2, ...]:
        return self.polygon.edges()

    def wall_lines(self) -> tuple[Line2, ...]:
        return tuple(seg.line() for seg in self.walls)


@dataclass(frozen=True)
class ImageSource:
    position: Point2
    order: int
    wall_path: tuple[int, ...]
    amplitude: float

    def __post_init__(self) -> None:
        if self.order != len(self.wall_path):
            raise DegenerateInput("image-source order must equal its wall path length")
        for a, b in zip(self.wall_path, self.wall_path[1:]):
            if a == b:
                raise DegenerateInput("consecutive wall reflections must differ")


@dataclass(frozen=True)
class SimConfig:
    speed_of_sound: float = 343.0
    sample_rate: float = 96000.0
    rt60: float = 0.8
    max_order: int = 3
    noise_snr_db: float = 30.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.speed_of_sound <= 0 or self.sample_rate <= 0 or self.rt60 <= 0:
            raise DegenerateInput("speed of sound, sample rate and rt60 must be positive")
        if self.max_order < 1:
            raise DegenerateInput("max_order must be >= 1")

    @property
    def n_samples(self) -> int:
        return math.ceil(self.rt60 * self.sample_rate)

    @property
    def sample_distance(self) -> float:
        """Range covered by one sample period, the quantization floor."""
        return self.speed_of_sound / self.sample_rate


@dataclass(frozen=True)
class Rir:
    samples: np.ndarray
    sample_rate: float
    mic_index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))


def enumerate_image_sources(room: Room, source: Point2, max_order: int) -> list[ImageSource]:
    """All image sources up to max_order, breadth-first by order.

    Each order-(n+1) image mirrors an order-n image across any wall other
    than the last one in its path; coincident positions reached by different
    paths are kept as separate entries. Amplitude carries the product of wall
    absorption factors along the path (distance attenuation is applied at
    synthesis time).
    """
    if not polygon_contains(room.polygon, source):
        raise SourceOutsideRoom(f"source {source} not strictly inside the room")
    if max_order < 1:
        raise DegenerateInput("max_order must be >= 1")
    lines = room.wall_lines()
    result = [ImageSource(source, 0, (), 1.0)]
    frontier = [result[0]]
    for _ in range(max_order):
        nxt = []
        for img in frontier:
            last = img.wall_path[-1] if img.wall_path else None
            for wi, line in enumerate(lines):
                if wi == last:
                    continue
                nxt.append(
                    ImageSource(
                        mirror_point(img.position, line),
                        img.order + 1,
                        img.wall_path + (wi,),
                        img.amplitude * room.absorption[wi],
                    )
                )
        result.extend(nxt)
        frontier = nxt
    return result


def toa(image: ImageSource, mic: Point2, c: float) -> float:
    """Time of arrival: image-to-microphone distance over the speed of sound."""
    if c <= 0:
        raise DegenerateInput("speed of sound must be positive")
    return image.position.distance_to(mic) / c


def synthesize_rir(
    room: Room,
    source: Point2,
    mic: Point2,
    cfg: SimConfig,
    mic_index: int = 1,
    images: Sequence[ImageSource] | None = None,
) -> Rir:
    """Sampled impulse-train RIR for one microphone, with additive noise.

    Every image source whose time of arrival falls inside the rt60 window
    contributes amplitude / max(distance, 1 cm) at the rounded sample index
    (colliding arrivals sum). White Gaussian noise is added at
    cfg.noise_snr_db relative to the RMS of the clean signal, on a stream
    derived from (cfg.rng_seed, mic_index) so microphones are independent and
    synthesis order is irrelevant.

    ``images`` may carry a precomputed enumerate_image_sources(room, source,
    cfg.max_order) result; rig sweeps reuse one enumeration across all mics
    and orientations at a fixed center.
    """
    if not polygon_contains(room.polygon, source):
        raise SourceOutsideRoom(f"source {source} not strictly inside the room")
    if not polygon_contains(room.polygon, mic):
        raise MicOutsideRoom(f"mic {mic} not strictly inside the room")
    if source.distance_to(mic) <= TOL.geom_eps:
        raise CoincidentSourceMic("source and microphone coincide")

    n = cfg.n_samples
    samples = np.zeros(n, dtype=np.float64)
    indices = []
    amps = []
    if images is None:
        images = enumerate_image_sources(room, source, cfg.max_order)
    for img in images:
        dist = img.position.distance_to(mic)
        t = dist / cfg.speed_of_sound
        if t >= cfg.rt60:
            continue
        idx = int(round(t * cfg.sample_rate))
        if idx >= n:
            continue
        indices.append(idx)
        amps.append(img.amplitude / max(dist, MIN_SPREAD_DISTANCE))
    if indices:
        np.add.at(samples, np.asarray(indices, dtype=np.intp), np.asarray(amps))

    if math.isfinite(cfg.noise_snr_db):
        rms = math.sqrt(float(np.mean(samples * samples)))
        sigma = rms * 10.0 ** (-cfg.noise_snr_db / 20.0)
        if sigma > 0.0:
            rng = rng_from_key(cfg.rng_seed, (int(mic_index),))
            samples += sigma * rng.standard_normal(n)
    return Rir(samples, cfg.sample_rate, mic_index)


def dump_rir(rir: Rir, path) -> None:
    """Write one RIR as plain text: sample_index amplitude, one pair per line."""
    with open(path, "w", encoding="ascii") as fh:
        for i, v in enumerate(rir.samples):
            fh.write(f"{i} {float(v)!r}\n")
