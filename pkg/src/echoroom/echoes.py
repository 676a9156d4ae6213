"""Peak picking: turn a sampled RIR into candidate times of arrival."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .acoustics import Rir
from .errors import DegenerateInput, EmptySignal
from .tolerances import TOL

__all__ = ["EchoEvent", "PeakPickConfig", "extract_toas"]


@dataclass(frozen=True)
class EchoEvent:
    """One picked peak: arrival time, magnitude, and the mic that heard it."""

    toa: float
    amplitude: float
    mic_index: int

    def __post_init__(self) -> None:
        if self.toa < 0 or self.amplitude <= 0:
            raise DegenerateInput("echo events need toa >= 0 and amplitude > 0")


@dataclass(frozen=True)
class PeakPickConfig:
    rel_threshold: float = 0.02
    min_separation: int = 8
    max_peaks: int = 40

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_threshold < 1.0):
            raise DegenerateInput("rel_threshold must be in (0, 1)")
        if self.min_separation < 1:
            raise DegenerateInput("min_separation must be >= 1 sample")
        if self.max_peaks < 4:
            raise DegenerateInput("max_peaks must be >= 4")


def extract_toas(rir: Rir, cfg: PeakPickConfig) -> list[EchoEvent]:
    """Local maxima of |samples| above rel_threshold x global max, at least
    min_separation samples apart, largest max_peaks kept, ascending in time.

    The direct-path peak is included; callers that know the rig geometry
    discard it by distance.
    """
    mag = np.abs(rir.samples)
    peak = float(mag.max(initial=0.0))
    if peak < TOL.signal_floor:
        raise EmptySignal("all samples below absolute floor")
    idx = _backend.pick_peaks(mag, cfg.rel_threshold * peak, cfg.min_separation, cfg.max_peaks)
    return [
        EchoEvent(float(i) / rir.sample_rate, float(mag[i]), rir.mic_index)
        for i in idx
    ]
