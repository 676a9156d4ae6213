"""Central numeric tolerance record.

All geometric tolerances are lengths in meters unless noted. Keeping them in
one place makes experiments reproducible and lets tests tighten or relax a
single knob instead of scattering magic epsilons.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # Generic geometric epsilon: point coincidence, boundary fuzz.
    geom_eps: float = 1e-9
    # |sin(angle between normals)| below which two lines count as parallel.
    parallel_eps: float = 1e-9
    # Minimum segment length.
    min_segment_len: float = 1e-9
    # Minimum source-to-image-source separation for a usable wall bisector.
    min_source_is_dist: float = 1e-6
    # 2x2 determinant threshold for the trilateration solve.
    det_eps: float = 1e-9
    # Signals with max |amplitude| below this are considered empty.
    signal_floor: float = 1e-12


TOL = Tolerances()
