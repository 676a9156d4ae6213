"""Exception types shared across the package."""


class EchoRoomError(Exception):
    """Base class for all package errors."""


class DegenerateInput(EchoRoomError):
    """Geometric input too degenerate to work with (coincident points etc.)."""


class SourceOutsideRoom(EchoRoomError):
    """Sound source placed outside (or on the boundary of) the room polygon."""


class MicOutsideRoom(EchoRoomError):
    """Microphone placed outside (or on the boundary of) the room polygon."""


class CoincidentSourceMic(EchoRoomError):
    """Source and microphone coincide; no direct-path distance exists."""


class EmptySignal(EchoRoomError):
    """Signal is numerically zero everywhere; nothing to pick peaks from."""


class SingularGeometry(EchoRoomError):
    """Microphone triple is (near-)collinear; trilateration system singular."""


class MaxStepsExceeded(EchoRoomError):
    """Planner hit its stop budget without closing the room."""


class ConfigError(EchoRoomError):
    """Invalid experiment configuration."""
