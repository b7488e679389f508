"""Exception types shared across the package.

Everything derives from VibeLabError so callers can catch broadly; most
types also subclass ValueError because they signal bad inputs.
"""


class VibeLabError(Exception):
    """Base class for all vibelab errors."""


class ParameterError(VibeLabError, ValueError):
    """A parameter is outside its documented range or inconsistent."""


class ConfigurationError(VibeLabError, ValueError):
    """A scene/radar configuration is physically or structurally invalid."""


class DegenerateGeometryError(VibeLabError, ValueError):
    """Geometry collapses (e.g. zero source-to-point distance)."""


class DegenerateFitError(VibeLabError, ValueError):
    """Circle fit is underdetermined (collinear or coincident points)."""


class CalibrationError(VibeLabError, ValueError):
    """Speech-aware calibration cannot run (e.g. no usable silence samples)."""


class InsufficientDataError(VibeLabError, ValueError):
    """A series is too short for the requested operation."""


class UndefinedStatisticError(VibeLabError, ValueError):
    """A statistic is undefined for the given data (e.g. zero variance)."""


class EmptySelectionError(VibeLabError, ValueError):
    """Target selection found no cells above the noise floor."""


class EmptySegmentError(VibeLabError, ValueError):
    """A segment holds no frames to summarize."""


class FeatureError(VibeLabError, ValueError):
    """Feature assembly is inconsistent across objects or segments."""


class ClusterError(VibeLabError, RuntimeError):
    """EM fitting failed persistently (degenerate components)."""


class MetricError(VibeLabError, ValueError):
    """Metric inputs are incompatible (shape/length/power)."""


class StageError(VibeLabError, RuntimeError):
    """A pipeline stage failed; carries the stage name and target id."""

    def __init__(self, stage, target_id, cause):
        self.stage = stage
        self.target_id = target_id
        self.cause = cause
        where = f"stage '{stage}'"
        if target_id is not None:
            where += f", target {target_id}"
        super().__init__(f"{where}: {cause}")
