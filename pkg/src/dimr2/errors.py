"""Exception hierarchy shared by every dimr2 module."""


class DimR2Error(Exception):
    """Base class for all dimr2 errors."""


class AxisError(DimR2Error, ValueError):
    """An axis index or name does not exist on the tensor."""


class BroadcastError(DimR2Error, ValueError):
    """Two operands have different extents on a shared axis."""


class ShapeError(DimR2Error, ValueError):
    """Target and prediction shapes (or axis names) disagree."""


class RankError(ShapeError):
    """The metric is only defined for a specific rank."""


class SpecError(DimR2Error, ValueError):
    """Invalid (axis, axis_norm, axis_pool) combination."""


class DegenerateInputError(DimR2Error, ValueError):
    """Input has no variability where the metric needs some."""


class ConfigError(DimR2Error, ValueError):
    """Invalid generator or sweep configuration."""


class FormatError(DimR2Error, ValueError):
    """A tensor file is malformed or uses an unsupported layout."""
