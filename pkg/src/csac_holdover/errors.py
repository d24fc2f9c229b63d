"""Exception hierarchy shared across the package."""


class HoldoverError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(HoldoverError):
    """Malformed input text (CSV/JSON); message names the 1-based line where known."""


class OrderingError(HoldoverError):
    """Relative epochs are not strictly increasing."""


class CadenceError(HoldoverError):
    """Epoch spacing disagrees with the declared sampling cadence."""


class ValidationError(HoldoverError):
    """A value violates a data-model invariant."""


class BoundsError(HoldoverError):
    """An index or count falls outside its valid range."""


class AlignmentError(HoldoverError):
    """Datasets that must share epochs/metadata do not line up."""


class MetadataError(HoldoverError):
    """A required per-sample quality field (e.g. TDOP) is absent."""


class InsufficientDataError(HoldoverError):
    """Too few values for the requested statistic."""


class DegenerateGeometryError(HoldoverError):
    """Satellite geometry is rank-deficient or numerically singular."""


class FitError(HoldoverError):
    """Regression design is rank-deficient or otherwise unsolvable."""


class ZeroWeightError(HoldoverError):
    """A sample would receive weight zero, which would silently drop it."""


class ConfigError(HoldoverError):
    """A configuration file or flag set cannot be interpreted."""
