"""Exception types shared across the toolkit."""


class MarginProbeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MarginProbeError):
    """Malformed or out-of-range configuration input."""


class CutOutOfBand(MarginProbeError):
    """Channel under test does not fit inside the transmission band."""


class OverlappingChannels(MarginProbeError):
    """Two channel supports intersect."""


class QuadratureNotConverged(MarginProbeError):
    """Adaptive quadrature exhausted its subdivision budget."""


class DegenerateFeature(MarginProbeError):
    """A feature column has zero variance on the training split."""


class SingularDesign(MarginProbeError):
    """Regression normal matrix is numerically singular."""


class DegeneratePoints(MarginProbeError):
    """Calibration points do not determine an affine fit."""
