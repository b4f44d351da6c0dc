"""Exception hierarchy shared by all phasesync modules."""


class PhaseSyncError(Exception):
    pass


class ConfigError(PhaseSyncError):
    """Malformed model file or invalid run parameters."""


class DegreeTooHigh(PhaseSyncError):
    """Root-scan grid too coarse to resolve every sign change of the series."""


class EmptyGrid(PhaseSyncError):
    pass


class NotNonVanishing(PhaseSyncError):
    """The non-vanishing density solver was handed a coupling with zeros."""


class IllConditioned(PhaseSyncError):
    pass


class NonTransversalZero(PhaseSyncError):
    pass


class MidpointMismatch(PhaseSyncError):
    """Two legs of the singular interval solve disagree at the matching point."""


class InvalidTimes(PhaseSyncError):
    pass


class StaleDensity(PhaseSyncError):
    """Density does not satisfy the stationary equation of the given model."""


class VanishingNoise(PhaseSyncError):
    pass


class InvalidParams(PhaseSyncError):
    pass


class NoDecayWindow(PhaseSyncError):
    pass


class InvalidHorizon(PhaseSyncError):
    pass


class InvalidInput(PhaseSyncError):
    pass


class DepthExceedsBuffer(PhaseSyncError):
    pass
