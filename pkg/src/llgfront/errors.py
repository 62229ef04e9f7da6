"""Exception types shared across the package."""


class LLGFrontError(Exception):
    """Base class for all package errors."""


class ChartSingularity(LLGFrontError):
    """The angle chart is evaluated too close to eta = +-pi/2."""


class PoleSingularity(LLGFrontError):
    """The amplitude equations are evaluated too close to |A_3| = 1."""


class SolverDiverged(LLGFrontError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class StepsizeUnderflow(LLGFrontError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class IllConditioned(LLGFrontError):
    """Projection Gram system is numerically singular."""


class NotConverged(LLGFrontError):
    pass


class InsufficientData(LLGFrontError):
    pass


class InsufficientResolution(LLGFrontError):
    pass


class InsufficientEnsemble(InsufficientData):
    pass


class DegenerateTail(LLGFrontError):
    pass


class ConfigError(LLGFrontError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
