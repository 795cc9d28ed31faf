"""Exception types raised by the solvers."""


class ZKLabError(Exception):
    """Base class for every error raised by zklab."""


class GridError(ZKLabError, ValueError):
    pass


class FieldFormatError(ZKLabError, ValueError):
    """A field dump does not match its header."""


class DensityFloorViolated(ZKLabError):
    """``1 + n`` (or ``1 + eps*n``) dropped below the allowed floor."""


class NoConvergence(ZKLabError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class MonotonicityViolated(ZKLabError):
    """The sub-solution iteration stopped increasing pointwise."""


class CFLViolation(ZKLabError, ValueError):
    pass


class ResonantRoot(ZKLabError, ValueError):
    """omega^2 hits 0 or -a^2, where the equivalent dispersion form is singular."""


class InconsistentProfiles(ZKLabError):
    """The two routes to the second-order longitudinal velocity disagree."""


class FrameMismatch(ZKLabError, ValueError):
    pass


class ConfigError(ZKLabError, ValueError):
    """Raised for unreadable or invalid experiment configuration files."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
