"""Exception hierarchy shared by all modules."""


class JumpSPDEError(Exception):
    """Base class for every error raised by the package."""


class SmallJumpMassAbsent(JumpSPDEError):
    """The truncated second moment vanishes, so the 1/alpha scaling is undefined."""


class InfiniteIntensity(JumpSPDEError):
    """The jump rate of the requested band is infinite (inner cutoff is zero)."""


class JumpBudgetExceeded(JumpSPDEError):
    """Expected number of jumps per path exceeds the configured cap."""


class NonFinite(JumpSPDEError):
    """A state became NaN or infinite during time stepping."""


class BlowUpThreshold(JumpSPDEError):
    """Too many paths of an ensemble blew up for the statistics to be trusted."""


class EmptySample(JumpSPDEError):
    """A two-sample statistic was given an empty sample."""


class ConfigError(JumpSPDEError):
    """Invalid run configuration."""


class ParseError(ConfigError):
    pass


class UnknownField(ConfigError):
    pass


class RangeError(ConfigError):
    pass


class InvariantViolation(JumpSPDEError):
    pass
