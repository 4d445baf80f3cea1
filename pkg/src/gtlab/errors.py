"""Exception hierarchy shared by all modules."""


class GtlabError(Exception):
    """Base class for all library errors."""


class ConfigError(GtlabError, ValueError):
    """Invalid or malformed run configuration."""


class CriticalEnergyError(ConfigError):
    """The energy level coincides with a critical value of the Hamiltonian."""


class FixedPointError(GtlabError):
    """The Hamiltonian vector field vanishes at the requested point."""


class FixedPointAmbiguity(FixedPointError):
    """Every real time is a period of a fixed point; no discrete list exists."""


class NotAPeriodError(GtlabError):
    """The supplied time does not carry one projected point onto the other."""


class NotOnLocus(GtlabError):
    """Point pair is off the recurrence locus where leading asymptotics apply."""


class AccuracyNotReached(GtlabError):
    """Adaptive quadrature failed to meet its tolerance.

    ``achieved`` holds the last error estimate.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved
