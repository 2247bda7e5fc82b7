"""Exception types raised across the package."""


class ConfigError(ValueError):
    """A configuration value violates a constraint.

    ``field`` names the offending parameter and ``bound`` the constraint it
    broke, so callers (the CLI, the service) can report them verbatim.
    """

    def __init__(self, field: str, bound: str, message: str | None = None):
        self.field = field
        self.bound = bound
        super().__init__(message or f"{field}: must satisfy {bound}")

    @property
    def kind(self) -> str:
        return type(self).__name__


class InvalidField(ConfigError):
    pass


class NpTooSmall(ConfigError):
    pass


class DelayAliasing(ConfigError):
    pass


class PilotOverlap(ConfigError):
    pass


class PilotOutOfBand(ConfigError):
    pass


class ShapeMismatch(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class ModelValidity(ConfigError):
    pass


class EstimationError(RuntimeError):
    """Numerical failure inside an estimator or sampler."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class DegenerateRotation(EstimationError):
    pass


class IllConditionedLS(EstimationError):
    pass


class NoSignal(EstimationError):
    pass


class ProfileInfeasible(EstimationError):
    pass


class GridTooLarge(ValueError):
    pass
