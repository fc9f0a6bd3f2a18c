"""Exception taxonomy shared across the package.

Three branches matter to callers: ConfigError (bad request, CLI exit 2),
DataError (unusable input, CLI exit 3) and NumericalError (a computation
failed or degenerated, CLI exit 4).
"""


class VolcastError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(VolcastError):
    """Invalid configuration or arguments."""


class DataError(VolcastError):
    """Input data is missing, malformed, or insufficient."""


class NumericalError(VolcastError):
    """A numerical routine failed or hit a degenerate instance."""


# -- configuration ----------------------------------------------------------

class InvalidConfig(ConfigError):
    pass


class ExpandingSchemeRejected(ConfigError):
    """Conditional predictive-ability machinery requires a rolling scheme."""


# -- data -------------------------------------------------------------------

class MissingColumn(DataError):
    pass


class NonAlignedCalendar(DataError):
    """Firms do not share the same strictly increasing trading calendar."""


class NonFiniteValue(DataError):
    pass


class NegativeRV(DataError):
    pass


class TooFewObservations(DataError):
    pass


class EmptyDay(DataError):
    pass


class TooFewIntraday(DataError):
    pass


class WindowExceedsSeries(DataError):
    pass


class MeasureUnavailable(DataError):
    """A model needs bpv/rq/jump but the panel only carries rv."""


class EmptyRangeAfterTrim(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class TooFewRows(DataError):
    pass


class InsufficientWindow(DataError):
    """Estimation window leaves no forecast origin."""


class EmptySequence(DataError):
    pass


class EmptyResults(DataError):
    pass


# -- numerics ---------------------------------------------------------------

class SingularDesign(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class DegenerateSeries(NumericalError):
    """A statistic is undefined because its input has no variation."""


class SingularOmega(NumericalError):
    """Instrument second-moment matrix is numerically singular."""


class ExplosiveDynamics(NumericalError):
    """A simulated recursion left the stationary region."""


class ZeroVarianceColumn(UserWarning):
    """Warning category: a constant design column was dropped."""
