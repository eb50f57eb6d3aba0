"""Exception hierarchy. The command-line layer maps these onto exit codes."""


class HemsimError(Exception):
    """Base class for every error raised by this package."""


class NormalizationError(HemsimError):
    """A vector could not be turned into a valid probability distribution."""


class InferenceError(HemsimError):
    """A belief update failed, e.g. an observation impossible under the prior."""


class ModelError(HemsimError):
    """Inconsistent model structure or mismatched dimensions."""


class PlanningError(HemsimError):
    """Policy evaluation failed: bad policy length, short forecast, and so on."""


class NoFeasiblePolicyError(PlanningError):
    """Every candidate policy carries an infinite expected free energy."""


class BuildError(HemsimError):
    """Invalid physical or preference parameters while building an agent model."""


class DataValidationError(HemsimError):
    """Malformed or out-of-range input time-series data."""


class ConfigError(HemsimError):
    """Invalid scenario configuration."""
