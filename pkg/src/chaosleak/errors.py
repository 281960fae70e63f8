"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI in its
``ERROR:<code>:<detail>`` diagnostics. ``ValidationError`` subclasses are bad
inputs (exit status 2); ``ComputationError`` subclasses are failures of an
otherwise valid computation (exit status 3).
"""


class ChaosLeakError(Exception):
    code = "ERROR"


class ValidationError(ChaosLeakError, ValueError):
    code = "INVALID"


class ComputationError(ChaosLeakError, RuntimeError):
    code = "COMPUTATION"


class ParamOutOfDomain(ValidationError):
    code = "PARAM_OUT_OF_DOMAIN"


class InitOutOfDomain(ValidationError):
    code = "INIT_OUT_OF_DOMAIN"


class DimensionMismatch(ValidationError):
    code = "DIMENSION_MISMATCH"


class UnknownMap(ValidationError):
    code = "UNKNOWN_MAP"


class NotOneDimensional(ValidationError):
    code = "NOT_ONE_DIMENSIONAL"


class EmptyInput(ValidationError):
    code = "EMPTY_INPUT"


class BinningMismatch(ValidationError):
    code = "BINNING_MISMATCH"


class InvalidDistribution(ValidationError):
    code = "INVALID_DISTRIBUTION"


class LengthMismatch(ValidationError):
    code = "LENGTH_MISMATCH"


class QOutOfRange(ValidationError):
    code = "Q_OUT_OF_RANGE"


class DOutOfRange(ValidationError):
    code = "D_OUT_OF_RANGE"


class SeriesTooShort(ValidationError):
    code = "SERIES_TOO_SHORT"


class Diverged(ComputationError):
    """Raised when an orbit leaves the divergence bound.

    ``step`` is the iteration index (counted from ``x0``) at which the bound
    was exceeded; ``orbit`` holds the samples recorded before that point.
    """

    code = "DIVERGED"

    def __init__(self, step, orbit=None):
        super().__init__(f"orbit exceeded divergence bound at step {step}")
        self.step = step
        self.orbit = orbit


class EmptyResult(ComputationError):
    code = "EMPTY_RESULT"


class InsufficientSamples(ComputationError):
    code = "INSUFFICIENT_SAMPLES"


class TooFewSamples(ComputationError):
    code = "TOO_FEW_SAMPLES"


class DegenerateJacobian(ComputationError):
    code = "DEGENERATE_JACOBIAN"


class AllPairsDegenerate(ComputationError):
    code = "ALL_PAIRS_DEGENERATE"


class InconsistentItinerary(ComputationError):
    code = "INCONSISTENT_ITINERARY"


class NoConsistentParameter(ComputationError):
    code = "NO_CONSISTENT_PARAMETER"
