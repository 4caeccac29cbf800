"""Exception hierarchy.

Three families map onto the CLI exit codes: invalid input or domain (2),
mismatched data (3) and numerical failure (4).
"""


class WeakTomoError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(WeakTomoError, ValueError):
    pass


class DataMismatch(WeakTomoError, ValueError):
    pass


class NumericalFailure(WeakTomoError, ArithmeticError):
    pass


class NotPrime(InvalidInput):
    pass


class NotInvertible(InvalidInput):
    pass


class LambdaOutOfRange(InvalidInput):
    pass


class NotHermitian(InvalidInput):
    pass


class InvalidState(InvalidInput):
    pass


class WrongDimension(InvalidInput):
    pass


class BadAngle(InvalidInput):
    pass


class BadIndex(InvalidInput):
    pass


class IncompleteData(InvalidInput):
    pass


class DegenerateCondition(InvalidInput):
    pass


class ConfigError(InvalidInput):
    pass


class DimensionMismatch(DataMismatch):
    pass


class NotPositiveDefinite(NumericalFailure):
    pass


class DegenerateSpectrum(NumericalFailure):
    pass


class SingularGram(NumericalFailure):
    pass


class LabelMismatch(NumericalFailure):
    pass


class NotOrthonormal(NumericalFailure):
    pass


class ValidationFailed(NumericalFailure):
    """Raised when a constructed basis family violates one of its identities.

    ``failures`` maps identity name to the offending residual.
    """

    def __init__(self, failures, tolerance):
        self.failures = dict(failures)
        self.tolerance = tolerance
        detail = ", ".join(f"{k}={v:.3e}" for k, v in self.failures.items())
        super().__init__(f"identities violated (tol {tolerance:.1e}): {detail}")
