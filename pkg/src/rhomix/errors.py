"""Exception hierarchy.

Input/contract violations derive from :class:`ValidationError` (CLI exit code 1);
algorithmic failures derive from :class:`AlgorithmFailure` (CLI exit code 2).
"""


class ValidationError(ValueError):
    pass


class AlgorithmFailure(RuntimeError):
    pass


class NotSquare(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class RankDeficient(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class InvalidProbability(ValidationError):
    pass


class InvalidDensityMatrix(ValidationError):
    pass


class NotBistochastic(ValidationError):
    pass


class TargetTooShort(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class NotMajorized(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ZeroWeight(ValidationError):
    pass


class PureState(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class NonConvergent(AlgorithmFailure):
    def __init__(self, message, sweeps=None, distance=None):
        super().__init__(message)
        self.sweeps = sweeps
        self.distance = distance


class NotCertified(AlgorithmFailure):
    def __init__(self, message, certificate=None, bistochastic=None):
        super().__init__(message)
        self.certificate = certificate
        self.bistochastic = bistochastic
