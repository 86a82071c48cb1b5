"""Exception hierarchy.

Every error raised on purpose by the toolkit derives from ``TasEvalError`` so
callers (and the CLI) can separate data problems from programming errors.
"""


class TasEvalError(Exception):
    """Base class for toolkit errors."""


# image containers / codecs
class MalformedImage(TasEvalError, ValueError):
    pass


class UnsupportedFormat(TasEvalError, ValueError):
    pass


class WrongColorspace(TasEvalError, ValueError):
    pass


class ZeroDimension(TasEvalError, ValueError):
    pass


class NonPositiveSigma(TasEvalError, ValueError):
    pass


class InvalidBankParams(TasEvalError, ValueError):
    pass


# metrics
class ShapeMismatch(TasEvalError, ValueError):
    pass


class ImageTooSmall(TasEvalError, ValueError):
    pass


class DimensionMismatch(TasEvalError, ValueError):
    pass


class DegenerateCovariance(TasEvalError, ValueError):
    pass


class DegenerateInput(TasEvalError, ValueError):
    pass


class NonFiniteInput(TasEvalError, ValueError):
    pass


class EmptyMask(TasEvalError, ValueError):
    pass


# style extraction
class UncoveredCodepoint(TasEvalError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EmptyText(TasEvalError, ValueError):
    pass


class MissingExternalFile(TasEvalError, FileNotFoundError):
    pass


# statistics / text metrics
class LengthMismatch(TasEvalError, ValueError):
    pass


class ConstantInput(TasEvalError, ValueError):
    pass


class DegenerateVariance(TasEvalError, ValueError):
    pass


class EmptyBatch(TasEvalError, ValueError):
    pass


class MissingGroundTruth(TasEvalError, ValueError):
    pass


# corpus handling
class ParseError(TasEvalError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicatePairId(TasEvalError, ValueError):
    def __init__(self, pair_id):
        super().__init__(f"duplicate pair id {pair_id!r}")
        self.pair_id = pair_id


class InvalidConfig(TasEvalError, ValueError):
    pass


class ItemMismatch(TasEvalError, ValueError):
    pass
