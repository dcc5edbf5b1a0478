"""Exception hierarchy shared by every module."""


class NecklabError(Exception):
    """Base class for all package errors."""


class ZeroVector(NecklabError, ValueError):
    pass


class NonTangent(NecklabError, ValueError):
    pass


class EmptyRange(NecklabError, ValueError):
    pass


class RangeTooShort(NecklabError, ValueError):
    pass


class Diverged(NecklabError, RuntimeError):
    pass


class LengthOutOfRange(NecklabError, ValueError):
    pass


class OutOfCollar(NecklabError, ValueError):
    pass


class DeltaTooSmall(NecklabError, ValueError):
    pass


class MismatchedDecomposition(NecklabError, ValueError):
    pass


class TooFewSamples(NecklabError, ValueError):
    pass


class DegenerateAxis(NecklabError, ValueError):
    pass


class ConfigError(NecklabError, ValueError):
    pass
