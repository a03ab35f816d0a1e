"""Exception hierarchy. Each error carries the exit code the CLI reports."""


class ParityLabError(ValueError):
    exit_code = 1


class InvalidDimensionError(ParityLabError):
    """Dimension below 2, or otherwise not a valid Hilbert-space size."""

    exit_code = 3


class ParityUndefinedError(ParityLabError):
    """d = 2: the positive and negative permutation families coincide."""

    exit_code = 3


class DimensionMismatchError(ParityLabError):
    exit_code = 3


class UnsupportedDimensionError(ParityLabError):
    """Operation exists only for some dimensions (d = 4 hardware, powers of 2)."""

    exit_code = 4


class NetworkConfigError(ParityLabError):
    exit_code = 5


class SettingsError(ParityLabError):
    exit_code = 5


class TomographyError(ParityLabError):
    exit_code = 6


class ParseError(ParityLabError):
    exit_code = 7


class SelfCheckError(ParityLabError):
    exit_code = 8


class InvalidStateError(ParityLabError):
    """Amplitudes or matrices violating normalisation, unitarity or positivity."""

    exit_code = 3


class InvalidSpecError(ParityLabError):
    exit_code = 3


class EncodingError(ParityLabError):
    """Index outside the range representable by the requested qubit count."""

    exit_code = 3
