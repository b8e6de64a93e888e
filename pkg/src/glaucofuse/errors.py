"""Exception hierarchy.

Errors are grouped so the CLI can map them to exit codes: configuration
problems are usage errors, everything tied to input data is a data error, and
non-finite training state is a numeric failure.
"""


class GlaucoFuseError(Exception):
    """Base class for all package errors."""


class ConfigError(GlaucoFuseError, ValueError):
    pass


class DataError(GlaucoFuseError, ValueError):
    pass


class NumericError(GlaucoFuseError, ArithmeticError):
    pass


class InvalidConfig(ConfigError):
    pass


class NonPositiveT(ConfigError):
    def __init__(self, t):
        super().__init__(f"milestone offset t must be positive, got {t!r}")
        self.t = t


class UnknownLabelValue(DataError):
    def __init__(self, value, count):
        super().__init__(f"mask gray level {value} is not in the label map ({count} pixels)")
        self.value = value
        self.count = count


class EmptyImage(DataError):
    pass


class EmptyDisc(DataError):
    pass


class EmptyRegion(DataError):
    def __init__(self, region):
        super().__init__(f"region {region!s} has no pixels")
        self.region = region


class CoordOutOfBounds(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class ChannelCountMismatch(DataError):
    pass


class UnsortedMilestones(DataError):
    pass


class MissingFile(DataError, FileNotFoundError):
    pass


class MalformedRow(DataError):
    def __init__(self, line, reason=""):
        msg = f"malformed manifest row at line {line}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line = line


class UnknownLabel(DataError):
    def __init__(self, label, line):
        super().__init__(f"unknown label {label!r} at line {line}")
        self.label = label
        self.line = line


class UnknownSplit(DataError):
    def __init__(self, split, line):
        super().__init__(f"unknown split {split!r} at line {line}")
        self.split = split
        self.line = line


class EmptySplit(DataError):
    pass


class SingleClassData(DataError):
    pass


class NoPositives(DataError):
    pass


class NoNegatives(DataError):
    pass


class CheckpointMismatch(DataError):
    pass
