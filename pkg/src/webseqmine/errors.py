"""Exception types raised across the package."""


class WebSeqMineError(Exception):
    """Base class for all errors raised by this package."""


class MalformedLine(WebSeqMineError, ValueError):
    """A log or sequence line does not match the expected grammar."""

    def __init__(self, message, line=None, lineno=None):
        super().__init__(message)
        self.line = line
        self.lineno = lineno


class UnsupportedFormat(WebSeqMineError, ValueError):
    pass


class UnsortedInput(WebSeqMineError, ValueError):
    pass


class UnknownId(WebSeqMineError, KeyError):
    pass


class EmptyFile(WebSeqMineError, ValueError):
    pass


class TooLarge(WebSeqMineError, ValueError):
    """Brute-force enumeration would exceed its size guard."""


class NoTimestamps(WebSeqMineError, ValueError):
    """Cyclic analysis needs real timestamps, not synthetic event indices."""


class PairUnobserved(WebSeqMineError, LookupError):
    pass


class RuleFileError(WebSeqMineError, ValueError):
    pass


class BadHeader(RuleFileError):
    pass


class DuplicatePair(RuleFileError):
    pass


class NonPositivePeriod(RuleFileError):
    """Periodicity is not positive or the cyclic bound is below it."""


class UnsortedStream(WebSeqMineError, ValueError):
    pass
