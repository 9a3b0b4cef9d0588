"""Exception hierarchy. Every error raised by the library derives from DcelmError."""


class DcelmError(Exception):
    pass


class InvalidInputError(DcelmError, ValueError):
    """Bad shapes, non-finite values, out-of-range arguments."""


class ParseError(DcelmError, ValueError):
    """A structure string or text format failed to parse."""


class LoadError(DcelmError):
    """A file could not be read into the expected structure."""


class NumericError(DcelmError, ArithmeticError):
    """An objective or model produced non-finite values."""
