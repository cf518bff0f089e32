"""Exception hierarchy. Each class also derives from the closest builtin so callers can catch either."""


class NavGenError(Exception):
    pass


class ConfigError(NavGenError, ValueError):
    """Invalid parameters or configuration; the CLI exits with code 2."""


class DataError(NavGenError, ValueError):
    """Missing, malformed or inconsistent data files; the CLI exits with code 3."""


class SchemaError(DataError):
    pass


class GenerationError(DataError):
    pass


class UnknownNodeError(NavGenError, KeyError):
    pass


class IllegalActionError(NavGenError, ValueError):
    pass


class UnreachableError(NavGenError):
    pass


class ShapeError(NavGenError, ValueError):
    pass


class NumericalError(NavGenError, ArithmeticError):
    pass


class TapeError(NavGenError, RuntimeError):
    pass
