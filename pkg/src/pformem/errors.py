"""Exception hierarchy shared by every module of the package."""


class PFormError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(PFormError, ValueError):
    pass


class DegreeError(PFormError, ValueError):
    pass


class MetricError(PFormError, ValueError):
    pass


class AssemblyError(PFormError, ValueError):
    pass


class NumericalError(PFormError, RuntimeError):
    pass


class DomainError(PFormError, ValueError):
    pass


class SectorError(PFormError, ValueError):
    pass


class CycleError(PFormError, ValueError):
    pass


class ParseError(PFormError, ValueError):
    """Malformed scenario or mesh document; carries the offending field."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
