"""Exception hierarchy.

``ValidationError`` subclasses map to CLI exit code 2, ``NumericalError``
subclasses to exit code 3.
"""

from __future__ import annotations


class DsdError(Exception):
    """Base class for all errors raised by dsdcarbon."""


class ValidationError(DsdError):
    pass


class NumericalError(DsdError):
    pass


# data model
class ZeroEnergy(ValidationError):
    pass


class UndefinedEmissionFactor(ValidationError):
    pass


class InvariantViolation(ValidationError):
    def __init__(self, message: str, year: int | None = None, field: str | None = None):
        super().__init__(message)
        self.year = year
        self.field = field


# engines
class SingularMatrix(NumericalError):
    pass


class MismatchedEndUses(ValidationError):
    pass


class UnknownYear(ValidationError):
    pass


class NonpositiveBase(ValidationError):
    pass


class NonpositiveInput(ValidationError):
    pass


class NonpositiveFactor(ValidationError):
    pass


class InsufficientPoints(ValidationError):
    pass


class DegenerateVariance(ValidationError):
    pass


class ZeroEmissions(ValidationError):
    pass


class MissingFloorArea(ValidationError):
    pass


class InvalidRates(ValidationError):
    pass


class MissingBaseYear(ValidationError):
    pass


# ingest
class ParseError(ValidationError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class SchemaError(ValidationError):
    pass


class GapInYears(ValidationError):
    def __init__(self, year: int):
        super().__init__(f"missing year {year} in series")
        self.year = year
