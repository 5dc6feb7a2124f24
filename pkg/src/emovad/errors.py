"""Exception hierarchy shared across the package.

CLI exit-code mapping: ValidationError subclasses map to exit 2,
ProtocolMismatch to exit 3, MissingInput subclasses to exit 4.
"""

from __future__ import annotations


class EmovadError(Exception):
    """Base class for all package errors."""


class ValidationError(EmovadError):
    """Bad data or bad arguments (CLI exit 2)."""


class MissingInput(EmovadError):
    """A required file or artifact does not exist (CLI exit 4)."""


# -- schema ------------------------------------------------------------


class MalformedJson(ValidationError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no


class SchemaViolation(ValidationError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no


class EmptyDataset(ValidationError):
    pass


class FileMissing(MissingInput):
    pass


# -- contract ----------------------------------------------------------


class InvalidAnswer(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


# -- lexicon -----------------------------------------------------------


class MalformedRow(ValidationError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no


class BadEps(ValidationError):
    pass


class OutputCollision(ValidationError):
    pass


# -- augment -----------------------------------------------------------


class EmptyPairs(ValidationError):
    pass


# -- losses / verifier ---------------------------------------------------


class DimensionMismatch(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


# -- mixer / train -------------------------------------------------------


class BadSchedule(ValidationError):
    pass


class InputOverflow(EmovadError):
    """Input exceeds the token budget; counted in the ParseOK denominator."""


class HealingExhausted(EmovadError):
    """A fault arrived while max_len was already at the healing floor."""


# -- metrics -----------------------------------------------------------


class EmptyGoldSubspace(ValidationError):
    pass


class EmptyValidSet(ValidationError):
    pass


class TooFewRows(ValidationError):
    pass


class TooFewPairs(ValidationError):
    pass


# -- quickeval / cli -----------------------------------------------------


class EmptyWindow(ValidationError):
    pass


class EmptyDev(ValidationError):
    pass


class ProtocolMismatch(EmovadError):
    """Decode configuration drift between training and evaluation (CLI exit 3)."""


class MissingSnapshot(MissingInput):
    pass


class LockHeld(EmovadError):
    """Another process holds the output-directory lock."""
