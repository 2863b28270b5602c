"""Exception hierarchy shared across the package.

Callers that need to distinguish user-input problems from internal bugs can
catch :class:`GreenLedgerError`; the CLI maps it to exit code 1.
"""


class GreenLedgerError(Exception):
    """Base class for all errors raised on bad input or bad state."""


class ParseError(GreenLedgerError):
    """A data file could not be parsed; message names the file and row."""


class DataValidationError(GreenLedgerError):
    """Parsed data violates a documented invariant."""


class UnknownClassError(GreenLedgerError):
    """A commodity-class code does not exist in the taxonomy."""


class MissingFactorError(GreenLedgerError):
    """The class exists but carries no emission factor."""


class StateError(GreenLedgerError):
    """An operation was called before its required state was established."""


class DegenerateInputError(GreenLedgerError):
    """Input collapsed to nothing usable (empty text, zero vector, all-OOV)."""


class ProviderError(GreenLedgerError):
    """An embedding provider or encoder checkpoint failed or is unavailable."""
