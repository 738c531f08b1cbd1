"""Exception hierarchy shared across the package."""


class HybridmonError(Exception):
    """Base class for all errors raised by this package."""


class ConditionParseError(HybridmonError):
    """Syntax error in a condition or formula, with a source position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(HybridmonError):
    """An identifier does not resolve against the declared signatures."""


class MissingVariableError(HybridmonError):
    """A guard mentions a variable the supplied valuation does not define."""


class ConstantNotInPartitionError(HybridmonError):
    """A condition mentions a constant that is not a partition boundary."""


class NetValidationError(HybridmonError):
    """A data Petri net failed a structural or safety check."""

    def __init__(self, message: str, transition_id: str | None = None):
        super().__init__(message)
        self.transition_id = transition_id


class ResourceLimitError(HybridmonError):
    """A construction exceeded its configured state bound."""


class ModelError(HybridmonError):
    """A model document is malformed or internally inconsistent."""


class TraceFormatError(HybridmonError):
    """A trace file record is malformed; carries its line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownActivityError(HybridmonError):
    """An event names an activity absent from the signature set."""


class PayloadMismatchError(HybridmonError):
    """An event payload does not match its signature's attribute set."""


class UnknownTemplateError(HybridmonError):
    """A constraint references a template missing from the catalog."""


class PreconditionError(HybridmonError):
    """An operation was invoked on an automaton lacking required structure."""
