"""Exception hierarchy.  Every error the CLI maps to exit code 2 derives from ``MetlogicError``."""


class MetlogicError(Exception):
    """Base class; ``detail`` is a JSON-friendly payload for reports."""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail if detail is not None else {}


class UnboundVariableError(MetlogicError):
    pass


class SortError(MetlogicError):
    pass


class EmptyCarrierError(MetlogicError):
    pass


class NotFreeError(MetlogicError):
    pass


class DSLSyntaxError(MetlogicError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}", {"line": line, "column": column})
        self.line = line
        self.column = column


class UnknownSymbolError(MetlogicError):
    pass


class ArityError(MetlogicError):
    pass


class GroupAxiomError(MetlogicError):
    pass


class MetricAxiomError(MetlogicError):
    pass


class UndefinedProductError(MetlogicError):
    """A product (or a metric value) falls outside an enumerated ball."""


class EnumerationCapError(MetlogicError):
    pass


class BudgetExhaustedError(MetlogicError):
    pass


class NotApplicableError(MetlogicError):
    pass


class DisagreementError(MetlogicError):
    """Two independent routes returned different answers."""
