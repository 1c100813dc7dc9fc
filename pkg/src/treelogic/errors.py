"""Exception types shared across the package."""


class TreeLogicError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TreeLogicError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class PositionOutOfRange(TreeLogicError):
    """A Gorn address does not denote a node of the tree at hand."""


class InvalidEncoding(TreeLogicError):
    """An encoded tree violates the one-mark-per-first-order-variable rule."""


class UnboundVariable(TreeLogicError):
    """A formula mentions a variable the encoding does not declare."""


class VariableOutOfRange(TreeLogicError):
    """A context tree uses a substitution variable beyond the declared arity."""


class ExplosionGuard(TreeLogicError):
    """A configured enumeration cap was exceeded.

    `cap_name` identifies which cap tripped so callers can report it.
    """

    def __init__(self, cap_name, limit, needed):
        self.cap_name = cap_name
        self.limit = limit
        self.needed = needed
        super().__init__(
            f"cap '{cap_name}' exceeded: needs {needed}, limit is {limit}"
        )


class NotStepFormula(TreeLogicError):
    """The formula is outside the step-formula grammar."""


class NotStepFamily(TreeLogicError):
    """A formula family member is outside the step-formula grammar."""


class NotNormalized(TreeLogicError):
    """The automaton is not final-state normalized with final state 0."""


class NotProgressFormula(TreeLogicError):
    """A custom progress formula fails the strict-descendant requirement."""


class BadMacroParams(TreeLogicError):
    """Macro parameters are out of range or malformed."""
