"""Exception hierarchy shared by all neartwin modules."""


class NeartwinError(Exception):
    """Base class for every error raised by the package."""


class GraphFormatError(NeartwinError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormulaSyntaxError(NeartwinError, ValueError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"position {position}: {message}"
            if text is not None:
                message += "\n  " + text + "\n  " + " " * position + "^"
        super().__init__(message)


class ContractError(NeartwinError, ValueError):
    """A caller broke an operation's precondition."""


class NotNearUniformError(NeartwinError):
    def __init__(self, k0, p):
        self.k0 = k0
        self.p = p
        super().__init__(f"not ({k0},{p})-near-uniform")


class BudgetExceededError(NeartwinError):
    """An exhaustive search would exceed the configured work budget."""


class InconsistencyError(NeartwinError):
    """An internal invariant failed; indicates misuse or a bug."""
