"""Exception hierarchy shared by every module of the checker."""


class CacError(Exception):
    """Base class for all errors raised by cacmod."""


class InvalidPosition(CacError):
    pass


class SignatureError(CacError):
    """A declaration, rule or equation that cannot be loaded."""


class FuelExhausted(CacError):
    """A reduction ran out of its step budget.

    Raised instead of looping forever; callers report it as a suspicion of
    non-termination, never as a negative answer.
    """

    def __init__(self, fuel, term=None):
        super().__init__(f"fuel exhausted after {fuel} steps")
        self.fuel = fuel
        self.term = term


class ClassBoundExceeded(CacError):
    """Enumeration of an equivalence class hit the configured size bound."""

    def __init__(self, bound, term=None):
        super().__init__(f"equivalence class exceeds {bound} members")
        self.bound = bound
        self.term = term


class IllTyped(CacError):
    def __init__(self, message, term=None, env=None):
        super().__init__(message)
        self.term = term
        self.env = env


class NotAConstantPredicate(CacError):
    pass


class ParseError(CacError):
    def __init__(self, message, line=None, column=None):
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.column = column
