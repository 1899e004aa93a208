"""Exception hierarchy shared across the package."""


class TransrlError(Exception):
    """Base class for user-facing failures (bad input, bad configuration)."""


class ConfigurationError(TransrlError):
    pass


class InputError(TransrlError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ContractViolation(AssertionError):
    """Internal invariant broken; indicates a bug or misuse of an API."""


class TransitionError(TransrlError):
    def __init__(self, message, constraint=None, step=None):
        self.constraint = constraint
        self.step = step
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(prefix + message)


class ShapeError(ValueError):
    pass
