"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Raised when an argument violates an operation's precondition."""


class LoadError(ValueError):
    """Raised when an edge-list, node-feature or config file cannot be parsed.

    Parameters
    ----------
    message : str
        Human-readable reason.
    path : str, optional
        File being read.
    line : int, optional
        1-based line number of the offending line.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class CapacityError(RuntimeError):
    """Raised when an exact computation would exceed its enumeration cap."""
