"""Exception types shared by every module."""


class InputError(ValueError):
    """Malformed or out-of-range input (vertex ids, sizes, flags)."""


class ParseError(InputError):
    """Text input that does not follow a file format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SpecError(InputError):
    """A random-model specification that violates its invariants."""


class DomainError(ValueError):
    """A bound evaluated outside the parameter range it is stated for."""


class CapacityError(RuntimeError):
    """An enumeration would exceed its configured size guard."""
