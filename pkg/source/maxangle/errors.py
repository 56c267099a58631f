"""Exception types raised by the maxangle package."""


class MaxAngleError(Exception):
    """Base class for all package errors."""


class DegenerateSimplexError(MaxAngleError, ValueError):
    """
    Raised when a quantity is undefined on a (numerically) degenerate simplex.

    Args:
        message (str): Human readable reason
        subsimplex (tuple[int, ...], optional): Vertex indices of the offending
            subsimplex when the failure happened inside an enumeration
    """

    def __init__(self, message: str, subsimplex: tuple[int, ...] = None):
        super().__init__(message)
        self.subsimplex = subsimplex


class ThresholdError(MaxAngleError, ValueError):
    """Raised for condition thresholds outside their admissible ranges."""


class FamilyError(MaxAngleError, ValueError):
    """Raised for an invalid family name, dimension or schedule."""


class MeshParseError(MaxAngleError):
    """Raised when mesh text does not follow the line-oriented mesh format."""

    def __init__(self, message: str, line: int, field: int = None):
        where = f"line {line}" if field is None else f"line {line}, field {field}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.field = field


class MeshValidationError(MaxAngleError):
    """Raised when a parsed mesh violates a structural invariant."""

    def __init__(self, message: str, element: int = None):
        super().__init__(message if element is None else f"element {element}: {message}")
        self.element = element
