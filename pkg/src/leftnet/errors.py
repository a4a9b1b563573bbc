"""Exception types shared across the package."""


class LeftnetError(Exception):
    """Base class for all package-specific errors."""


class DegenerateGeometry(LeftnetError):
    """A frame construction hit a (near-)degenerate configuration.

    Raised instead of silently substituting an arbitrary axis: a patched frame
    would break equivariance in ways the test suite could not detect.
    """


class EmptyGraph(LeftnetError):
    """An operation that needs at least one node received none."""


class NotAnEdge(LeftnetError):
    """The requested (i, j) pair is not in the graph's edge set."""


class TooLarge(LeftnetError):
    """A brute-force isometry search was asked to exceed its size cap."""


class GenerationFailed(LeftnetError):
    """A counterexample generator exhausted its retry budget."""


class ParseError(LeftnetError):
    """Malformed input text; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownElement(ParseError):
    """An element symbol not in the periodic table."""


class ConfigError(LeftnetError):
    """Invalid or unknown configuration keys/values."""


class MissingLabels(LeftnetError):
    """A loss term was requested for samples that lack the needed labels."""


class NonFiniteGradient(LeftnetError):
    """The optimizer received a NaN/Inf gradient."""


class CheckpointError(LeftnetError):
    """Checkpoint file is malformed, truncated, or version-mismatched."""
