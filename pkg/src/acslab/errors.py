"""Exception types shared across the package."""


class AcslabError(Exception):
    """Base class for every error this package raises on purpose."""


class TopologyParseError(AcslabError):
    """Malformed topology text. Carries the 1-based line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class TopologyValidationError(AcslabError):
    """Structurally valid file that violates a topology invariant."""


class ConfigError(AcslabError):
    """Invalid scenario, probe, or experiment configuration."""


class CapacityError(AcslabError):
    """Problem too large for the exhaustive code path."""


class DatasetSchemaError(AcslabError):
    """Dataset or prediction file does not match the documented schema."""
