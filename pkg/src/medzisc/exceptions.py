"""Exception types shared across the package."""


class MedziscError(Exception):
    """Base class for all package-specific errors."""


class StructureError(MedziscError, ValueError):
    """Structurally inconsistent inputs (mismatched genes, missing subjects, misaligned files)."""


class DomainError(MedziscError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularDesignError(MedziscError, ValueError):
    """Design matrix is rank deficient for an unpenalized fit."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(
            "design matrix is rank deficient; offending columns: "
            + ", ".join(self.columns)
        )


class DegenerateResponseError(MedziscError, ValueError):
    """Response vector carries no information for the requested model (e.g. all zeros)."""


class ConfigError(MedziscError, ValueError):
    """Invalid configuration file or parameter set."""


class PipelineError(MedziscError, RuntimeError):
    """Unrecoverable failure inside an analysis pipeline stage."""
