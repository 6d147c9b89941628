"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """A requested enumeration or scale overflows the platform index type."""


class CoverageError(ValueError):
    """A field sample does not cover the region required by an operator cube."""


class SolverError(RuntimeError):
    """An iterative or direct solve failed to reach its tolerance."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class SingularResolventError(SolverError):
    """The requested energy lies in (or numerically on) the spectrum."""


class FailureBudgetError(RuntimeError):
    """More than the tolerated fraction of Monte Carlo trials failed."""


class ConfigError(ValueError):
    """An experiment configuration failed validation.

    ``problems`` carries the complete list of violations found, not just
    the first one.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
