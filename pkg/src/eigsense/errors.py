"""Exception types shared across the package.

The CLI maps each family onto its own exit code.
"""


class EigsenseError(Exception):
    """Base class for all package errors."""


class ConfigError(EigsenseError, ValueError):
    """Invalid scenario, campaign or detector configuration."""


class NumericError(EigsenseError, ArithmeticError):
    """Non-finite or degenerate numeric input."""

    def __init__(self, message, index=None):
        super().__init__(message)
        # position of the first offending item in a batched call
        self.index = index


class DegenerateInputError(NumericError):
    """Input with no energy (zero trace)."""


class RankDeficiencyError(NumericError):
    """Minimum eigenvalue is zero to working precision."""


class TrialError(NumericError):
    """A numeric failure inside a Monte Carlo trial."""

    def __init__(self, message, trial):
        super().__init__(f"trial {trial}: {message}", index=trial)
        self.trial = trial
