"""Exception hierarchy shared by all paritylab modules."""

from __future__ import annotations


class ParityLabError(Exception):
    """Base class for all package errors."""


class InputDomainError(ParityLabError):
    """Runtime inputs outside the documented domain (bad index, shape mismatch)."""


class ConfigError(ParityLabError):
    """Invalid or inconsistent configuration values."""


class DivergenceError(ParityLabError):
    """A simulation produced non-finite or exploding state.

    Carries the step index at which the guard fired.
    """

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class RunTimeout(ParityLabError):
    """Wall-clock budget exceeded; carries the partial trace collected so far."""

    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


class IllConditionedError(ParityLabError):
    """A linear solve failed; carries a condition-number estimate."""

    def __init__(self, message: str, cond_estimate: float):
        super().__init__(f"{message} (condition estimate {cond_estimate:.3e})")
        self.cond_estimate = cond_estimate


class ResourceError(ParityLabError):
    """Requested computation exceeds hard resource limits."""
