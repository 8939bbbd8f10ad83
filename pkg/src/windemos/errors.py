"""Exception and warning types shared across the package."""


class WindemosError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(WindemosError, ValueError):
    """A distribution or model parameter violates its constraints."""


class InvalidInputError(WindemosError, ValueError):
    """An observation, probability level, or argument is out of range."""


class UndefinedMomentError(WindemosError, ValueError):
    """A requested moment does not exist for the given shape parameter."""


class NumericFailureError(WindemosError, ArithmeticError):
    """A numerical routine could not reach its accuracy target."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UndefinedSkillError(WindemosError, ZeroDivisionError):
    """A skill score is undefined because the reference score is zero."""


class EstimationError(WindemosError, RuntimeError):
    """Parameter estimation failed beyond the retry policy."""


class InsufficientDataError(WindemosError, ValueError):
    """Not enough cases to perform the requested computation."""


class DataFormatError(WindemosError, ValueError):
    """An input file does not conform to the expected format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(WindemosError, ValueError):
    """A run configuration is inconsistent or incomplete."""


class DegenerateScaleWarning(UserWarning):
    """A predicted scale or variance hit its lower floor."""


class TrainingFallbackWarning(UserWarning):
    """A regime training split was too small and a fallback was used."""
