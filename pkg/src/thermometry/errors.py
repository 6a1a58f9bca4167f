"""Exception types shared across the package."""


class InputFormatError(ValueError):
    """A structured input (spectrum / gap-family / config / sample dict) is malformed.

    Raised by the ``*_from_dict`` loaders; distinct from plain ``ValueError``
    so the CLI can map format problems and numeric-validation problems to
    different exit codes.
    """


class DegenerateExperimentError(RuntimeError):
    """A simulation could not produce a usable result.

    Raised when the ABORT policy hits a degenerate (boundary or
    non-invertible) sample, or when every trial of a run was excluded.
    """
