"""Exception taxonomy shared across the package."""


class AssouadLabError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(AssouadLabError, ValueError):
    """A parameter is outside its documented domain."""


class PointFileError(AssouadLabError, ValueError):
    """A point file could not be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ScaleUnderflowError(AssouadLabError, ValueError):
    """Requested dyadic level makes the cell side vanish in double precision."""


class SizeLimitError(AssouadLabError, ValueError):
    """Brute-force guard exceeded; use count_dyadic for instances this large."""


class PreconditionError(AssouadLabError, ValueError):
    """An operation's documented precondition does not hold."""


class SingularityError(AssouadLabError, ValueError):
    """A sample point is within the exclusion distance of a map singularity."""

    def __init__(self, primitive, point, distance, exclusion):
        super().__init__(
            f"point {point!r} is within {distance:.3e} of a singularity of "
            f"{primitive} (exclusion radius {exclusion:.3e})"
        )
        self.primitive = primitive
        self.point = point


class DegenerateDifferentialError(AssouadLabError, ArithmeticError):
    """|f_z| <= |f_zbar| at a probe: orientation lost or differential degenerate."""

    def __init__(self, probe, fz, fzb):
        super().__init__(
            f"degenerate differential at probe {probe!r}: |f_z|={abs(fz):.3e} "
            f"<= |f_zbar|={abs(fzb):.3e}"
        )
        self.probe = probe


class LevelBudgetError(AssouadLabError, RuntimeError):
    """Refinement hit max_level with major squares remaining."""

    def __init__(self, max_level, survivors):
        super().__init__(
            f"refinement exceeded max_level={max_level} with "
            f"{len(survivors)} major squares remaining"
        )
        self.survivors = survivors


class ResolutionError(AssouadLabError, ValueError):
    """Every requested probe scale sits below the sampling resolution."""


class InsufficientRangeError(AssouadLabError, ValueError):
    """The spectrum curve does not reach far enough in theta."""
