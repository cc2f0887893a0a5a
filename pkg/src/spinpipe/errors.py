"""Exception hierarchy shared by every module.

The CLI maps any :class:`SpinPipeError` to a machine-readable error record
and a nonzero exit status.
"""


class SpinPipeError(Exception):
    """Base class for all errors raised by the package."""

    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class DimensionError(SpinPipeError, ValueError):
    code = "dimension_mismatch"


class ConstraintError(SpinPipeError, ValueError):
    """An angle or parameter lies off the lattice an identity requires."""

    code = "constraint"


class SingularityError(SpinPipeError, ValueError):
    code = "singularity"


class CoverageError(SpinPipeError, ValueError):
    code = "coverage"


class SolverError(SpinPipeError, RuntimeError):
    code = "solver"


class SchedulingError(SpinPipeError, ValueError):
    code = "scheduling"


class CompileError(SpinPipeError, ValueError):
    code = "compile"
