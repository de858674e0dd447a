"""Exception hierarchy shared by all udsim modules."""


class UdsimError(Exception):
    """Base class for every error raised by udsim."""


class DimensionMismatch(UdsimError, ValueError):
    pass


class UnsupportedDimension(UdsimError, ValueError):
    pass


class NullSeparation(UdsimError, ArithmeticError):
    """Two worldline points are null separated; the kernel is singular there."""


class NoIntersection(UdsimError):
    """A worldline never enters the future lightcone of an event."""


class NonConvergence(UdsimError, ArithmeticError):
    pass


class SingularInterior(UdsimError, ArithmeticError):
    pass


class NonConstantAcceleration(UdsimError, ValueError):
    pass


class PoorFit(UdsimError):
    pass


class InvalidState(UdsimError, ValueError):
    pass


class DegenerateMeasurement(UdsimError, ArithmeticError):
    pass


class UncertaintyViolation(UdsimError, ValueError):
    pass


class InvalidScenario(UdsimError, ValueError):
    pass


class UnderSampled(UdsimError, ValueError):
    pass
