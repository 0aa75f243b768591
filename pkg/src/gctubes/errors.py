"""Exception hierarchy shared by all modules."""


class GCTubesError(Exception):
    """Base class for every error raised by this package."""


class NearZeroVector(GCTubesError, ValueError):
    pass


class CoincidentCircles(GCTubesError, ValueError):
    """Two poles are equal or antipodal, so the circles coincide."""


class DomainError(GCTubesError, ValueError):
    """An argument lies outside the region where a formula is valid."""


class NumericDomainError(DomainError):
    """An inverse-trig argument drifted too far outside its domain."""


class DuplicatePoints(GCTubesError, ValueError):
    pass


class ParallelLines(GCTubesError, ValueError):
    """Two planar lines are parallel; their strip overlap is infinite."""


class ConstructionFailed(GCTubesError, RuntimeError):
    pass


class InsufficientData(GCTubesError, ValueError):
    pass
