"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad input data, CLI exit
code 2) and ``PreconditionError`` (the mathematics does not apply, exit code 3).
"""


class UnfoldError(Exception):
    """Base class. ``detail`` carries machine-readable context."""

    def __init__(self, message: str = "", **detail):
        super().__init__(message)
        self.detail = detail

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "detail": self.detail}


class ValidationError(UnfoldError):
    pass


class PreconditionError(UnfoldError):
    pass


# algebra
class NonUnit(PreconditionError):
    pass


class RepeatedRoot(PreconditionError):
    pass


class DegenerateOrder(PreconditionError):
    pass


class SingularBase(PreconditionError):
    pass


# orbit
class NotCyclic(PreconditionError):
    pass


class PhiNotAnnihilating(ValidationError):
    pass


class Inequivalent(PreconditionError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NotTangent(PreconditionError):
    pass


class Unsolvable(PreconditionError):
    pass


# connection
class GenericityFailure(ValidationError):
    pass


class DuplicateMu(GenericityFailure):
    pass


class NotInjectiveAction(ValidationError):
    pass


class SpectralMismatch(ValidationError):
    pass


class InterpolationSingular(PreconditionError):
    pass


# unfolding
class CommutantTooBig(PreconditionError):
    pass


class ResonantLeading(PreconditionError):
    pass


class InsufficientOrder(PreconditionError):
    pass


class LogTerm(PreconditionError):
    pass


class GaugeUnavailable(PreconditionError):
    pass


class Resonance(PreconditionError):
    pass


class LambdaViolation(ValidationError):
    pass


class OutsideDomain(PreconditionError):
    pass


# flows
class DeltaOutOfRange(ValidationError):
    pass


class NotConverged(PreconditionError):
    pass


class PathTooClose(PreconditionError):
    pass


class OrderingViolated(PreconditionError):
    pass


class IntegralityViolation(PreconditionError):
    pass
