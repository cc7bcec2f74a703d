"""Exception hierarchy.

Every numerical failure raised by the library derives from ``NumericalError``
so the command line front end can map it onto a single exit status.
"""


class IsolabError(Exception):
    """Base class for all library errors."""


class NumericalError(IsolabError):
    """A computation could not be carried out to the requested accuracy."""


class ConfigError(IsolabError):
    """Invalid user supplied configuration."""


# linear algebra
class SingularMatrix(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


# special functions
class PoleOfGamma(NumericalError):
    pass


class ParameterPole(NumericalError):
    pass


class NearSingularArgument(NumericalError):
    pass


class OutOfSector(NumericalError):
    pass


class NonGenericParameters(NumericalError):
    pass


class SmallParameterRegime(NumericalError):
    pass


# path integration and monodromy
class StepUnderflow(NumericalError):
    pass


class PoleProximity(NumericalError):
    pass


class ResonantExponent(NumericalError):
    pass


class CyclicViolation(NumericalError):
    pass


# Painleve VI / V states
class ConstraintViolation(NumericalError):
    pass


class SingularTime(NumericalError):
    pass


class IndeterminateY(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class ReflectionSingular(NumericalError):
    pass


class SectorViolation(NumericalError):
    pass


class AnchorTooClose(NumericalError):
    pass


class NonUnipotentResidual(NumericalError):
    pass


class IndeterminateTau(NumericalError):
    pass


# discrete transformations
class DeltaZero(NumericalError):
    pass


class ExistenceViolation(NumericalError):
    pass


class LadderBlocked(NumericalError):
    def __init__(self, level, reason=""):
        self.level = level
        super().__init__(f"ladder blocked at level {level}: {reason}")


# triangularizer
class AmbiguousClassification(NumericalError):
    pass


class UnsolvablePair(NumericalError):
    pass


class BasisDegenerate(NumericalError):
    pass


# limits
class DenominatorCollapse(NumericalError):
    pass


class ThetaZero(NumericalError):
    pass


class ConditionViolation(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class MismatchBeyondTolerance(NumericalError):
    pass
