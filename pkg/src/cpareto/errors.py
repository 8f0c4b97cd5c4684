"""Exception types shared across the package."""


class CParetoError(Exception):
    """Base class for all package errors."""


class AgentCountTooLarge(CParetoError):
    pass


class MismatchedAgentSets(CParetoError):
    pass


class UnknownStructure(CParetoError):
    pass


class LengthMismatch(CParetoError):
    pass


class EmptyInput(CParetoError):
    pass


class EmptyArchive(CParetoError):
    pass


class NonPositiveWeight(CParetoError):
    pass


class BadAgentIndex(CParetoError):
    pass


class DimensionUnsupported(CParetoError):
    pass


class PointBelowReference(CParetoError):
    pass


class NonPositiveArgument(CParetoError):
    pass


class EvaluationAtWellCenter(CParetoError):
    pass


class DimensionMismatch(CParetoError):
    pass


class Unbounded(CParetoError):
    pass


class Infeasible(CParetoError):
    pass


class NoFeasibleFound(CParetoError):
    pass


class TooFewAgents(CParetoError):
    pass


class TooManyVariables(CParetoError):
    pass


class ScenarioError(CParetoError):
    pass


class BundleError(CParetoError):
    pass
