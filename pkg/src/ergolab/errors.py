"""Exception hierarchy shared by every ergolab module."""


class ErgolabError(Exception):
    """Base class for all library errors."""


class DomainError(ErgolabError, ValueError):
    """A point was given outside the fundamental domain [0, 1)."""


class BadParams(ErgolabError, ValueError):
    """Malformed map or experiment parameters."""


class NumericalFailure(ErgolabError, ArithmeticError):
    """Base class for failures of a numerical procedure (CLI exit code 3)."""


class NotExpanding(NumericalFailure):
    """The sampled derivative does not stay above 1."""


class ConvergenceError(NumericalFailure):
    """Bisection could not bracket or resolve a preimage."""


class NoConvergence(NumericalFailure):
    """An iterative solver hit its iteration cap."""


class UnderSampled(NumericalFailure):
    """Too few samples for the requested refinement depth."""


class NonFinite(NumericalFailure):
    """A test function returned a non-finite value on the support."""
