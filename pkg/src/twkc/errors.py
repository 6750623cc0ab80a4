"""Exception types shared across the package."""


class TwkcError(Exception):
    """Base class for all errors raised by this package."""


class CircuitError(TwkcError, ValueError):
    """Malformed circuit (cycle, bad fan-in, unknown gate)."""


class ParseError(TwkcError, ValueError):
    """Input text could not be parsed.  Carries the offending line number."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class MissingVariableError(TwkcError, KeyError):
    """A valuation does not assign every variable it should."""

    def __str__(self):
        return Exception.__str__(self)


class DegenerateInputError(TwkcError, ValueError):
    """A generator or constructor received input violating its precondition."""


class DecompositionError(TwkcError, ValueError):
    """A tree decomposition is invalid for its subject or for the operation."""


class SizeLimitError(TwkcError, ValueError):
    """An exact/exhaustive routine was asked to run beyond its hard cap."""


class DisagreementError(TwkcError, ValueError):
    """Two almost-evaluations assign different bits to a shared gate."""


class ClauseTooSmallError(TwkcError, ValueError):
    """A clause cannot supply one variable on each side of a cut."""


class ProbabilityError(TwkcError, ValueError):
    """A probability valuation is out of range or incomplete."""


class NotDSDNNFError(TwkcError, ValueError):
    """An NNF fails one of the structural checks required by an operation."""

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)
