"""Exception types shared across the package."""


class OpmxError(Exception):
    """Base class for all package errors."""


class NotInDomain(OpmxError):
    """Input vector is provably outside the operator's domain."""


class Undecidable(OpmxError):
    """The membership engine cannot decide the domain verdict."""


class UnsupportedOperand(OpmxError):
    """The closed-form representation cannot express the requested result."""


class ShapeMismatch(OpmxError):
    """Composite parts have inconsistent arities."""


class NotDenselyDefined(OpmxError):
    """An entry's domain has a provably forced coordinate."""


class FactorCheckFailed(OpmxError):
    """The bounded-factor extension identity fails on a basis vector."""


class NotBounded(OpmxError):
    """A factor required to be bounded is not."""


class NotInjective(OpmxError):
    """A factor required to be injective is not (or injectivity is not decidable)."""


class NotApplicable(OpmxError):
    """Hypotheses of a shortcut formula are not met."""


class NoValidSamples(OpmxError):
    """Every generated sample was rejected by the domain membership test."""


class DomainViolation(OpmxError):
    """A witness input left the operator's domain."""


class DegenerateInput(OpmxError):
    """A subspace basis is rank deficient."""


class HypothesisViolated(OpmxError):
    """A check's structural precondition fails."""


class UnknownCase(OpmxError):
    """Requested gallery case does not exist."""


class InvalidDefinition(OpmxError):
    """A JSON definition is malformed; the message names the offending field."""
