"""Structured errors shared by all qprism modules.

Every failure mode that is part of an operation's contract gets its own
class so callers (and the CLI exit-code mapping) can dispatch on type.
"""


class QPrismError(Exception):
    """Base class for all library errors."""


class RingMismatch(QPrismError):
    """Operands belong to different rings or incompatible descriptors."""


class HostMismatch(RingMismatch):
    """Module/derivation operands live over different host rings."""


class PrecisionExhausted(QPrismError):
    """An operation needed more precision levels than the element carries."""


class NotAUnit(QPrismError):
    """Inversion requested for a non-unit."""


class NotInvertible(QPrismError):
    """A structural constant that must be a unit is not (degenerate ring)."""


class DeltaIncoherent(QPrismError):
    """A substitution assigned images violating delta-coherence."""


class BudgetExceeded(QPrismError):
    """Monomial count / weight / iteration budget exhausted."""


class WeightCapTooSmall(QPrismError):
    """A weight-filtered computation escaped the configured cap."""


class NotDeltaCompatible(QPrismError):
    """A derivation was asked to unfold through delta without the flag."""


class BadBeta(QPrismError):
    """delta(alpha) != alpha*beta for a proposed twisted-derivation pair."""


class BadCenter(QPrismError):
    """delta(a) - p*b != 0 for a proposed divided-power center."""


class PreconditionViolated(QPrismError):
    """A check's structural precondition failed (not a property failure)."""


class NotQuasiNilpotent(QPrismError):
    """A construction requiring quasi-nilpotence received a non-nilpotent field."""


class AugmentationFailed(QPrismError):
    """A descent datum did not restrict to the identity along the diagonal."""


class InvalidPullbackSpec(QPrismError):
    """The (g, psi, c) data violate the scalar-extension conditions."""


class OrderViolation(QPrismError):
    """An index map required to preserve total orders does not."""


class FrobeniusRelationFailed(QPrismError):
    """The host does not satisfy the Frobenius/derivation exchange rule."""


class DepthExceeded(QPrismError):
    """A divided-power conversion was pushed past its depth contract."""


class NotAComplex(QPrismError):
    """d compose d is nonzero on a would-be chain complex."""
