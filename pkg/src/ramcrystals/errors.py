"""Exception hierarchy shared across the package.

Everything raised on purpose derives from RamCrystalsError so callers can
catch the library's failures without swallowing genuine bugs.
"""


class RamCrystalsError(Exception):
    """Base class for all errors raised deliberately by this package."""


class PrecisionExhausted(RamCrystalsError):
    """A result could not be certified at the working p-adic precision."""


class NotDivisible(RamCrystalsError):
    """An exact division by a power of pi (or p) failed."""


class OutOfRange(RamCrystalsError):
    """Polygon evaluated outside [0, width]."""


class WidthMismatch(RamCrystalsError):
    """Two polygons of different widths were compared."""


class EmptyList(RamCrystalsError):
    """An aggregate of polygons was requested for an empty collection."""


class InvalidDatum(RamCrystalsError):
    """A filtration datum or field datum fails its structural constraints."""


class FiltrationInvalid(RamCrystalsError):
    """A candidate filtration violates the stepwise lattice conditions."""


class OrderedDatumRequired(RamCrystalsError):
    """A Hasse-chain operation was asked for a non weakly-decreasing datum."""


class HypothesisViolated(RamCrystalsError):
    """A theorem-backed test was invoked outside its hypotheses."""


class NoConvergence(RamCrystalsError):
    """The slope oracle could not stabilize within its iteration budget."""


class NotABreakContact(RamCrystalsError):
    """Hodge-Newton splitting asked at a non-contact or non-break abscissa."""


class NotDecomposable(RamCrystalsError):
    """A certified direct-sum decomposition could not be produced."""


class NotMuOrdinary(RamCrystalsError):
    """A mu-ordinary-only routine was invoked on a non mu-ordinary crystal."""


class EmptyEtalePart(RamCrystalsError):
    """The unit-root part requested from a crystal with no slope-0 part."""


class NotASummand(RamCrystalsError):
    """A submodule over an artinian base is not a free direct summand."""


class WellDefinednessFailure(RamCrystalsError):
    """An induced map on a quotient fails its well-definedness certificate."""


class NoPreimage(RamCrystalsError):
    """A required Frobenius preimage does not exist mod p."""
