"""Semantic exception hierarchy.

Every error raised by this package derives from :class:`HarmboundsError` so
callers (and the CLI) can map failure classes to exit behaviour without
string matching.
"""


class HarmboundsError(Exception):
    """Base class for all package errors."""


class LawValidationError(HarmboundsError):
    """A probability law violates an invariant (range, normalization, ...)."""


class FileFormatError(HarmboundsError):
    """A law/utility/dataset file is malformed.  Messages carry the line number."""


class PositivityError(HarmboundsError):
    """A conditional quantity was requested on an empty conditioning event."""


class IncompatibleLawsError(HarmboundsError):
    """Observed inputs are jointly impossible under the assumed data-generating model."""


class NotPointIdentifiedError(HarmboundsError):
    """A point decision was requested but the target is only set-identified."""


class GainEqualityError(HarmboundsError):
    """The margin-only fast path was used with a gain table that does not permit it."""


class GammaMissingError(HarmboundsError, TypeError):
    """A stratum-level operation was applied to an outcome-only utility spec."""


class PartialPolicyError(HarmboundsError):
    """A policy does not cover the full feature space of the law evaluating it."""
