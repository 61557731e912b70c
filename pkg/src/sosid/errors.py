"""Exception types shared across the toolkit.

Every data-dependent failure raises a subclass of :class:`SosidError`, so
callers (the CLI in particular) can separate bad data from genuine bugs.
Dimension mismatches and other caller mistakes raise plain ``ValueError``.
"""


class SosidError(Exception):
    """Base class for all toolkit errors."""


class AudioFormatError(SosidError):
    """A WAV file could not be decoded as mono 16-bit PCM."""


class ConfigurationError(SosidError):
    """A configuration value is invalid or inconsistent."""


class EmptyInputError(SosidError):
    """Input is too short to produce even one frame."""


class DegenerateModelError(SosidError):
    """Too little or too redundant data to estimate a usable model."""


class NotPositiveDefiniteError(SosidError):
    """A covariance matrix has no Cholesky factorization, even after loading."""


class AlignmentError(SosidError):
    """A phone alignment file is malformed or inconsistent with its track."""


class TaxonomyError(SosidError):
    """A phoneme class taxonomy violates its invariants, or a selector is unknown."""


class InsufficientDataError(SosidError):
    """A speaker does not have enough material for the requested protocol."""
