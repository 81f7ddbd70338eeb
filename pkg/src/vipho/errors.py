"""Exception types raised across the package.

Everything derives from ViphoError so callers can catch one base class at
tool boundaries and map it to an exit code.
"""


class ViphoError(Exception):
    pass


# --- text / parsing ---

class NotASyllable(ViphoError):
    """The grapheme string is not a well-formed Vietnamese syllable."""


class MalformedIpa(ViphoError):
    """A dictionary transcription does not decompose into known phonemes."""


class OutOfDictionary(ViphoError):
    """A word is missing from the pronunciation dictionary."""


class EmptyDictionary(ViphoError):
    """A vocabulary cannot be built from zero dictionary entries."""


class NoNucleus(ViphoError):
    """A tone mark has no vowel letter to attach to."""


class UnknownId(ViphoError):
    """A triplet id does not name a content entry of its vocabulary table."""


# --- metrics ---

class EmptyReference(ViphoError):
    """An error rate is undefined because the reference has zero tokens."""


class DegenerateInput(ViphoError):
    """A correlation is undefined (fewer than two points, or zero variance)."""


class EmptyInput(ViphoError):
    """A metric was asked to aggregate over an empty collection."""


# --- decoder numerics ---

class ShapeMismatch(ViphoError):
    """An array argument does not have the documented shape."""


class NonFinite(ViphoError):
    """An array argument contains NaN or infinity."""


class AllPadded(ViphoError):
    """A training batch contains no non-padding target positions."""
