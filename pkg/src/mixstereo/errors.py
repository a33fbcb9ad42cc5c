"""Exception hierarchy.

Domain errors map to CLI exit code 1; environment failures use the built-in
OSError family and map to exit code 2.
"""

from __future__ import annotations


class MixStereoError(Exception):
    """Base class for all MixStereo errors."""


class DomainError(MixStereoError, ValueError):
    """A domain precondition was violated (shapes, channels, unknown names)."""


class FormatError(DomainError):
    """A file payload is corrupt or not in the expected format."""


class WeightManifestError(DomainError):
    """Model weights do not match the architecture's parameter manifest."""


class EmptyEvaluationError(DomainError):
    """A metric was requested over zero valid pixels."""
