"""Exception hierarchy shared by all dfmlab modules."""


class DFMError(Exception):
    """Base class for every error raised by dfmlab."""


class InputError(DFMError, ValueError):
    """Malformed arguments: lattice/kind mismatch, out-of-range indices, bad parameters."""


class TagError(DFMError, TypeError):
    """A field's action tag does not match what a composer accepts."""


class BranchError(DFMError, ValueError):
    """A group element sits on (or too close to) the cut of the principal logarithm."""


class DegenerateInputError(DFMError, ValueError):
    """The scalar field vanishes where a polar decomposition is needed."""


class CapacityError(DFMError, ValueError):
    """A dense build would exceed the configured size cap."""


class ArchiveError(DFMError, OSError):
    """Unreadable field archive: bad magic, version mismatch or truncated payload."""


class ConfigError(DFMError, ValueError):
    """Experiment configuration failed schema validation."""
