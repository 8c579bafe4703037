"""Exception types shared across the package."""


class LdlabError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LdlabError):
    """Kernel dimension does not match the grid dimension."""


class InvalidKernel(LdlabError):
    """Kernel parameters outside the admissible range 0 < alpha < n."""


class EmptySet(LdlabError):
    """Operation requires a nonempty set."""


class MassMismatch(LdlabError):
    """Volumes differ by more than the allowed slack."""


class BoxTooSmall(LdlabError):
    """Requested construction does not fit in the domain box."""


class EmptyPiece(LdlabError):
    """A cut produced an empty piece."""


class NotDisjoint(LdlabError):
    """Inputs overlap but must be disjoint."""


class NotStarShaped(LdlabError):
    """1 + rho <= 0 somewhere on the sphere."""


class DegenerateDeficit(LdlabError):
    """Isoperimetric deficit below estimator tolerance; ratio undefined."""


class PreconditionFailed(LdlabError):
    """A documented operation precondition does not hold for the input."""


class ConfigError(LdlabError):
    """Malformed or unknown configuration."""
