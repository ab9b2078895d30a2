"""Exception types shared across the package."""


class KeyrateError(Exception):
    """Base class for all package-specific errors."""


class ZeroMassError(KeyrateError, ValueError):
    """Raised when a distribution with zero total weight is normalized."""


class AlphabetMismatchError(KeyrateError, ValueError):
    """Raised when alphabets of combined objects do not line up."""


class InvalidArgumentError(KeyrateError, ValueError):
    """Raised for arguments outside an operation's contract."""


class UnsupportedError(KeyrateError, ValueError):
    """Raised for parameter regimes the implementation does not cover."""


class DomainError(KeyrateError, ValueError):
    """Raised when a closed-form expression is evaluated outside its domain."""


class BracketError(KeyrateError, ValueError):
    """Raised when a root solver is given an interval that does not bracket."""


class StructureError(KeyrateError, ValueError):
    """Raised when a distribution lacks the symbol structure an analysis needs."""


class DegenerateProjectionError(KeyrateError, ValueError):
    """Raised when a projection leaves zero mass to renormalize."""


class DocumentError(KeyrateError, ValueError):
    """Raised for semantically invalid serialized documents."""
