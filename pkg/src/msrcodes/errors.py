"""Exception hierarchy.

Every error raised on purpose carries a ``kind`` string; the CLI prints it
as the machine-parsable error class.
"""


class MSRError(Exception):
    kind = "error"


class CapacityError(MSRError):
    """Request exceeds what the field, the dense linear algebra, or the
    enumeration budget can handle."""

    kind = "capacity"


class SearchFailureError(CapacityError):
    """Greedy lambda search ran out of candidates."""


class TooManyErasuresError(MSRError):
    kind = "too-many-erasures"


class RepairError(MSRError):
    kind = "repair-failure"


class CorruptionError(MSRError):
    """Surviving symbols do not satisfy the parity checks."""

    kind = "corruption"


class FormatError(MSRError):
    """Malformed, mismatched or unreadable profile/shard/payload file."""

    kind = "io"


class ShapeError(MSRError, ValueError):
    kind = "shape"


class SingularMatrixError(MSRError, ArithmeticError):
    kind = "singular"
