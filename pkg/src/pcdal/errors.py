"""Error taxonomy shared across the package."""


class PcdalError(Exception):
    """Base class for all package errors."""


class FormatError(PcdalError):
    """Malformed PTNS container: bad magic, version, dtype code, rank or extents."""


class TruncationError(PcdalError):
    """PTNS payload length disagrees with the declared shape."""


class LayoutError(PcdalError):
    """Axis-role bookkeeping is inconsistent with the tensor it describes."""


class ShapeError(PcdalError):
    """Tensor shapes incompatible with the requested operation."""


class UndefinedMetricError(PcdalError):
    """A metric has no defined value for this input (e.g. empty mask surface).

    For surface-distance metrics, `side` names which argument was empty
    ("a", "b" or "both").
    """

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side
