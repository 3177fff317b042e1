"""Exception types shared across the package."""


class McnnError(Exception):
    """Base class for all package errors."""


class BoundaryParameter(McnnError):
    """A template inequality evaluates within tolerance of equality."""


class DegenerateTemplate(McnnError):
    """Zero or tied parameters make the region signature ill-defined."""


class EmptyComposition(McnnError):
    """Composing the per-layer basic sets produced no patterns."""


class EmptyShift(McnnError):
    """Trimming removed every state of a transition matrix."""


class OracleLimit(McnnError):
    """A brute-force oracle was asked for more than its configured bound."""


class NotIrreducible(McnnError):
    """Operation requires an irreducible matrix."""


class NoConvergence(McnnError):
    """Power iteration did not converge within the iteration budget."""


class SupportMismatch(McnnError):
    """A measure or map is not supported where the operation needs it."""


class IncompatibleLabels(McnnError):
    """A state map does not respect edge labels."""


class DepthLimit(McnnError):
    """Fractal enumeration would exceed the rectangle budget."""
