"""Exception types raised by bundlekit."""


class BundleKitError(Exception):
    """Base class for all library errors."""


class FrameMismatch(BundleKitError, ValueError):
    """Two vectors or frames that must agree do not."""


class ShapeError(BundleKitError, ValueError):
    pass


class AliasError(BundleKitError, ValueError):
    """The sampling grid is too coarse for the requested mode window."""


class GridError(BundleKitError, ValueError):
    pass


class RealityError(BundleKitError, ValueError):
    """A potential that should be real-valued is not."""


class HermiticityError(BundleKitError, ValueError):
    pass


class StepError(BundleKitError, ArithmeticError):
    """The transport integrator cannot take the requested steps."""
