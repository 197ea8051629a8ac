"""Exception types raised by the geometry pipeline."""


class CurvMeasError(Exception):
    """Base class for every error raised by curvmeas."""


class SceneError(CurvMeasError, ValueError):
    """Malformed scene description or violated shape invariant."""


class EmptyScene(SceneError):
    pass


class NotInDomain(CurvMeasError):
    """The nearest point of A is not unique, or the point lies in A."""


class NotOnSet(CurvMeasError):
    """A base point that should lie in A does not."""


class NotRegular(CurvMeasError):
    """The point fails the numerical regularity test."""


class StencilOutsideDomain(NotRegular):
    """A finite-difference stencil point has no unique nearest point."""


class NotInBundle(CurvMeasError):
    """The pair (a, u) does not reach far enough along the normal ray."""


class NotOnManifold(CurvMeasError):
    pass


class EmptyLevelSet(CurvMeasError):
    pass


class InvalidIndex(CurvMeasError, ValueError):
    pass


class ReachTooSmall(CurvMeasError):
    pass


class StratumEmpty(CurvMeasError):
    pass


class Unsupported(CurvMeasError):
    pass
