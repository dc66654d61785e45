"""Exception types shared across the package.

Every failure that callers are expected to catch derives from PacklabError,
so the CLI can map library failures to exit code 1 uniformly.
"""


class PacklabError(Exception):
    """Base class for invariant and contract violations."""


# -- triangulation construction --------------------------------------------

class NonManifold(PacklabError):
    """An edge borders more than two faces, a vertex link is not a single
    fan, or the complex is not genus zero."""


class Disconnected(PacklabError):
    """The face complex is not vertex-connected (or references isolated
    vertices)."""


class NonSimple(PacklabError):
    """A face repeats a vertex, producing a loop or degenerate edge."""


class OrientationInconsistent(PacklabError):
    """Two faces traverse a shared edge in the same direction."""


class ParamOutOfRange(PacklabError):
    """A generator parameter is outside its documented range."""


class IndexOutOfRange(PacklabError):
    """An exhaustion index is outside the sequence."""


# -- packing / layout -------------------------------------------------------

class NotADisk(PacklabError):
    """Radii solving needs a single boundary component."""


class NoConvergence(PacklabError):
    """An iteration hit its sweep or residual budget without meeting tol."""


class LayoutInconsistent(PacklabError):
    """Closure error around some vertex exceeds the layout budget."""


# -- embeddings -------------------------------------------------------------

class InvalidEmbedding(PacklabError):
    """Crossing edges or mismatched coordinate count."""


class DegenerateFace(PacklabError):
    """A face has zero signed area."""


class PointOutsideDomain(PacklabError):
    """A query point lies outside the embedded complex."""


class BallEscapesDomain(PacklabError):
    """An averaging ball left the domain; the smoothing radius is too big."""


# -- solvers ----------------------------------------------------------------

class SingularSystem(PacklabError):
    """The clamped system has no free unknowns pinned to both sides, or the
    matrix factorization failed."""


class TooShort(PacklabError):
    """A capacity trace has fewer than the minimum entries for
    classification."""
