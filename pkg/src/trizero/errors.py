"""Exception taxonomy for the trizero toolkit.

Every error raised on a contract violation derives from TrizeroError so that
callers (and the CLI) can distinguish domain failures from genuine bugs.
"""


class TrizeroError(Exception):
    """Base class for all toolkit errors."""


class ArityError(TrizeroError):
    """Variable-count mismatch in a polynomial substitution."""


class DomainError(TrizeroError):
    """Argument outside the mathematical domain of an operation."""


class ThetaDegreeError(TrizeroError):
    """A history-variable polynomial exceeded the configured degree cap."""


class DegenerateCubicTerm(TrizeroError):
    """Parameter point with a*tau0 = 3*beta: the cubic coefficient of the
    characteristic function vanishes and the reduction constants blow up."""


class SpectralDegeneracy(TrizeroError):
    """Imaginary-axis scan of the characteristic function found an
    unexpectedly small modulus away from the triple root at zero."""


class NormalizationError(TrizeroError):
    """The adjoint-basis normalization system is rank deficient or
    inconsistent beyond tolerance."""


class SplitError(TrizeroError):
    """Range/complement splitting failed to reconstruct its input."""


class CMResidualError(TrizeroError):
    """Center-manifold linear solve left residuals above tolerance."""


class LemmaPreconditionError(TrizeroError):
    """Input to the triangular lemma solve carries pure-power terms."""


class LambdaResidualError(TrizeroError):
    """Order-by-order bookkeeping of the realizability algorithm failed:
    either a requested normal-form correction is unreachable or re-expanded
    lower-order terms drifted from their recorded values."""


class BlowupError(TrizeroError):
    """Trajectory norm exceeded the blow-up threshold."""


class QuadratureError(TrizeroError):
    """Quadrature rule preconditions violated (composite Simpson needs an
    even number of panels)."""


class SpectralMismatch(TrizeroError):
    """Collocation spectrum does not show the expected three-eigenvalue
    cluster at zero."""


class ParseError(TrizeroError):
    """A text input failed to parse.  Carries file/line context."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:" if line is None else f"{path}:{line}:"
        super().__init__(f"{where} {message}".strip())
