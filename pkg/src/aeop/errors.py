"""Exception hierarchy shared by all aeop modules."""


class AeopError(Exception):
    """Base class for all library errors."""


class NonFinite(AeopError):
    """An input that must be finite (and possibly positive) is not."""


class BadOrdering(AeopError):
    """Branch points violate e3 < e2 < e1 or the zero-sum constraint."""


class PoleAt(AeopError):
    """Evaluation was requested inside the guard radius of a pole."""

    def __init__(self, location, message=None):
        self.location = location
        super().__init__(message or f"evaluation too close to pole at {location}")


class ZeroFunction(AeopError):
    """All coefficients of an expansion are below the degree tolerance."""


class ToleranceNotMet(AeopError):
    """Quadrature doubling hit its node cap before the target tolerance.

    Carries the last two trapezoid values so callers can judge how far off
    the result is.
    """

    def __init__(self, value, previous, rtol, nodes):
        self.value = value
        self.previous = previous
        self.rtol = rtol
        self.nodes = nodes
        est = abs(value - previous)
        super().__init__(
            f"trapezoid doubling stalled at N={nodes}: last={value!r}, "
            f"previous={previous!r}, |diff|={est:.3e}, target rtol={rtol:.1e}"
        )


class EvaluationFailure(AeopError):
    """An integrand raised while being sampled."""


class ParameterOutOfRange(AeopError):
    """Weight or polynomial parameters outside their validity range."""


class DegenerateMinor(AeopError):
    """A leading bimoment minor is numerically zero; family truncated."""

    def __init__(self, k, det, bound):
        self.k = k
        self.det = det
        self.bound = bound
        super().__init__(
            f"bimoment minor D_{k} = {det!r} is degenerate "
            f"(|D_{k}| < 1e-12 * Hadamard bound {bound:.3e})"
        )


class NeedsDerivative(AeopError):
    """A confluent kernel form required a derivative unavailable at a pole."""


class NotRealOnContour(AeopError):
    """Zero search requested for a function with non-negligible imaginary part."""


class UnstableCount(AeopError):
    """Zero count failed to stabilize under grid doubling (suspected multiple zero)."""

    def __init__(self, counts, resolution):
        self.counts = counts
        self.resolution = resolution
        super().__init__(
            f"zero count did not stabilize by M={resolution}: counts={counts}"
        )


class MomentDivergence(AeopError):
    """An interval quadrature failed to converge (weight moments diverge?)."""


class ConditionOneViolated(AeopError):
    """Branch points do not satisfy e3 < 0, e3 < e2 < |e3|/2."""


class OutOfInterval(AeopError):
    """Argument outside the orthogonality interval (e3, e2)."""


class DegenerateDenominator(AeopError):
    """A reconstruction constant has a vanishing denominator."""

    def __init__(self, factor_name, value, scale):
        self.factor_name = factor_name
        self.value = value
        super().__init__(
            f"denominator {factor_name} = {value!r} is below 1e-12 * scale ({scale:.3e})"
        )
