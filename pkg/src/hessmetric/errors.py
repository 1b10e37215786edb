"""Exception types shared across the package."""


class HessMetricError(Exception):
    """Base class for all package errors."""


class DomainError(HessMetricError):
    """A point lies outside the region where the requested object is defined."""


class OrderUnsupported(HessMetricError):
    """A derivative order beyond what the scenario/operation provides."""


class SingularHessian(HessMetricError):
    """A Hessian that must be positive definite is not."""


class QuadratureFailure(HessMetricError):
    """Adaptive quadrature did not reach the requested tolerance."""


class InversionFailure(HessMetricError):
    """CDF inversion did not bracket or converge to tolerance."""


class MissingComposites(HessMetricError):
    """An operation needing target-potential composites was called without them."""


class InvalidN(HessMetricError):
    """Dimension parameter N of the modified tensor must exceed d."""


class RouteUnavailable(HessMetricError):
    """The requested computation route does not apply to this input."""


class SeedRequired(HessMetricError):
    """A stochastic operation was invoked without a seed."""


class InvalidExponent(HessMetricError):
    """Exponent outside the validity range of the inequality."""


class ConfigError(HessMetricError):
    """Malformed CLI/run configuration."""
