"""Exception hierarchy shared by all mg1learn modules."""


class Mg1Error(Exception):
    """Base class for all mg1learn errors."""


class DimensionMismatch(Mg1Error):
    """Vector/matrix shapes are inconsistent."""


class NegativeProbability(Mg1Error):
    """A probability vector has negative entries or does not sum to 1."""


class BadDiagonal(Mg1Error):
    """A sub-generator diagonal entry is not strictly negative."""


class NegativeRate(Mg1Error):
    """An off-diagonal transition rate is negative."""


class PositiveRowSum(Mg1Error):
    """A sub-generator row sums to more than zero."""


class SingularGenerator(Mg1Error):
    """The sub-generator is singular: absorption is not certain (infinite mean)."""


class RejectionBudgetExceeded(Mg1Error):
    """Too many consecutive rejected draws; the sampler is misconfigured."""


class Unstable(Mg1Error):
    """Queue utilization is >= 1; no stationary distribution exists."""


class NoConvergence(Mg1Error):
    """An iterative solver failed to reach its tolerance."""


class TailTooHeavy(Mg1Error):
    """Probability mass beyond the truncation level exceeds the tolerance."""


class DegenerateFeature(Mg1Error):
    """A feature column has zero variance and cannot be standardized."""


class DatasetMismatch(Mg1Error):
    """Datasets disagree on feature or target layout."""


class PercentileBeyondTruncation(Mg1Error):
    """Requested percentile exceeds the probability mass covered by the vector."""


class NonPositiveSample(Mg1Error):
    """A service-time sample contains non-positive values."""
