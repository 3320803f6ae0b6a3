"""Exception hierarchy shared across the package.

Data errors map to CLI exit code 2, solver errors to 3.
"""


class LdlDenoiseError(Exception):
    """Base class for all package-specific errors."""


class DataError(LdlDenoiseError):
    """Invalid input data (files, matrices, manifests)."""


class NonFiniteError(DataError):
    """A matrix contains NaN or infinite entries."""


class NegativeEntry(DataError):
    """A label distribution entry is below the clamping threshold."""


class RowSumViolation(DataError):
    """A label distribution row does not sum to one within tolerance."""


class ShapeMismatch(DataError):
    """An array has the wrong number of dimensions or declared shape."""


class DimensionMismatch(DataError):
    """Two arrays that must be conformable are not."""


class PatternMismatch(DataError):
    """Two sparse matrices do not share the same sparsity pattern."""


class ParseError(DataError):
    """A file could not be parsed in its documented format."""


class ChecksumMismatch(DataError):
    """Recorded and recomputed checksums disagree."""


class SolverError(LdlDenoiseError):
    """Numerical failure inside the fitting procedure."""


class SvdFailure(SolverError):
    """Singular value decomposition did not converge."""


class SingularSystem(SolverError):
    """A linear solve failed even after diagonal regularization."""


class NonFiniteState(SolverError):
    """Solver state picked up NaN/Inf entries."""


class BandwidthNonPositive(LdlDenoiseError):
    """Kernel bandwidth must be strictly positive."""


class DegenerateInterval(LdlDenoiseError):
    """Truncation interval is empty."""


class UnknownMetric(LdlDenoiseError):
    """Metric name not among the six supported measures."""


class NonFiniteScore(LdlDenoiseError):
    """Score matrix for ranking contains NaN or Inf."""


class UnsupportedAlpha(LdlDenoiseError):
    """No critical-value table for the requested significance level."""


class AllZeroDifferences(LdlDenoiseError):
    """Paired samples are identical; the signed-rank test is undefined."""


class BenchmarkIncomplete(LdlDenoiseError):
    """Some benchmark cells failed; results are partial."""
