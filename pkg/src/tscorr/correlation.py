"""Scalar correlation primitives.

Everything downstream (descriptor encoding, the synthetic-data checks, the
test oracles) reduces to two statistics defined here: the sample Pearson
cross-correlation between two equal-length series and the biased sample
autocorrelation of one series at a set of lags.

Correlations of a zero-variance series are mathematically undefined; the
``DegeneratePolicy`` pins that case to an explicit convention (currently the
only policy is ZERO_FILL, which maps undefined coefficients to 0).
"""

import enum
import warnings

import numpy as np

from .errors import ShortSeriesWarning, ValidationError


class DegeneratePolicy(enum.Enum):
    """How to resolve correlations that divide by a zero standard deviation."""

    ZERO_FILL = "zero_fill"


ZERO_FILL = DegeneratePolicy.ZERO_FILL


def _as_series(x, name):
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {a.shape}")
    if a.size < 1:
        raise ValidationError(f"{name} must contain at least one value")
    if not np.isfinite(a).all():
        raise ValidationError(f"{name} contains non-finite values")
    return a


def pearson(a, b, policy=ZERO_FILL):
    """Sample Pearson correlation of two equal-length series.

    Computed two-pass in double precision: deviations from the means,
    normalized by (k-1) times the two sample standard deviations. If either
    series has zero sample variance the coefficient is undefined and the
    policy applies (0 under ZERO_FILL).
    """
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    if a.size != b.size:
        raise ValidationError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValidationError("correlation needs at least 2 samples, got 1")
    da = a - a.mean()
    db = b - b.mean()
    # an exactly-constant series is zero-variance regardless of what the
    # rounded mean leaves in the deviations
    ssa = 0.0 if a.max() == a.min() else float(da @ da)
    ssb = 0.0 if b.max() == b.min() else float(db @ db)
    if ssa == 0.0 or ssb == 0.0:
        if policy is DegeneratePolicy.ZERO_FILL:
            return 0.0
        raise ValidationError("zero-variance series with no degenerate policy")
    # (k-1)*s_a*s_b == sqrt(ssa)*sqrt(ssb) given ddof=1; multiplying the
    # roots (not rooting the product) avoids underflow for tiny deviations
    return float(da @ db) / (np.sqrt(ssa) * np.sqrt(ssb))


def sample_acf(a, lags, policy=ZERO_FILL):
    """Biased sample autocorrelation of ``a`` at each requested lag.

    r(l) = sum_{t=1..k-l} (a_t - m)(a_{t+l} - m) / sum_{t=1..k} (a_t - m)^2

    The all-k denominator (biased estimator) keeps every |r(l)| <= 1. Lags
    of at least the series length cannot be estimated; they are zero-filled
    and a ShortSeriesWarning is issued so callers can flag the sequence as
    too short rather than treating it as a hard failure. A zero-variance
    series yields all zeros under ZERO_FILL.
    """
    a = _as_series(a, "a")
    k = a.size
    if k < 2:
        raise ValidationError("autocorrelation needs at least 2 samples, got 1")
    lags = list(lags)
    for l in lags:
        if int(l) != l or l < 1:
            raise ValidationError(f"lags must be positive integers, got {l!r}")
    out = np.zeros(len(lags), dtype=np.float64)
    if not lags:
        return out
    overflow = [l for l in lags if l >= k]
    if overflow:
        warnings.warn(
            f"lags {overflow} not shorter than series length {k}; zero-filled",
            ShortSeriesWarning,
            stacklevel=2,
        )
    dev = a - a.mean()
    den = 0.0 if a.max() == a.min() else float(dev @ dev)
    if den == 0.0:
        if policy is DegeneratePolicy.ZERO_FILL:
            return out
        raise ValidationError("zero-variance series with no degenerate policy")
    for i, l in enumerate(lags):
        if l < k:
            out[i] = float(dev[: k - l] @ dev[l:]) / den
    return out
