"""Descriptor encoding: per-video feature matrices -> fixed-length vectors.

A video arrives as a stack of per-frame feature vectors. Stacked and
transposed, each feature becomes a time series (one row, one value per
frame). The encoder summarizes the matrix two ways:

* cross-correlation block: the rows are either merged into ``groups``
  interleaved series (keeping every feature) or reduced to a subset, each
  resulting series is split into ``windows`` non-overlapping time windows,
  and all pairwise Pearson coefficients are computed per window;
* autocorrelation block: every original row's biased sample autocorrelation
  at ``lags`` strided lags.

The concatenation of the two blocks is the final descriptor. Its layout
(pair ordering, window count, lag schedule) is recorded alongside the values
so descriptors and trained models stay interchange-safe.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .correlation import ZERO_FILL, DegeneratePolicy
from .errors import ShortSeriesWarning, ValidationError


class SelectionScheme(Enum):
    GROUP = "group"
    FIRST = "first"
    RANDOM = "random"
    UNIFORM = "uniform"


class TimeSeriesMatrix:
    """n feature series (rows) observed over k frames (columns)."""

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"expected a 2-D matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValidationError("matrix needs at least one feature series")
        if arr.shape[1] < 2:
            raise ValidationError(
                f"matrix needs at least 2 frames, got {arr.shape[1]}"
            )
        if not np.isfinite(arr).all():
            raise ValidationError("matrix contains non-finite values")
        self.data = arr

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def k(self):
        return self.data.shape[1]

    def __repr__(self):
        return f"TimeSeriesMatrix(n={self.n}, k={self.k})"


@dataclass
class GroupedMatrix:
    """lambda_ grouped series, each the time-major interleaving of delta
    consecutive source rows (row length delta * k)."""

    data: np.ndarray
    lambda_: int
    delta: int


@dataclass
class EncoderConfig:
    """Knobs of the descriptor encoder.

    ``groups`` is the grouped-series count (must divide n when the scheme is
    GROUP); for the subset schemes ``subset_size`` series are kept instead.
    ``windows`` temporal windows and ``lags`` autocorrelation lags at
    multiples of ``stride`` complete the descriptor. ``seed`` drives only the
    RANDOM selection scheme.
    """

    groups: int = 64
    windows: int = 16
    lags: int = 6
    stride: int = 1
    scheme: SelectionScheme = SelectionScheme.GROUP
    subset_size: int | None = None
    policy: DegeneratePolicy = ZERO_FILL
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.scheme, str):
            self.scheme = SelectionScheme(self.scheme.lower())
        if self.groups < 1:
            raise ValidationError("groups must be a positive integer")
        if self.windows < 1:
            raise ValidationError("windows must be a positive integer")
        if self.lags < 0:
            raise ValidationError("lags must be non-negative")
        if self.stride < 1:
            raise ValidationError("stride must be a positive integer")
        if self.scheme is not SelectionScheme.GROUP and self.subset_size is None:
            raise ValidationError(
                f"scheme {self.scheme.value!r} requires subset_size"
            )

    @property
    def series_count(self):
        """Number of series entering the pairwise-correlation block."""
        if self.scheme is SelectionScheme.GROUP:
            return self.groups
        return self.subset_size

    def to_dict(self):
        return {
            "groups": self.groups,
            "windows": self.windows,
            "lags": self.lags,
            "stride": self.stride,
            "scheme": self.scheme.value,
            "subset_size": self.subset_size,
            "policy": self.policy.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["scheme"] = SelectionScheme(d.get("scheme", "group"))
        d["policy"] = DegeneratePolicy(d.get("policy", "zero_fill"))
        return cls(**d)


@dataclass
class TcfLayout:
    """Shape metadata recorded with every descriptor."""

    n: int
    k: int
    scheme: str
    series_count: int
    windows: int
    lags: int
    stride: int
    ccf_length: int
    acf_length: int
    lag_overflow: bool = False
    pair_order: str = "window-major, pairs (a,b) a<b lexicographic"
    acf_order: str = "series-major, lags ascending"

    def to_dict(self):
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class TcfVector:
    """Final descriptor: cross-correlation block followed by the
    autocorrelation block."""

    ccf: np.ndarray
    acf: np.ndarray
    layout: TcfLayout

    @property
    def combined(self):
        return np.concatenate([self.ccf, self.acf])


def ccf_length(series_count, windows):
    """Descriptor length of the pairwise block: windows * C(series_count, 2)."""
    return windows * (series_count * (series_count - 1) // 2)


def acf_length(n, lags):
    return n * lags


def tcf_length(n, series_count, windows, lags):
    """Total descriptor length; pure arithmetic, nothing allocated."""
    return ccf_length(series_count, windows) + acf_length(n, lags)


def build_matrix(frames):
    """Stack per-frame feature vectors into a TimeSeriesMatrix.

    ``frames`` is an ordered sequence of equal-length vectors; the result is
    its transpose (feature i, frame t).
    """
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    if len(frames) < 2:
        raise ValidationError(f"need at least 2 frames, got {len(frames)}")
    n = frames[0].shape
    for t, f in enumerate(frames):
        if f.ndim != 1:
            raise ValidationError(f"frame {t} is not a vector (shape {f.shape})")
        if f.shape != n:
            raise ValidationError(
                f"frame {t} has {f.shape[0]} features, expected {n[0]}"
            )
    return TimeSeriesMatrix(np.stack(frames, axis=0).T)


def group(ts, lambda_):
    """Merge every delta = n/lambda_ consecutive rows into one interleaved
    series.

    Row g of the result lists, frame by frame, the delta source values of
    that frame (time-major interleave), so pairwise correlation of grouped
    rows aligns same-position channels at the same frame. Errors when
    lambda_ does not divide n; silent padding would corrupt the correlation
    semantics.
    """
    if lambda_ < 1:
        raise ValidationError("group count must be positive")
    if ts.n % lambda_ != 0:
        raise ValidationError(
            f"group count {lambda_} does not divide feature count {ts.n}"
        )
    delta = ts.n // lambda_
    data = ts.data.reshape(lambda_, delta, ts.k).transpose(0, 2, 1).reshape(lambda_, -1)
    return GroupedMatrix(np.ascontiguousarray(data), lambda_, delta)


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def select_subset(ts, scheme, m, seed=0):
    """Keep m of the n series according to the scheme.

    FIRST keeps rows 1..m. UNIFORM spaces m indices evenly across 1..n
    (round-half-up); any rounding collision is collapsed and the selection is
    padded with the next unused index so exactly m distinct rows survive.
    RANDOM draws m distinct rows from a generator seeded with ``seed``.
    All schemes return rows in ascending index order.
    """
    if isinstance(scheme, str):
        scheme = SelectionScheme(scheme.lower())
    if scheme is SelectionScheme.GROUP:
        raise ValidationError("GROUP is not a subset-selection scheme")
    if m < 1:
        raise ValidationError("subset size must be positive")
    if m > ts.n:
        raise ValidationError(f"subset size {m} exceeds feature count {ts.n}")
    if scheme is SelectionScheme.FIRST:
        idx = list(range(m))
    elif scheme is SelectionScheme.UNIFORM:
        if m == 1:
            idx = [0]
        else:
            raw = [
                _round_half_up(1 + (j - 1) * (ts.n - 1) / (m - 1)) - 1
                for j in range(1, m + 1)
            ]
            idx = []
            for i in raw:
                if i not in idx:
                    idx.append(i)
            probe = idx[-1] + 1 if idx else 0
            while len(idx) < m:  # pad after rounding collisions
                if probe >= ts.n:
                    probe = next(i for i in range(ts.n) if i not in idx)
                if probe not in idx:
                    idx.append(probe)
                probe += 1
            idx.sort()
    else:  # RANDOM
        rng = np.random.Generator(np.random.PCG64(seed))
        idx = sorted(int(i) for i in rng.choice(ts.n, size=m, replace=False))
    return TimeSeriesMatrix(ts.data[idx, :])


def partition(series_len, windows):
    """Split [1, series_len] into ``windows`` balanced contiguous intervals.

    Returns 1-based inclusive (start, end) pairs; lengths differ by at most
    one, longer windows first. Every window must hold at least 2 samples so
    a correlation is defined, hence series_len >= 2 * windows.
    """
    if windows < 1:
        raise ValidationError("window count must be positive")
    if series_len < 2 * windows:
        raise ValidationError(
            f"series of length {series_len} too short for {windows} windows "
            f"(needs at least {2 * windows} samples)"
        )
    base, rem = divmod(series_len, windows)
    intervals = []
    start = 1
    for i in range(windows):
        width = base + (1 if i < rem else 0)
        intervals.append((start, start + width - 1))
        start += width
    return intervals


def _ccf_rows(ts, cfg):
    if cfg.scheme is SelectionScheme.GROUP:
        return group(ts, cfg.groups).data
    return select_subset(ts, cfg.scheme, cfg.subset_size, cfg.seed).data


def encode_ccf(ts, cfg):
    """Pairwise-correlation block of the descriptor.

    Length = windows * C(series_count, 2), window-major, lexicographic pair
    order within each window.
    """
    rows = _ccf_rows(ts, cfg)
    intervals = partition(rows.shape[1], cfg.windows)
    starts = np.array([s - 1 for s, _ in intervals], dtype=np.int64)
    ends = np.array([e for _, e in intervals], dtype=np.int64)
    return kernels.window_pair_correlations(rows, starts, ends)


def encode_acf(ts, cfg):
    """Autocorrelation block: every row at lags stride, 2*stride, ...,
    lags*stride, series-major. Lags reaching past the end of the sequence
    are zero-filled and flagged with a ShortSeriesWarning."""
    out = np.zeros(ts.n * cfg.lags, dtype=np.float64)
    if cfg.lags == 0:
        return out
    schedule = [cfg.stride * i for i in range(1, cfg.lags + 1)]
    valid = [l for l in schedule if l < ts.k]
    if len(valid) < len(schedule):
        warnings.warn(
            f"lags {schedule[len(valid):]} not shorter than frame count {ts.k}; "
            "zero-filled",
            ShortSeriesWarning,
            stacklevel=2,
        )
    if valid:
        vals = kernels.row_acf(ts.data, np.array(valid, dtype=np.int64))
        grid = out.reshape(ts.n, cfg.lags)
        grid[:, : len(valid)] = vals.reshape(ts.n, len(valid))
    return out


def encode_tcf(ts, cfg):
    """Full descriptor: [cross-correlation block, autocorrelation block]."""
    ccf = encode_ccf(ts, cfg)
    acf = encode_acf(ts, cfg)
    overflow = cfg.lags > 0 and cfg.lags * cfg.stride >= ts.k
    layout = TcfLayout(
        n=ts.n,
        k=ts.k,
        scheme=cfg.scheme.value,
        series_count=cfg.series_count,
        windows=cfg.windows,
        lags=cfg.lags,
        stride=cfg.stride,
        ccf_length=len(ccf),
        acf_length=len(acf),
        lag_overflow=overflow,
    )
    return TcfVector(ccf=ccf, acf=acf, layout=layout)
