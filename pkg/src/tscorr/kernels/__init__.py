"""Hot correlation kernels with backend selection.

Two equivalent implementations of the bulk operations that dominate encoding
time: a Cython extension (built at install time) and a vectorized numpy
fallback. The compiled backend is preferred when importable; set
``TSCORR_NO_EXT=1`` to force the fallback. ``BACKEND`` records the choice.

Both backends implement:

  window_pair_correlations(rows, starts, ends)
      All pairwise Pearson coefficients of the rows restricted to each
      [start, end) window, window-major, pairs in lexicographic (a, b) a < b
      order. Zero-variance rows within a window contribute 0.

  row_acf(rows, lags)
      Biased sample autocorrelation of every row at each lag (all lags must
      be < row length), series-major. Zero-variance rows yield zeros.

Accumulation is two-pass double precision in both backends, so they agree to
within a few ulp and either can be checked against the scalar primitives in
``tscorr.correlation``.
"""

import os

from . import _numpy

BACKEND = "numpy"
_impl = _numpy

if os.environ.get("TSCORR_NO_EXT", "") != "1":
    try:
        from . import _compiled

        _impl = _compiled
        BACKEND = "compiled"
    except ImportError:
        pass


def window_pair_correlations(rows, starts, ends):
    return _impl.window_pair_correlations(rows, starts, ends)


def row_acf(rows, lags):
    return _impl.row_acf(rows, lags)


def available_backends():
    """Name -> module for every importable backend (used by tests and the
    benchmark)."""
    backends = {"numpy": _numpy}
    try:
        from . import _compiled

        backends["compiled"] = _compiled
    except ImportError:
        pass
    return backends
