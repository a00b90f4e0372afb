"""The two kernel backends must be interchangeable to float precision."""

import numpy as np
import pytest

from tscorr.kernels import available_backends

BACKENDS = available_backends()


requires_compiled = pytest.mark.skipif(
    "compiled" not in BACKENDS, reason="compiled extension not built"
)


def _random_case(rng):
    r = int(rng.integers(2, 12))
    length = int(rng.integers(4, 200))
    rows = rng.normal(size=(r, length)) * rng.uniform(0.1, 10)
    if rng.random() < 0.2:
        rows[int(rng.integers(0, r))] = rng.uniform(-5, 5)  # constant row
    nwin = int(rng.integers(1, max(2, length // 2)))
    nwin = min(nwin, length // 2)
    base, rem = divmod(length, nwin)
    starts, ends, pos = [], [], 0
    for i in range(nwin):
        width = base + (1 if i < rem else 0)
        starts.append(pos)
        ends.append(pos + width)
        pos += width
    return rows, np.array(starts, dtype=np.int64), np.array(ends, dtype=np.int64)


@requires_compiled
def test_pair_correlations_backends_agree():
    rng = np.random.default_rng(42)
    for _ in range(100):
        rows, starts, ends = _random_case(rng)
        a = BACKENDS["numpy"].window_pair_correlations(rows, starts, ends)
        b = BACKENDS["compiled"].window_pair_correlations(rows, starts, ends)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@requires_compiled
def test_row_acf_backends_agree():
    rng = np.random.default_rng(43)
    for _ in range(100):
        n = int(rng.integers(1, 20))
        k = int(rng.integers(3, 150))
        rows = rng.normal(size=(n, k))
        if rng.random() < 0.2:
            rows[int(rng.integers(0, n))] = 3.14
        lags = np.sort(rng.choice(np.arange(1, k), size=min(5, k - 1), replace=False))
        a = BACKENDS["numpy"].row_acf(rows, lags.astype(np.int64))
        b = BACKENDS["compiled"].row_acf(rows, lags.astype(np.int64))
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_selected_backend_exposed():
    from tscorr import kernels

    assert kernels.BACKEND in BACKENDS
