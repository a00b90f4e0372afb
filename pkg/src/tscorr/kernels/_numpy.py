"""Vectorized numpy backend for the correlation kernels."""

import numpy as np


def window_pair_correlations(rows, starts, ends):
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.int64)
    ends = np.asarray(ends, dtype=np.int64)
    r = rows.shape[0]
    npairs = r * (r - 1) // 2
    ia, ib = np.triu_indices(r, k=1)  # lexicographic (a, b), a < b
    out = np.empty(len(starts) * npairs, dtype=np.float64)
    for w, (s, e) in enumerate(zip(starts, ends)):
        block = rows[:, s:e]
        dev = block - block.mean(axis=1, keepdims=True)
        ss = np.einsum("ij,ij->i", dev, dev)
        # a constant row has zero variance by definition even when the
        # rounded mean leaves ~ulp-sized deviations
        ss[block.max(axis=1) == block.min(axis=1)] = 0.0
        cross = dev @ dev.T
        root = np.sqrt(ss)  # outer product of roots: no underflow for tiny ss
        denom = np.outer(root, root)
        zero = (ss == 0.0)[:, None] | (ss == 0.0)[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            corr = np.where(zero, 0.0, cross / denom)
        out[w * npairs : (w + 1) * npairs] = corr[ia, ib]
    return out


def row_acf(rows, lags):
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    lags = np.asarray(lags, dtype=np.int64)
    n, k = rows.shape
    dev = rows - rows.mean(axis=1, keepdims=True)
    den = np.einsum("ij,ij->i", dev, dev)
    den[rows.max(axis=1) == rows.min(axis=1)] = 0.0
    out = np.zeros((n, len(lags)), dtype=np.float64)
    nz = den > 0.0
    for j, l in enumerate(lags):
        num = np.einsum("ij,ij->i", dev[:, : k - l], dev[:, l:])
        out[nz, j] = num[nz] / den[nz]
    return out.reshape(-1)
