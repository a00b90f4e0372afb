"""The .tsf feature-matrix format and the manifest, as emitted by the
extractor.

Layout contract (little-endian): magic ``TSF1``, u32 feature count n, u32
frame count k, then n*k float32 values frame-major; file size exactly
12 + 4*n*k. The manifest is UTF-8 ``label<TAB>path`` lines relative to its
own directory. These two formats are the whole interface to the consumer
pipeline.
"""

import os
import struct

import numpy as np

MAGIC = b"TSF1"


class TsfError(ValueError):
    pass


class TsfWriter:
    """Streams frames into a .tsf file; the k header field is patched on
    close so the frame count need not be known up front."""

    def __init__(self, path, n):
        if n < 1:
            raise TsfError("feature width must be positive")
        self.n = int(n)
        self.k = 0
        self._fh = open(path, "wb")
        self._fh.write(MAGIC)
        self._fh.write(struct.pack("<II", self.n, 0))

    def append_frame(self, values):
        arr = np.ascontiguousarray(values, dtype="<f4").reshape(-1)
        if arr.shape[0] != self.n:
            raise TsfError(f"frame has {arr.shape[0]} features, expected {self.n}")
        if not np.isfinite(arr).all():
            raise TsfError("frame contains non-finite values")
        self._fh.write(arr.tobytes())
        self.k += 1

    def close(self):
        self._fh.seek(8)
        self._fh.write(struct.pack("<I", self.k))
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_header(path):
    """(n, k) from the header, validating magic and exact file size."""
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        head = fh.read(12)
    if len(head) < 12:
        raise TsfError(f"{path}: too short for a TSF header")
    if head[:4] != MAGIC:
        raise TsfError(f"{path}: bad magic {head[:4]!r}")
    n, k = struct.unpack("<II", head[4:12])
    if size != 12 + 4 * n * k:
        raise TsfError(
            f"{path}: size mismatch (header implies {12 + 4 * n * k}, file is {size})"
        )
    return n, k


def read_matrix(path):
    """Full read: (n, k) float64 matrix, series-major."""
    n, k = read_header(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    payload = np.frombuffer(blob, dtype="<f4", offset=12)
    if not np.isfinite(payload).all():
        raise TsfError(f"{path}: non-finite payload")
    return payload.astype(np.float64).reshape(k, n).T


def write_manifest(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for label, rel in records:
            fh.write(f"{label}\t{rel}\n")


def read_manifest(path):
    """[(label, relpath)] in file order; comments/blank lines skipped."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise TsfError(f"{path}:{lineno}: expected 'label<TAB>path'")
            label, rel = line.split("\t", 1)
            records.append((label, rel))
    return records
