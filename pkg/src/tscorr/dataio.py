"""File formats and the synthetic corpus generator.

Formats owned by this module (all little-endian; full byte layouts in the
README):

* ``.tsf`` feature-matrix file: magic ``TSF1``, u32 feature count n, u32
  frame count k, then n*k float32 values frame-major. The carrier between
  any per-frame feature extractor and this package.
* manifest: UTF-8 text, one ``label<TAB>path`` record per line, ``#``
  comments and blank lines ignored, paths relative to the manifest.
* ``.tcfc`` descriptor cache: magic ``TCF1``, u32 header length, JSON
  header (ids, offsets, layout), then float64 payload. Lets descriptors be
  encoded once and re-used byte-identically.

The synthetic generator builds labeled corpora whose classes differ only in
cross-channel correlation structure and per-channel periodicity. Channels
are exactly mean-centered per video before a shared per-channel profile is
added back, so mean pooling sees the identical vector for every video while
correlations are untouched: any accuracy above chance must come from
temporal structure.
"""

import json
import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .encoder import TimeSeriesMatrix
from .errors import FormatError, ValidationError
from .evaluation import DatasetItem, LabeledDataset

TSF_MAGIC = b"TSF1"
CACHE_MAGIC = b"TCF1"


# ---------------------------------------------------------------------------
# .tsf feature-matrix files


def write_tsf(matrix, destination):
    """Write a TimeSeriesMatrix as a .tsf file (frame-major float32)."""
    with np.errstate(over="ignore"):
        payload = np.ascontiguousarray(matrix.data.T, dtype="<f4")
    if not np.isfinite(payload).all():
        raise ValidationError("matrix not representable in 32-bit floats")
    with open(destination, "wb") as fh:
        fh.write(TSF_MAGIC)
        fh.write(struct.pack("<II", matrix.n, matrix.k))
        fh.write(payload.tobytes())


class TsfWriter:
    """Streaming .tsf writer: frames are appended one at a time and the
    frame-count header field is patched on close."""

    def __init__(self, destination, n):
        if n < 1:
            raise ValidationError("feature count must be positive")
        self.n = int(n)
        self.k = 0
        self._fh = open(destination, "wb")
        self._fh.write(TSF_MAGIC)
        self._fh.write(struct.pack("<II", self.n, 0))

    def append_frame(self, values):
        arr = np.ascontiguousarray(values, dtype="<f4").reshape(-1)
        if arr.shape[0] != self.n:
            raise ValidationError(
                f"frame has {arr.shape[0]} values, expected {self.n}"
            )
        if not np.isfinite(arr).all():
            raise ValidationError("frame contains non-finite values")
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


def read_tsf(source):
    """Read a .tsf file into a TimeSeriesMatrix (values promoted to float64,
    rows = feature series)."""
    with open(source, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12:
        raise FormatError(f"{source}: too short for a TSF header")
    magic = blob[:4]
    if magic != TSF_MAGIC:
        raise FormatError(
            f"{source}: bad magic {magic!r}, expected {TSF_MAGIC!r}"
        )
    n, k = struct.unpack("<II", blob[4:12])
    expected = 12 + 4 * n * k
    if len(blob) != expected:
        raise FormatError(
            f"{source}: size mismatch, header implies {expected} bytes "
            f"but file has {len(blob)}"
        )
    payload = np.frombuffer(blob, dtype="<f4", offset=12)
    if not np.isfinite(payload).all():
        raise FormatError(f"{source}: payload contains non-finite values")
    data = payload.astype(np.float64).reshape(k, n).T
    return TimeSeriesMatrix(data)


# ---------------------------------------------------------------------------
# manifests


def write_manifest(path, records):
    """records: iterable of (label, relative_path)."""
    with open(path, "w", encoding="utf-8") as fh:
        for label, rel in records:
            fh.write(f"{label}\t{rel}\n")


def read_manifest(path):
    """Parse a manifest into a lazily-loading LabeledDataset.

    Matrices are read only when an item is first asked for one; a missing
    referenced file surfaces then, naming the manifest line.
    """
    base = os.path.dirname(os.path.abspath(path))
    items = []
    seen = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise FormatError(f"{path}:{lineno}: expected 'label<TAB>path'")
            label, rel = line.split("\t", 1)
            if not label:
                raise FormatError(f"{path}:{lineno}: empty label")
            if not rel:
                raise FormatError(f"{path}:{lineno}: empty path")
            if rel in seen:
                raise FormatError(
                    f"{path}: duplicate path {rel!r} on lines "
                    f"{seen[rel]} and {lineno}"
                )
            seen[rel] = lineno
            items.append(
                DatasetItem(
                    video_id=rel,
                    label=label,
                    loader=_tsf_loader(os.path.join(base, rel), path, lineno),
                )
            )
    if not items:
        raise FormatError(f"{path}: no records")
    return LabeledDataset(items)


def _tsf_loader(abspath, manifest, lineno):
    def load():
        if not os.path.exists(abspath):
            raise FormatError(
                f"{manifest}:{lineno}: referenced file missing: {abspath}"
            )
        return read_tsf(abspath)

    return load


# ---------------------------------------------------------------------------
# descriptor cache


def write_descriptor_cache(path, entries, layout=None):
    """entries: ordered (id, float vector) pairs. Byte-deterministic for
    identical inputs (no timestamps, canonical JSON)."""
    ids = []
    vectors = []
    for vid, vec in entries:
        ids.append(str(vid))
        vectors.append(np.ascontiguousarray(vec, dtype="<f8"))
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate descriptor ids")
    offsets = []
    pos = 0
    for v in vectors:
        offsets.append({"id": ids[len(offsets)], "offset": pos, "length": int(v.size)})
        pos += int(v.size)
    header = {
        "format": "tscorr-descriptor-cache",
        "version": 1,
        "layout": None if layout is None else layout.to_dict(),
        "entries": offsets,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for v in vectors:
            fh.write(v.tobytes())


def read_descriptor_cache(path):
    """Returns (ordered id -> float64 vector dict, layout dict or None)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != CACHE_MAGIC:
        raise FormatError(f"{path}: not a descriptor cache")
    (hlen,) = struct.unpack("<I", blob[4:8])
    try:
        header = json.loads(blob[8 : 8 + hlen])
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: bad cache header: {e}") from e
    payload = np.frombuffer(blob, dtype="<f8", offset=8 + hlen)
    out = {}
    for ent in header["entries"]:
        seg = payload[ent["offset"] : ent["offset"] + ent["length"]]
        if seg.size != ent["length"]:
            raise FormatError(f"{path}: truncated payload for {ent['id']!r}")
        out[ent["id"]] = seg.astype(np.float64)
    return out, header.get("layout")


# ---------------------------------------------------------------------------
# synthetic corpora


@dataclass
class LatentGroup:
    """Channels co-driven by one shared standard-normal latent, each with a
    target sign."""

    channels: list
    signs: list

    def validate(self, n):
        if len(self.channels) != len(self.signs):
            raise ValidationError("latent group: channels/signs length mismatch")
        if len(self.channels) < 1:
            raise ValidationError("latent group needs at least one channel")
        for c in self.channels:
            if not 0 <= c < n:
                raise ValidationError(f"latent group channel {c} out of range")
        for s in self.signs:
            if s not in (-1, 1):
                raise ValidationError(f"latent group sign {s!r} must be +1 or -1")


@dataclass
class PeriodicComponent:
    channel: int
    period: float
    amplitude: float = 1.0

    def validate(self, n):
        if not 0 <= self.channel < n:
            raise ValidationError(f"periodic channel {self.channel} out of range")
        if self.period <= 1:
            raise ValidationError("period must exceed 1 frame")
        if self.amplitude < 0:
            raise ValidationError("amplitude must be non-negative")


@dataclass
class ClassBlueprint:
    name: str
    channels: int
    frames: tuple  # (k_min, k_max) inclusive
    correlation: list = field(default_factory=list)
    periodicity: list = field(default_factory=list)
    noise_sigma: float = 0.0

    def validate(self):
        if not self.name:
            raise ValidationError("class name must be non-empty")
        if self.channels < 1:
            raise ValidationError("channel count must be positive")
        k_min, k_max = self.frames
        if k_min < 2 or k_max < k_min:
            raise ValidationError(f"bad frame range {self.frames}")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be non-negative")
        for g in self.correlation:
            g.validate(self.channels)
        for p in self.periodicity:
            p.validate(self.channels)


@dataclass
class SynthSpec:
    classes: list
    videos_per_class: int
    seed: int = 0
    profile_amplitude: float = 1.0

    def validate(self):
        if not self.classes:
            raise ValidationError("spec needs at least one class")
        if self.videos_per_class < 1:
            raise ValidationError("videos_per_class must be positive")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ValidationError("class names must be unique")
        widths = {c.channels for c in self.classes}
        if len(widths) != 1:
            raise ValidationError(f"all classes must share a channel count: {widths}")
        for c in self.classes:
            c.validate()

    @property
    def channels(self):
        return self.classes[0].channels

    def to_dict(self):
        return {
            "version": 1,
            "seed": self.seed,
            "videos_per_class": self.videos_per_class,
            "profile_amplitude": self.profile_amplitude,
            "classes": [
                {
                    "name": c.name,
                    "channels": c.channels,
                    "frames": list(c.frames),
                    "correlation": [
                        {"channels": list(g.channels), "signs": list(g.signs)}
                        for g in c.correlation
                    ],
                    "periodicity": [
                        {
                            "channel": p.channel,
                            "period": p.period,
                            "amplitude": p.amplitude,
                        }
                        for p in c.periodicity
                    ],
                    "noise_sigma": c.noise_sigma,
                }
                for c in self.classes
            ],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            spec = cls(
                classes=[
                    ClassBlueprint(
                        name=c["name"],
                        channels=c["channels"],
                        frames=tuple(c["frames"]),
                        correlation=[
                            LatentGroup(g["channels"], g["signs"])
                            for g in c.get("correlation", [])
                        ],
                        periodicity=[
                            PeriodicComponent(
                                p["channel"], p["period"], p.get("amplitude", 1.0)
                            )
                            for p in c.get("periodicity", [])
                        ],
                        noise_sigma=c.get("noise_sigma", 0.0),
                    )
                    for c in d["classes"]
                ],
                videos_per_class=d["videos_per_class"],
                seed=d.get("seed", 0),
                profile_amplitude=d.get("profile_amplitude", 1.0),
            )
        except (KeyError, TypeError) as e:
            raise FormatError(f"bad synthetic spec: {e}") from e
        spec.validate()
        return spec


def _synth_video(blueprint, rng):
    k_min, k_max = blueprint.frames
    k = int(rng.integers(k_min, k_max + 1))
    n = blueprint.channels
    data = np.zeros((n, k))
    for g in blueprint.correlation:
        z = rng.standard_normal(k)
        for c, s in zip(g.channels, g.signs):
            data[c] += s * z
    t = np.arange(1, k + 1, dtype=np.float64)
    for p in blueprint.periodicity:
        phase = rng.uniform(0.0, 2.0 * math.pi)
        data[p.channel] += p.amplitude * np.cos(2.0 * math.pi * t / p.period + phase)
    if blueprint.noise_sigma > 0:
        data += blueprint.noise_sigma * rng.standard_normal((n, k))
    # exact per-channel centering: mean pooling becomes blind by construction
    data -= data.mean(axis=1, keepdims=True)
    return data


def synth_generate(spec):
    """Materialize the corpus in memory, deterministically under spec.seed.

    Every (class, video) pair gets its own seeded generator, so corpora are
    reproducible item by item. All channels carry the identical shared mean
    profile across classes.
    """
    spec.validate()
    profile_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(spec.seed), 1]))
    )
    profile = spec.profile_amplitude * profile_rng.standard_normal(spec.channels)
    items = []
    for ci, blueprint in enumerate(spec.classes):
        for vi in range(spec.videos_per_class):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([int(spec.seed), ci, vi]))
            )
            data = _synth_video(blueprint, rng) + profile[:, None]
            items.append(
                DatasetItem(
                    video_id=f"{blueprint.name}_{vi:03d}",
                    label=blueprint.name,
                    matrix=TimeSeriesMatrix(data),
                )
            )
    return LabeledDataset(items)


def write_synth_corpus(spec, out_dir):
    """Generate the corpus and write it as .tsf files plus manifest.tsv.

    Returns the manifest path. Byte-identical for identical specs.
    """
    dataset = synth_generate(spec)
    os.makedirs(out_dir, exist_ok=True)
    records = []
    for it in dataset.items:
        rel = f"{it.video_id}.tsf"
        write_tsf(it.matrix, os.path.join(out_dir, rel))
        records.append((it.label, rel))
    manifest = os.path.join(out_dir, "manifest.tsv")
    write_manifest(manifest, records)
    return manifest


def _round_robin_matchings(teams):
    """Edge-disjoint perfect matchings of an even number of teams (the
    classic circle schedule); supports teams-1 rounds."""
    fixed = teams - 1
    rounds = []
    for r in range(teams - 1):
        pairs = [(fixed, r)]
        for i in range(1, teams // 2):
            a = (r + i) % (teams - 1)
            b = (r - i) % (teams - 1)
            pairs.append((a, b))
        rounds.append([tuple(sorted(p)) for p in pairs])
    return rounds


def demo_spec(
    classes=3,
    videos_per_class=20,
    channels=64,
    k_min=40,
    k_max=120,
    noise_sigma=0.5,
    seed=7,
):
    """Blueprint used by the bundled demos and the synthetic acceptance runs.

    Channels are laid out as 8 blocks; within a block, the first positions
    carry shared latents and the last two carry class-periodic cosines. Each
    class correlates a different perfect matching of the blocks, and only
    positionally-aligned channels of matched blocks share a latent. That
    places the class signal in relations spanning the whole channel range:
    grouped series aggregate it, while any small subset of raw series
    (leading, random, or uniformly strided) sees almost none of it.
    """
    blocks = 8
    if channels % blocks != 0 or channels < 2 * blocks:
        raise ValidationError(f"channels must be a multiple of {blocks}, >= {2 * blocks}")
    positions = channels // blocks
    latent_positions = list(range(positions - 2))
    periodic_positions = [positions - 2, positions - 1]
    matchings = _round_robin_matchings(blocks)
    periods = [4.0, 6.0, 8.0, 5.0, 7.0, 9.0, 10.0, 11.0]
    blueprints = []
    for ci in range(classes):
        matching = matchings[ci % len(matchings)]
        correlation = [
            LatentGroup(
                channels=[a * positions + p, b * positions + p],
                signs=[1, 1],
            )
            for a, b in matching
            for p in latent_positions
        ]
        periodicity = [
            PeriodicComponent(channel=b * positions + p, period=periods[ci % len(periods)])
            for b in range(blocks)
            for p in periodic_positions
        ]
        blueprints.append(
            ClassBlueprint(
                name=f"class{ci}",
                channels=channels,
                frames=(k_min, k_max),
                correlation=correlation,
                periodicity=periodicity,
                noise_sigma=noise_sigma,
            )
        )
    return SynthSpec(classes=blueprints, videos_per_class=videos_per_class, seed=seed)
