"""Video -> per-frame features -> .tsf corpus.

Frames are decoded with OpenCV, sampled every ``frame_step`` frames,
resized to the backbone's input size, and pushed through the truncated
network in small batches while streaming into a .tsf writer. Videos that
cannot be decoded (or yield fewer than 2 sampled frames, the minimum the
consumer accepts) are skipped with a logged warning and excluded from the
manifest. The manifest is written last, in input order.
"""

import logging
import os
from dataclasses import dataclass, field

import cv2
import numpy as np

from .models import build_extractor
from .tsf import TsfWriter, write_manifest

log = logging.getLogger("tsfextract")

MIN_FRAMES = 2


@dataclass
class ExtractSpec:
    videos: list  # (label, video path) in manifest order
    out_dir: str
    model: str = "alexnet"
    layer: str = "first_fc"
    weights_path: str | None = None
    frame_step: int = 1
    batch_size: int = 8
    seed: int = 0


@dataclass
class ExtractResult:
    manifest: str
    written: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    width: int = 0


def iter_frames(path, frame_step, size):
    """Yield RGB uint8 frames resized to (size, size), every frame_step-th
    frame, preserving order."""
    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        return
    index = 0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        if index % frame_step == 0:
            frame = cv2.resize(frame, (size, size), interpolation=cv2.INTER_AREA)
            yield cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
        index += 1
    cap.release()


def _tsf_name(label, video_path, taken):
    stem = os.path.splitext(os.path.basename(video_path))[0]
    rel = f"{label}_{stem}.tsf"
    suffix = 1
    while rel in taken:
        rel = f"{label}_{stem}_{suffix}.tsf"
        suffix += 1
    taken.add(rel)
    return rel


def extract(spec):
    """Run the whole extraction; returns an ExtractResult."""
    if spec.frame_step < 1:
        raise ValueError("frame_step must be positive")
    extractor = build_extractor(
        spec.model, spec.layer, spec.weights_path, seed=spec.seed
    )
    os.makedirs(spec.out_dir, exist_ok=True)
    records = []
    result = ExtractResult(manifest=os.path.join(spec.out_dir, "manifest.tsv"),
                           width=extractor.width)
    taken = set()
    for label, video in spec.videos:
        rel = _tsf_name(label, video, taken)
        out_path = os.path.join(spec.out_dir, rel)
        frames = 0
        writer = TsfWriter(out_path, extractor.width)
        batch = []
        try:
            for frame in iter_frames(video, spec.frame_step, extractor.input_size):
                batch.append(frame)
                if len(batch) == spec.batch_size:
                    for vec in extractor.features(np.stack(batch)):
                        writer.append_frame(vec)
                    frames += len(batch)
                    batch = []
            if batch:
                for vec in extractor.features(np.stack(batch)):
                    writer.append_frame(vec)
                frames += len(batch)
        finally:
            writer.close()
        if frames < MIN_FRAMES:
            os.remove(out_path)
            taken.discard(rel)
            log.warning(
                "skipping %s: %s", video,
                "not decodable" if frames == 0 else "fewer than 2 sampled frames",
            )
            result.skipped.append(video)
            continue
        records.append((label, rel))
        result.written.append(rel)
    write_manifest(result.manifest, records)
    return result
