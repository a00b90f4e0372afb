import numpy as np
import pytest


def write_video(path, pattern, frames=20, size=(64, 48), fps=10.0):
    """Synthesize a small MJPG clip; ``pattern`` shifts per frame so classes
    can differ in motion."""
    import cv2

    w, h = size
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"MJPG"), fps, (w, h)
    )
    assert writer.isOpened()
    xs = np.arange(w)[None, :, None]
    ys = np.arange(h)[:, None, None]
    for t in range(frames):
        img = 127 + 100 * np.sin(
            2 * np.pi * (xs / 16.0 + ys / 24.0 + pattern * t / 10.0)
        )
        frame = np.clip(img, 0, 255).astype(np.uint8).repeat(3, axis=2)
        writer.write(frame)
    writer.release()


@pytest.fixture(scope="session")
def video_corpus(tmp_path_factory):
    """2 classes x 2 clips plus a labels file."""
    base = tmp_path_factory.mktemp("videos")
    records = []
    for ci, (label, pattern) in enumerate([("slow", 1.0), ("fast", 4.0)]):
        for vi in range(2):
            rel = f"{label}_{vi}.avi"
            write_video(base / rel, pattern + 0.1 * vi)
            records.append((label, rel))
    labels = base / "labels.tsv"
    labels.write_text("".join(f"{l}\t{r}\n" for l, r in records))
    return base, labels
