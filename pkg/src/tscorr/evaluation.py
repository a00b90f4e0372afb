"""Evaluation protocol: repeated randomized per-class 50/50 splits.

Each repetition draws, independently per class, floor(count/2) videos for
training (so the train side never exceeds the test side), trains a fresh
one-vs-rest linear SVM on the training descriptors, and scores the rest.
Mean accuracy over all repetitions plus a confusion matrix pooled over the
repetitions' test predictions make up the report.

Descriptors are split-independent, so each video is encoded exactly once and
reused across repetitions. Per-repetition split seeds are derived
deterministically from (master seed, repetition index): the report is a pure
function of its inputs no matter how the work would be scheduled.
"""

import itertools
import logging
import warnings as _warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

log = logging.getLogger("tscorr")

from .encoder import TimeSeriesMatrix, encode_tcf, tcf_length
from .errors import TscorrError, ValidationError
from .svm import TrainConfig, predict_batch, train_ovr


class PoolingMode(Enum):
    MEAN = "mean"
    MAX = "max"


@dataclass
class DatasetItem:
    """One video: a unique id, a class label, and exactly one payload form
    (an in-memory matrix, a lazy loader for one, or an already-encoded
    descriptor)."""

    video_id: str
    label: str
    matrix: TimeSeriesMatrix | None = None
    loader: object = None  # callable () -> TimeSeriesMatrix
    descriptor: np.ndarray | None = None

    def get_matrix(self):
        if self.matrix is not None:
            return self.matrix
        if self.loader is not None:
            return self.loader()
        raise ValidationError(f"item {self.video_id!r} carries no matrix")


class LabeledDataset:
    def __init__(self, items):
        items = list(items)
        if not items:
            raise ValidationError("dataset is empty")
        ids = [it.video_id for it in items]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate video ids: {dupes}")
        self.items = items

    @property
    def class_set(self):
        return sorted({it.label for it in self.items})

    def by_class(self):
        """label -> items, labels sorted, items in dataset order."""
        out = {c: [] for c in self.class_set}
        for it in self.items:
            out[it.label].append(it)
        return out

    def __len__(self):
        return len(self.items)


@dataclass
class SplitSpec:
    train_ids: set
    test_ids: set
    seed: int


def make_split(dataset, seed):
    """Per class: floor(count/2) uniformly random items to train, rest to
    test. Single-item classes contribute their item to test only. Fully
    determined by ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    train, test = set(), set()
    for label, items in dataset.by_class().items():
        m = len(items)
        picked = set(rng.choice(m, size=m // 2, replace=False).tolist())
        for pos, it in enumerate(items):
            (train if pos in picked else test).add(it.video_id)
    return SplitSpec(train_ids=train, test_ids=test, seed=seed)


def derive_seed(master_seed, index):
    """Deterministic per-repetition seed; stable across platforms."""
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1)[0])


def confusion_matrix(truth, predicted, class_set):
    """Row-normalized percentage matrix: entry (i, j) is the share of
    class-i items predicted as class j. Rows of absent classes stay zero."""
    counts = confusion_counts(truth, predicted, class_set)
    return _normalize_confusion(counts)


def confusion_counts(truth, predicted, class_set):
    if len(truth) != len(predicted):
        raise ValidationError("truth and prediction lists differ in length")
    index = {c: i for i, c in enumerate(class_set)}
    counts = np.zeros((len(class_set), len(class_set)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        if t not in index:
            raise ValidationError(f"unknown true label {t!r}")
        if p not in index:
            raise ValidationError(f"unknown predicted label {p!r}")
        counts[index[t], index[p]] += 1
    return counts


def _normalize_confusion(counts):
    counts = np.asarray(counts, dtype=np.float64)
    sums = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        percent = np.where(sums > 0, 100.0 * counts / sums, 0.0)
    return percent


def baseline_pool(ts, mode=PoolingMode.MEAN):
    """Order-invariant per-series pooling over frames; the control that
    cannot see temporal structure."""
    if isinstance(mode, str):
        mode = PoolingMode(mode.lower())
    if mode is PoolingMode.MEAN:
        return ts.data.mean(axis=1)
    return ts.data.max(axis=1)


@dataclass
class EvalReport:
    per_rep_accuracy: list
    mean_accuracy: float
    confusion_percent: np.ndarray
    confusion_counts: np.ndarray
    classes: list
    repetitions: int
    master_seed: int
    encoder_config: dict
    train_config: dict
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "format": "tscorr-eval-report",
            "version": 1,
            "mean_accuracy": self.mean_accuracy,
            "per_rep_accuracy": list(self.per_rep_accuracy),
            "classes": list(self.classes),
            "confusion_percent": self.confusion_percent.tolist(),
            "confusion_counts": self.confusion_counts.tolist(),
            "repetitions": self.repetitions,
            "master_seed": self.master_seed,
            "encoder_config": self.encoder_config,
            "train_config": self.train_config,
            "warnings": list(self.warnings),
        }

    def render_text(self):
        lines = [
            f"repetitions:    {self.repetitions}",
            f"mean accuracy:  {self.mean_accuracy:.4f}",
            f"min/max:        {min(self.per_rep_accuracy):.4f} / "
            f"{max(self.per_rep_accuracy):.4f}",
            "",
            "confusion matrix (rows = true class, pooled %, row sums 100):",
        ]
        width = max(6, max(len(str(c)) for c in self.classes) + 1)
        header = " " * width + "".join(f"{str(c):>{width}}" for c in self.classes)
        lines.append(header)
        for i, c in enumerate(self.classes):
            row = "".join(f"{v:>{width}.1f}" for v in self.confusion_percent[i])
            lines.append(f"{str(c):<{width}}" + row)
        if self.warnings:
            lines.append("")
            lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def collect_descriptors(dataset, enc_cfg):
    """Encode every item once (or take its cached descriptor).

    Returns (n_items x dim matrix, warning strings, layout of the last
    encoded descriptor or None if everything was cached).
    """
    vectors = []
    warnings_out = []
    overflow_ids = []
    layout = None
    for it in dataset.items:
        if it.descriptor is not None:
            vectors.append(np.asarray(it.descriptor, dtype=np.float64))
            continue
        try:
            # short-sequence lag warnings are aggregated into the report
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore")
                tcf = encode_tcf(it.get_matrix(), enc_cfg)
        except TscorrError as e:
            raise type(e)(f"video {it.video_id!r}: {e}") from e
        if tcf.layout.lag_overflow:
            overflow_ids.append(it.video_id)
        layout = tcf.layout
        vectors.append(tcf.combined)
    dims = {v.shape[0] for v in vectors}
    if len(dims) != 1:
        raise ValidationError(f"descriptor dimensions disagree: {sorted(dims)}")
    if overflow_ids:
        warnings_out.append(
            f"{len(overflow_ids)} video(s) shorter than the lag schedule; "
            f"autocorrelation zero-filled: {overflow_ids[:5]}"
        )
    return np.stack(vectors), warnings_out, layout


def run_protocol(dataset, enc_cfg, train_cfg=None, repetitions=100, master_seed=0):
    """The full randomized-split evaluation. Returns an EvalReport that is a
    pure function of (dataset, configs, repetitions, master_seed)."""
    train_cfg = train_cfg or TrainConfig()
    if repetitions < 1:
        raise ValidationError("repetitions must be positive")
    by_class = dataset.by_class()
    classes = dataset.class_set
    usable = [c for c, its in by_class.items() if len(its) >= 2]
    if len(usable) < 2:
        raise ValidationError(
            "protocol needs at least 2 classes with at least 2 videos each"
        )
    warnings_out = []
    singles = [c for c, its in by_class.items() if len(its) == 1]
    if singles:
        warnings_out.append(
            f"classes with a single clip always land in the test split: {singles}"
        )

    X, enc_warnings, _ = collect_descriptors(dataset, enc_cfg)
    warnings_out.extend(enc_warnings)
    ids = [it.video_id for it in dataset.items]
    labels = [it.label for it in dataset.items]
    id_pos = {vid: i for i, vid in enumerate(ids)}

    per_rep = []
    pooled = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for rep in range(repetitions):
        split = make_split(dataset, derive_seed(master_seed, rep))
        train_idx = sorted(id_pos[v] for v in split.train_ids)
        test_idx = sorted(id_pos[v] for v in split.test_ids)
        try:
            model = train_ovr(
                X[train_idx], [labels[i] for i in train_idx], train_cfg
            )
            predicted = predict_batch(model, X[test_idx])
        except TscorrError as e:
            raise type(e)(f"repetition {rep}: {e}") from e
        truth = [labels[i] for i in test_idx]
        correct = sum(1 for t, p in zip(truth, predicted) if t == p)
        per_rep.append(correct / len(truth))
        pooled += confusion_counts(truth, predicted, classes)
        log.debug("repetition %d/%d: accuracy %.4f", rep + 1, repetitions, per_rep[-1])

    return EvalReport(
        per_rep_accuracy=per_rep,
        mean_accuracy=float(np.mean(per_rep)),
        confusion_percent=_normalize_confusion(pooled),
        confusion_counts=pooled,
        classes=classes,
        repetitions=repetitions,
        master_seed=master_seed,
        encoder_config=enc_cfg.to_dict() if enc_cfg is not None else None,
        train_config=train_cfg.to_dict(),
        warnings=warnings_out,
    )


@dataclass
class SweepRow:
    scheme: str
    count: int
    windows: int
    lags: int
    dim: int | None
    mean_accuracy: float | None
    status: str
    note: str = ""


def sweep(
    dataset,
    *,
    counts,
    windows_list,
    lags_list,
    schemes=("group",),
    stride=1,
    train_cfg=None,
    repetitions=20,
    master_seed=0,
):
    """Exhaustive Cartesian evaluation over (scheme, count, windows, lags).

    ``count`` is the group count for the grouping scheme and the number of
    kept series otherwise. Every cell runs the full protocol with the same
    master seed, so all cells see identical split sequences and any cell can
    be reproduced in isolation. Invalid cells are reported as failed rows
    and do not stop the sweep.
    """
    from .encoder import EncoderConfig, SelectionScheme

    rows = []
    for it in dataset.items:
        if it.descriptor is not None:
            raise ValidationError("sweep needs raw matrices, not cached descriptors")
    n = dataset.items[0].get_matrix().n
    for scheme, count, windows, lags in itertools.product(
        schemes, counts, windows_list, lags_list
    ):
        scheme_e = SelectionScheme(scheme) if isinstance(scheme, str) else scheme
        try:
            if scheme_e is SelectionScheme.GROUP:
                cfg = EncoderConfig(
                    groups=count, windows=windows, lags=lags, stride=stride,
                    scheme=scheme_e, seed=master_seed,
                )
            else:
                cfg = EncoderConfig(
                    groups=1, windows=windows, lags=lags, stride=stride,
                    scheme=scheme_e, subset_size=count, seed=master_seed,
                )
            report = run_protocol(
                dataset, cfg, train_cfg, repetitions=repetitions,
                master_seed=master_seed,
            )
            rows.append(
                SweepRow(
                    scheme=scheme_e.value, count=count, windows=windows,
                    lags=lags, dim=tcf_length(n, count, windows, lags),
                    mean_accuracy=report.mean_accuracy, status="ok",
                )
            )
        except TscorrError as e:
            rows.append(
                SweepRow(
                    scheme=scheme_e.value if isinstance(scheme_e, SelectionScheme)
                    else str(scheme), count=count, windows=windows, lags=lags,
                    dim=None, mean_accuracy=None, status="failed", note=str(e),
                )
            )
    return rows


def sweep_table(rows, delimiter="\t"):
    """Delimiter-separated rendering of sweep rows, ready for plotting."""
    header = delimiter.join(
        ["scheme", "count", "windows", "lags", "dim", "mean_accuracy", "status", "note"]
    )
    lines = [header]
    for r in rows:
        lines.append(
            delimiter.join(
                [
                    r.scheme,
                    str(r.count),
                    str(r.windows),
                    str(r.lags),
                    "" if r.dim is None else str(r.dim),
                    "" if r.mean_accuracy is None else f"{r.mean_accuracy:.6f}",
                    r.status,
                    r.note,
                ]
            )
        )
    return "\n".join(lines) + "\n"
