"""L2-regularized linear SVM with hinge loss, one-vs-rest.

Each binary problem minimizes

    0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i (w . x_i + b))

via coordinate ascent on the dual (maximal-violating-pair working sets, the
classic two-variable update). The stopping rule is the actual duality gap:
iteration ends once primal(w, b) - dual(alpha) <= tolerance * (1 + |primal|),
which certifies the returned primal objective is within that bound of the
optimum. The solver is deterministic; ``TrainConfig.seed`` exists for
solvers that permute coordinates and is unused here.

Trained models are immutable value objects and can be shared across threads;
persistence is a versioned JSON document with base64 raw little-endian
float64 payloads so weights round-trip bit-exactly.
"""

import base64
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .encoder import TcfLayout
from .errors import ConvergenceError, ValidationError

MODEL_FORMAT = "tscorr-linear-ovr"
MODEL_VERSION = 1


class Normalization(Enum):
    NONE = "none"
    L2 = "l2"
    ZSCORE = "zscore"


@dataclass
class TrainConfig:
    c_reg: float = 1000.0
    tolerance: float = 1e-4
    max_iterations: int = 1_000_000
    normalize: Normalization = Normalization.NONE
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.normalize, str):
            self.normalize = Normalization(self.normalize.lower())
        if self.c_reg <= 0:
            raise ValidationError("c_reg must be positive")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")

    def to_dict(self):
        return {
            "c_reg": self.c_reg,
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "normalize": self.normalize.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["normalize"] = Normalization(d.get("normalize", "none"))
        return cls(**d)


@dataclass
class LinearOvrModel:
    classes: list
    weights: np.ndarray  # (n_classes, dim)
    biases: np.ndarray  # (n_classes,)
    normalize: Normalization = Normalization.NONE
    norm_mean: np.ndarray | None = None
    norm_scale: np.ndarray | None = None
    layout: TcfLayout | None = None

    @property
    def dim(self):
        return self.weights.shape[1]


def hinge_objective(w, b, X, y, c_reg):
    """Primal objective 0.5*||w||^2 + C * sum hinge; the solver's contract."""
    margins = 1.0 - y * (X @ w + b)
    return 0.5 * float(w @ w) + c_reg * float(np.maximum(margins, 0.0).sum())


def _solve_binary(X, y, c_reg, tol, max_iter):
    """Two-variable dual ascent for one binary problem.

    Returns (w, b, primal_objective, iterations). Raises ConvergenceError
    with the final gap when the iteration budget runs out.
    """
    n = X.shape[0]
    C = float(c_reg)
    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    diag = np.einsum("ij,ij->i", X, X)
    tau = 1e-12

    pos = y > 0
    neg = ~pos

    it = 0
    while True:
        scores = X @ w
        grad = y * scores - 1.0  # dual gradient (Q alpha - e)_t
        cand = -y * grad  # per-point bias candidate y_t - scores_t

        up = (pos & (alpha < C)) | (neg & (alpha > 0.0))
        low = (neg & (alpha < C)) | (pos & (alpha > 0.0))
        i = np.flatnonzero(up)[np.argmax(cand[up])]
        j = np.flatnonzero(low)[np.argmin(cand[low])]
        m_up = cand[i]
        m_low = cand[j]

        free = (alpha > 0.0) & (alpha < C)
        if free.any():
            b = float(np.mean(cand[free]))
        else:
            b = 0.5 * (m_up + m_low)

        primal = 0.5 * float(w @ w) + C * float(
            np.maximum(1.0 - y * (scores + b), 0.0).sum()
        )
        dual = float(alpha.sum()) - 0.5 * float(w @ w)
        gap = primal - dual
        if gap <= tol * (1.0 + abs(primal)):
            return w, b, primal, it
        if it >= max_iter:
            raise ConvergenceError(
                f"binary SVM did not converge in {max_iter} iterations "
                f"(duality gap {gap:.3e}, KKT violation {m_up - m_low:.3e})",
                violation=gap,
            )
        it += 1

        # analytic two-variable step keeping sum(alpha * y) = 0; the
        # curvature along the step direction is ||x_i - x_j||^2 either way
        qij = float(X[i] @ X[j])
        ai_old, aj_old = alpha[i], alpha[j]
        quad = max(diag[i] + diag[j] - 2.0 * qij, tau)
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0 and aj < 0:
                ai, aj = diff, 0.0
            elif diff <= 0 and ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0 and ai > C:
                ai, aj = C, C - diff
            elif diff <= 0 and aj > C:
                ai, aj = C + diff, C
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
                elif aj > C:
                    ai, aj = total - C, C
            else:
                if aj < 0:
                    ai, aj = total, 0.0
                elif ai < 0:
                    ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        w += (ai - ai_old) * y[i] * X[i] + (aj - aj_old) * y[j] * X[j]


def _fit_normalization(X, mode):
    if mode is Normalization.ZSCORE:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        return mean, scale
    return None, None


def _apply_normalization(X, mode, mean, scale):
    if mode is Normalization.ZSCORE:
        return (X - mean) / scale
    if mode is Normalization.L2:
        norms = np.linalg.norm(X, axis=-1, keepdims=True)
        return np.divide(X, norms, out=X.astype(np.float64, copy=True), where=norms > 0)
    return X


def train_ovr(descriptors, labels, cfg=None, layout=None):
    """Train one binary hinge-loss SVM per class (that class vs the rest).

    Classes are taken in sorted order; all randomized-free, so identical
    inputs give an identical model.
    """
    cfg = cfg or TrainConfig()
    X = np.asarray(descriptors, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"descriptors must form a 2-D array, got {X.shape}")
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise ValidationError(
            f"{len(labels)} labels for {X.shape[0]} descriptors"
        )
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValidationError(f"need at least 2 classes, got {classes!r}")

    mean, scale = _fit_normalization(X, cfg.normalize)
    Xn = _apply_normalization(X, cfg.normalize, mean, scale)
    Xn = np.ascontiguousarray(Xn)

    weights = np.zeros((len(classes), X.shape[1]))
    biases = np.zeros(len(classes))
    for ci, c in enumerate(classes):
        y = np.where(np.asarray([l == c for l in labels]), 1.0, -1.0)
        w, b, _, _ = _solve_binary(Xn, y, cfg.c_reg, cfg.tolerance, cfg.max_iterations)
        weights[ci] = w
        biases[ci] = b
    return LinearOvrModel(
        classes=classes,
        weights=weights,
        biases=biases,
        normalize=cfg.normalize,
        norm_mean=mean,
        norm_scale=scale,
        layout=layout,
    )


def decision_scores(model, x):
    """One score per class, in model.classes order."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.dim:
        raise ValidationError(
            f"descriptor has {x.shape[-1]} dims, model expects {model.dim}"
        )
    xn = _apply_normalization(x, model.normalize, model.norm_mean, model.norm_scale)
    return xn @ model.weights.T + model.biases


def predict(model, x):
    """Class with the maximal score; exact ties go to the lowest class index."""
    scores = decision_scores(model, x)
    return model.classes[int(np.argmax(scores))]


def predict_batch(model, X):
    scores = decision_scores(model, np.atleast_2d(np.asarray(X, dtype=np.float64)))
    return [model.classes[int(i)] for i in np.argmax(scores, axis=1)]


def _b64(arr):
    return base64.b64encode(
        np.ascontiguousarray(arr, dtype="<f8").tobytes()
    ).decode("ascii")


def _unb64(s):
    return np.frombuffer(base64.b64decode(s), dtype="<f8").copy()


def save_model(model, path):
    """Write the versioned JSON model file (see README for the field order).

    Weight and bias payloads are raw little-endian float64 bytes in base64,
    so a load returns them bit-identically.
    """
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "classes": list(model.classes),
        "dim": int(model.dim),
        "normalize": model.normalize.value,
        "norm_mean": None if model.norm_mean is None else _b64(model.norm_mean),
        "norm_scale": None if model.norm_scale is None else _b64(model.norm_scale),
        "biases": _b64(model.biases),
        "weights": [_b64(w) for w in model.weights],
        "layout": None if model.layout is None else model.layout.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ValidationError(f"not a {MODEL_FORMAT} file: {path}")
    if doc.get("version") != MODEL_VERSION:
        raise ValidationError(f"unsupported model version {doc.get('version')}")
    weights = np.stack([_unb64(w) for w in doc["weights"]])
    if weights.shape != (len(doc["classes"]), doc["dim"]):
        raise ValidationError("model weight payload does not match header")
    return LinearOvrModel(
        classes=doc["classes"],
        weights=weights,
        biases=_unb64(doc["biases"]),
        normalize=Normalization(doc["normalize"]),
        norm_mean=None if doc["norm_mean"] is None else _unb64(doc["norm_mean"]),
        norm_scale=None if doc["norm_scale"] is None else _unb64(doc["norm_scale"]),
        layout=None if doc["layout"] is None else TcfLayout.from_dict(doc["layout"]),
    )
