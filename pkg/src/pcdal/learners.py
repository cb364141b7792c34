"""Small deterministic learners that stand in for full networks so complete
acquisition loops run in seconds.

Two flavors share one multinomial logistic core: a flat-feature classifier and
a per-pixel segmenter over a fixed 4-feature stack (intensity, 3x3 local mean,
gradient magnitude, constant 1). Everything is f64 and bit-reproducible for a
fixed (data, config, seed) triple.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tensor import read_tensor, write_tensor


@dataclass(frozen=True)
class LearnerConfig:
    learning_rate: float = 0.1
    epochs: int = 50
    batch_size: int = 32
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


@dataclass
class LogisticModel:
    weights: np.ndarray  # (n_classes, n_features) f64
    bias: np.ndarray  # (n_classes,) f64
    history: tuple = ()  # mean training loss per epoch, recorded pre-step

    @property
    def n_classes(self):
        return self.weights.shape[0]

    @property
    def n_features(self):
        return self.weights.shape[1]


def _check_features(X, name="features"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-D (rows x features), got rank {X.ndim}")
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contain non-finite values")
    return X


def _check_labels(y, n, n_classes=None):
    y = np.asarray(y)
    if y.shape != (n,):
        raise ShapeError(f"labels shape {y.shape} does not match {n} rows")
    y = y.astype(np.int64)
    if y.min() < 0:
        raise ValueError("negative label")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    elif y.max() >= n_classes:
        raise ValueError(f"label {int(y.max())} outside [0, {n_classes})")
    return y, int(n_classes)


def _forward(X, y, W, b, l2):
    """Cross-entropy + 0.5*l2*||W||^2 loss and its analytic gradient."""
    m = X.shape[0]
    logits = X @ W.T + b
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    sez = ez.sum(axis=1, keepdims=True)
    rows = np.arange(m)
    loss = float((np.log(sez[:, 0]) - z[rows, y]).mean())
    loss += 0.5 * l2 * float((W * W).sum())
    G = ez / sez
    G[rows, y] -= 1.0
    grad_w = G.T @ X / m + l2 * W
    grad_b = G.mean(axis=0)
    return loss, grad_w, grad_b


def logistic_fit(features, labels, cfg: LearnerConfig, n_classes=None) -> LogisticModel:
    """Mini-batch gradient descent on multinomial cross-entropy with L2.

    Zero epochs returns the zero model (uniform predictions). The bias is not
    regularized. history holds the batch-size-weighted mean pre-step loss of
    each epoch.
    """
    X = _check_features(features)
    y, n_classes = _check_labels(labels, X.shape[0], n_classes)
    n, n_features = X.shape
    W = np.zeros((n_classes, n_features))
    b = np.zeros(n_classes)
    if cfg.epochs == 0:
        return LogisticModel(W, b, ())
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    history = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            take = perm[start:start + cfg.batch_size]
            loss, grad_w, grad_b = _forward(X[take], y[take], W, b, cfg.l2)
            total += loss * len(take)
            W = W - cfg.learning_rate * grad_w
            b = b - cfg.learning_rate * grad_b
        history.append(total / n)
    return LogisticModel(W, b, tuple(history))


def logistic_predict_proba(model: LogisticModel, features) -> np.ndarray:
    """Row-wise softmax(W x + b); rows sum to 1 within 1e-12."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"features must be 2-D, got rank {X.ndim}")
    if X.shape[1] != model.n_features:
        raise ShapeError(
            f"feature dimension {X.shape[1]} != model dimension {model.n_features}"
        )
    logits = X @ model.weights.T + model.bias
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=1, keepdims=True)


N_PIXEL_FEATURES = 4


def _local_mean(img):
    """3x3 (3x3x3) box mean, edge-replicated, summed in symmetric pair order
    so spatial flips permute the result bit-exactly."""
    p = np.pad(img, 1, mode="edge")
    if img.ndim == 2:
        c = p[1:-1, 1:-1]
        l, r = p[1:-1, :-2], p[1:-1, 2:]
        u, d = p[:-2, 1:-1], p[2:, 1:-1]
        ul, dr = p[:-2, :-2], p[2:, 2:]
        ur, dl = p[:-2, 2:], p[2:, :-2]
        total = c + ((l + r) + (u + d)) + ((ul + dr) + (ur + dl))
        return total / 9.0
    # 3-D: symmetric 2-D slice sums combined symmetrically along depth
    def slice_sum(q):
        c = q[:, 1:-1, 1:-1]
        l, r = q[:, 1:-1, :-2], q[:, 1:-1, 2:]
        u, d = q[:, :-2, 1:-1], q[:, 2:, 1:-1]
        ul, dr = q[:, :-2, :-2], q[:, 2:, 2:]
        ur, dl = q[:, :-2, 2:], q[:, 2:, :-2]
        return c + ((l + r) + (u + d)) + ((ul + dr) + (ur + dl))

    mid = slice_sum(p[1:-1])
    near, far = slice_sum(p[:-2]), slice_sum(p[2:])
    return (mid + (near + far)) / 27.0


def _gradients(img, symmetric):
    grads = []
    for ax in range(img.ndim):
        if symmetric:
            p = np.pad(img, [(1, 1) if a == ax else (0, 0) for a in range(img.ndim)],
                       mode="edge")
            nxt = [slice(None)] * img.ndim
            prv = [slice(None)] * img.ndim
            nxt[ax] = slice(2, None)
            prv[ax] = slice(None, -2)
            g = (p[tuple(nxt)] - p[tuple(prv)]) / 2.0
        else:
            # forward difference, backward at the trailing edge: deliberately
            # not flip-symmetric so perturbed linear predictions can disagree
            g = np.empty_like(img)
            lead = [slice(None)] * img.ndim
            lag = [slice(None)] * img.ndim
            lead[ax] = slice(1, None)
            lag[ax] = slice(None, -1)
            diff = img[tuple(lead)] - img[tuple(lag)]
            head = [slice(None)] * img.ndim
            head[ax] = slice(None, -1)
            tail = [slice(None)] * img.ndim
            tail[ax] = slice(-1, None)
            last = [slice(None)] * img.ndim
            last[ax] = slice(-1, None)
            g[tuple(head)] = diff
            g[tuple(last)] = diff[tuple(tail)]
        grads.append(g)
    return grads


def pixel_feature_stack(image, symmetric=False) -> np.ndarray:
    """Per-pixel features (..., 4): intensity, local mean, gradient magnitude,
    constant 1.

    symmetric=True computes the gradient with central differences so the whole
    stack commutes bit-exactly with spatial flips; the default forward-
    difference stencil is intentionally asymmetric.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim not in (2, 3):
        raise ShapeError(f"expected a 2-D or 3-D image, got rank {img.ndim}")
    grads = _gradients(img, symmetric)
    sq = grads[0] * grads[0]
    for g in grads[1:]:
        sq = sq + g * g
    mag = np.sqrt(sq)
    feats = np.stack([img, _local_mean(img), mag, np.ones_like(img)], axis=-1)
    return feats


def segmenter_fit(images, masks, cfg: LearnerConfig, n_classes=None,
                  symmetric=False) -> LogisticModel:
    """Fit the logistic core on the pixel feature stack of every image."""
    imgs = np.asarray(images, dtype=np.float64)
    msks = np.asarray(masks)
    if imgs.shape != msks.shape:
        raise ShapeError(f"images {imgs.shape} vs masks {msks.shape}")
    if imgs.ndim not in (3, 4):
        raise ShapeError("expected a batch of 2-D or 3-D images")
    feats = np.concatenate(
        [pixel_feature_stack(im, symmetric).reshape(-1, N_PIXEL_FEATURES) for im in imgs]
    )
    return logistic_fit(feats, msks.ravel(), cfg, n_classes)


def segmenter_predict_proba(model: LogisticModel, image, symmetric=False) -> np.ndarray:
    """Per-pixel class probabilities with the class axis first."""
    img = np.asarray(image, dtype=np.float64)
    feats = pixel_feature_stack(img, symmetric).reshape(-1, N_PIXEL_FEATURES)
    probs = logistic_predict_proba(model, feats)
    out = probs.T.reshape((model.n_classes,) + img.shape)
    return np.ascontiguousarray(out)


def gradient_check(cfg: LearnerConfig | None = None, n_classes=3, n_features=5,
                   n_samples=12, h=1e-5) -> float:
    """Analytic vs central finite-difference gradients; returns max rel error.

    Checks a random point and the zero point. Relative error per coordinate is
    |a - n| / max(|a| + |n|, 1e-6).
    """
    cfg = cfg or LearnerConfig()
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    X = rng.normal(size=(n_samples, n_features))
    y = rng.integers(0, n_classes, size=n_samples)
    points = [
        (np.zeros((n_classes, n_features)), np.zeros(n_classes)),
        (rng.normal(scale=0.5, size=(n_classes, n_features)),
         rng.normal(scale=0.5, size=n_classes)),
    ]
    worst = 0.0
    for W, b in points:
        _, grad_w, grad_b = _forward(X, y, W, b, cfg.l2)
        for grad, theta in ((grad_w, W), (grad_b, b)):
            for ix in np.ndindex(*theta.shape):
                orig = theta[ix]
                theta[ix] = orig + h
                hi, _, _ = _forward(X, y, W, b, cfg.l2)
                theta[ix] = orig - h
                lo, _, _ = _forward(X, y, W, b, cfg.l2)
                theta[ix] = orig
                numeric = (hi - lo) / (2 * h)
                a = float(grad[ix])
                rel = abs(a - numeric) / max(abs(a) + abs(numeric), 1e-6)
                worst = max(worst, rel)
    return worst


def save_model(model: LogisticModel, prefix, features=None):
    """Checkpoint: weights + bias tensors plus a JSON descriptor sidecar."""
    write_tensor(np.ascontiguousarray(model.weights), f"{prefix}.weights.ptns")
    write_tensor(np.ascontiguousarray(model.bias), f"{prefix}.bias.ptns")
    meta = {
        "kind": "logistic-checkpoint",
        "n_classes": model.n_classes,
        "n_features": model.n_features,
        "features": features or {"kind": "flat"},
    }
    with open(f"{prefix}.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(prefix):
    """Inverse of save_model; returns (model, descriptor)."""
    weights = read_tensor(f"{prefix}.weights.ptns")
    bias = read_tensor(f"{prefix}.bias.ptns")
    with open(f"{prefix}.json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if weights.ndim != 2 or bias.ndim != 1 or weights.shape[0] != bias.shape[0]:
        raise ShapeError("checkpoint weight/bias shapes are inconsistent")
    model = LogisticModel(weights.astype(np.float64), bias.astype(np.float64))
    return model, meta
