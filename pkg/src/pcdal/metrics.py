"""Evaluation metrics: precision, accuracy, Dice, pixel accuracy, and the
percentile Hausdorff surface distance.

Conventions fixed here: accuracy is micro (fraction of correctly labeled
elements); precision is macro-averaged over classes that were predicted at
least once; Dice of two empty masks is 1.0; surfaces are mask elements with a
face-adjacent background neighbor, where out-of-bounds counts as background;
hd95 takes the given percentile (linear interpolation between order
statistics, position h = (n-1)*(q/100)) of the pooled directed surface
distances, so percentile 100 is the classical Hausdorff distance.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UndefinedMetricError


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-class one-vs-rest counts; arrays indexed by class."""

    tp: np.ndarray
    tn: np.ndarray
    fp: np.ndarray
    fn: np.ndarray

    @property
    def n_classes(self):
        return len(self.tp)

    @property
    def total(self):
        return int(self.tp[0] + self.tn[0] + self.fp[0] + self.fn[0])


@dataclass(frozen=True)
class SurfaceSet:
    """Boundary-element coordinates of a binary mask plus voxel spacing."""

    coords: np.ndarray  # (k, rank) int64, lexicographic order
    spacing: tuple

    def __len__(self):
        return len(self.coords)


def _as_labels(arr, name):
    a = np.asarray(arr)
    if a.size == 0:
        raise ShapeError(f"{name} is empty")
    if not np.issubdtype(a.dtype, np.integer):
        if np.issubdtype(a.dtype, np.bool_):
            return a.astype(np.int64)
        f = np.asarray(a, dtype=np.float64)
        r = np.rint(f)
        if not np.array_equal(r, f):
            raise ValueError(f"{name} holds non-integer labels")
        return r.astype(np.int64)
    return a.astype(np.int64)


def confusion(pred, truth, n_classes) -> ConfusionCounts:
    """Exhaustive per-class TP/TN/FP/FN over two label tensors."""
    p = _as_labels(pred, "pred")
    t = _as_labels(truth, "truth")
    if p.shape != t.shape:
        raise ShapeError(f"shape mismatch {p.shape} vs {t.shape}")
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    for name, a in (("pred", p), ("truth", t)):
        if a.min() < 0 or a.max() >= n_classes:
            raise ValueError(f"{name} labels outside [0, {n_classes})")
    joint = np.bincount(
        t.ravel() * n_classes + p.ravel(), minlength=n_classes * n_classes
    ).reshape(n_classes, n_classes)
    tp = np.diag(joint).astype(np.int64)
    fp = joint.sum(axis=0) - tp  # predicted c but truth differs
    fn = joint.sum(axis=1) - tp  # truth c but predicted something else
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def accuracy(c: ConfusionCounts) -> float:
    """Fraction of correctly labeled elements (micro)."""
    return float(c.tp.sum() / c.total)


def precision_macro(c: ConfusionCounts) -> float:
    """Mean of per-class TP/(TP+FP); classes never predicted are excluded."""
    denom = c.tp + c.fp
    defined = denom > 0
    if not defined.any():
        raise UndefinedMetricError("precision undefined: no class was ever predicted")
    per_class = c.tp[defined] / denom[defined]
    return float(per_class.mean())


def _as_mask(arr, name):
    a = np.asarray(arr)
    if a.size == 0:
        raise ShapeError(f"{name} is empty")
    if np.issubdtype(a.dtype, np.bool_):
        return a
    vals = np.unique(a)
    if not np.isin(vals, (0, 1)).all():
        raise ValueError(f"{name} is not a binary mask")
    return a != 0


def dice(pred, truth) -> float:
    """Overlap 2TP/(2TP+FP+FN); two empty masks count as perfect overlap."""
    p = _as_mask(pred, "pred")
    t = _as_mask(truth, "truth")
    if p.shape != t.shape:
        raise ShapeError(f"shape mismatch {p.shape} vs {t.shape}")
    tp = int(np.logical_and(p, t).sum())
    fp = int(np.logical_and(p, ~t).sum())
    fn = int(np.logical_and(~p, t).sum())
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 1.0
    return 2.0 * tp / denom


def pixel_accuracy(pred, truth) -> float:
    p = _as_mask(pred, "pred")
    t = _as_mask(truth, "truth")
    if p.shape != t.shape:
        raise ShapeError(f"shape mismatch {p.shape} vs {t.shape}")
    return float((p == t).mean())


def _check_spacing(spacing, rank):
    if spacing is None:
        return (1.0,) * rank
    spacing = tuple(float(s) for s in spacing)
    if len(spacing) != rank:
        raise ShapeError(f"spacing length {len(spacing)} != rank {rank}")
    if any(s <= 0 for s in spacing):
        raise ValueError("spacing entries must be positive")
    return spacing


def extract_surface(mask, spacing=None) -> SurfaceSet:
    """Mask elements with at least one face-adjacent background neighbor.

    The array border counts as background, so edge elements of the mask are
    always boundary elements.
    """
    m = _as_mask(mask, "mask")
    spacing = _check_spacing(spacing, m.ndim)
    padded = np.pad(m, 1, mode="constant", constant_values=False)
    interior = np.ones_like(m, dtype=bool)
    core = tuple(slice(1, -1) for _ in range(m.ndim))
    for ax in range(m.ndim):
        for off in (-1, 1):
            idx = list(core)
            idx[ax] = slice(1 + off, padded.shape[ax] - 1 + off)
            interior &= padded[tuple(idx)]
    boundary = m & ~interior
    coords = np.argwhere(boundary).astype(np.int64)
    return SurfaceSet(coords=coords, spacing=spacing)


def _pairwise_sq(a, b, spacing):
    """Squared distances, diff-then-scale per axis, summed left to right."""
    acc = None
    for k in range(a.shape[1]):
        d = (a[:, k, None] - b[None, :, k]) * spacing[k]
        term = d * d
        acc = term if acc is None else acc + term
    return acc


def _directed_distances(a: SurfaceSet, b: SurfaceSet):
    sq = _pairwise_sq(a.coords.astype(np.float64), b.coords.astype(np.float64), a.spacing)
    return np.sqrt(sq.min(axis=1))


def _percentile_sorted(sorted_vals, q):
    """Linear-interpolated percentile of an ascending array."""
    n = len(sorted_vals)
    h = (n - 1) * (q / 100.0)
    lo = int(h)
    hi = min(lo + 1, n - 1)
    frac = h - lo
    lo_v = float(sorted_vals[lo])
    hi_v = float(sorted_vals[hi])
    return lo_v + frac * (hi_v - lo_v)


def hd95(a, b, spacing=None, percentile=95.0, combine="pooled") -> float:
    """Percentile Hausdorff distance between two mask surfaces.

    combine="pooled" takes the percentile of d(a->b) and d(b->a) pooled
    together (default); combine="max" takes the max of the two per-side
    percentiles. percentile=100 gives the classical Hausdorff distance.
    """
    if not 0 < percentile <= 100:
        raise ValueError("percentile must be in (0, 100]")
    if combine not in ("pooled", "max"):
        raise ValueError(f"unknown combine mode {combine!r}")
    ma = _as_mask(a, "a")
    mb = _as_mask(b, "b")
    if ma.shape != mb.shape:
        raise ShapeError(f"shape mismatch {ma.shape} vs {mb.shape}")
    empty_a = not ma.any()
    empty_b = not mb.any()
    if empty_a or empty_b:
        side = "both" if (empty_a and empty_b) else ("a" if empty_a else "b")
        raise UndefinedMetricError(
            f"surface distance undefined: mask {side} is empty", side=side
        )
    sa = extract_surface(ma, spacing)
    sb = extract_surface(mb, spacing)
    d_ab = _directed_distances(sa, sb)
    d_ba = _directed_distances(sb, sa)
    if combine == "max":
        return max(
            _percentile_sorted(np.sort(d_ab), percentile),
            _percentile_sorted(np.sort(d_ba), percentile),
        )
    pooled = np.sort(np.concatenate([d_ab, d_ba]))
    return _percentile_sorted(pooled, percentile)


def evaluate_pair(pred, truth, task, n_classes=None, spacing=None, percentile=95.0,
                  skip_empty=False):
    """Metric row for one pred/truth pair; backs the batch evaluation CLI.

    Returns (row, skipped) where row maps metric name to value and skipped is
    True when hd95 was skipped because a mask was empty (skip_empty mode).
    """
    if task == "classification":
        if n_classes is None:
            raise ValueError("classification evaluation needs n_classes")
        c = confusion(pred, truth, n_classes)
        return {"acc": accuracy(c), "pre": precision_macro(c)}, False
    row = {"dice": dice(pred, truth), "pa": pixel_accuracy(pred, truth)}
    try:
        row["hd95"] = hd95(pred, truth, spacing=spacing, percentile=percentile)
        return row, False
    except UndefinedMetricError:
        if not skip_empty:
            raise
        row["hd95"] = None
        return row, True
