"""In-process bridge from host training loops to the acquisition engine.

The engine's file-based interfaces (PTNS tensors, JSON manifests) are the
integration path of record; this package is for callers that already hold
arrays in memory and want function calls instead of files. Every operation
here wraps the engine's public API and never reimplements its math, so a
bound call returns the same f64 bits the CLI would produce for the same
data.

The module keeps no state between calls: equal inputs give equal outputs,
calls are reentrant, and the heavy numerics run inside the engine's numpy
kernels, which release the interpreter lock.
"""

import logging

import numpy as np

import pcdal
from pcdal import entropy_score, score_batch  # re-exported for loop callers

__version__ = "0.1.0"

log = logging.getLogger(__name__)

METRIC_KINDS = ("dice", "pa", "hd95")


class BoundArray:
    """A host array mapped onto the engine's tensor contract.

    float32/float64 C-contiguous buffers are wrapped without copying;
    anything else (other dtypes, Fortran order, non-contiguous views) is
    copied once into a compliant buffer and the copy is recorded with a
    debug-level notice. `copied` says which path was taken.
    """

    def __init__(self, obj):
        arr = np.asarray(obj)
        if arr.dtype in (np.float32, np.float64):
            if arr.flags["C_CONTIGUOUS"]:
                mapped, copied = arr, False
            else:
                mapped, copied = np.ascontiguousarray(arr), True
                log.debug("BoundArray copied a non-contiguous %s buffer of shape %s",
                          arr.dtype, arr.shape)
        else:
            if arr.dtype.kind not in "biuf":
                raise pcdal.FormatError(
                    f"unsupported dtype {arr.dtype}; expected a numeric array")
            mapped, copied = np.ascontiguousarray(arr, dtype=np.float64), True
            log.debug("BoundArray converted %s to float64, shape %s",
                      arr.dtype, arr.shape)
        pcdal.check_tensor(mapped)
        self.array = mapped
        self.copied = copied

    @property
    def shape(self):
        return self.array.shape

    @property
    def dtype(self):
        return self.array.dtype


def _bound(obj):
    return obj if isinstance(obj, BoundArray) else BoundArray(obj)


def bind_score(predictions, task, dispersion="mse"):
    """Consistency score of one sample's aligned predictions.

    predictions is a list of (perturbation name, array-like) pairs, class
    axis first, already realigned for spatial tasks. Returns the same f64
    the engine's scoring produces.
    """
    members = [(name, _bound(arr).array) for name, arr in predictions]
    s = pcdal.PredictionSet("bound", members, task)
    return pcdal.score_set(s, pcdal.DispersionFn(dispersion)).score


def bind_select(scores, strategy, budget, seed):
    """Rank a scores mapping (id -> f64) and return the ids to annotate.

    Same contract as the engine's pool selection over a fresh pool holding
    exactly the mapping's ids.
    """
    scores = {str(k): float(v) for k, v in scores.items()}
    pool = pcdal.new_pool(sorted(scores), seed=seed)
    return pcdal.select(strategy, scores, pool, budget, seed)


def bind_metrics(pred, truth, kind):
    """One mask metric (dice, pa, or hd95) as f64."""
    if kind not in METRIC_KINDS:
        raise ValueError(f"unknown metric kind {kind!r}; expected one of {METRIC_KINDS}")
    p, t = _bound(pred).array, _bound(truth).array
    if kind == "dice":
        return pcdal.dice(p, t)
    if kind == "pa":
        return pcdal.pixel_accuracy(p, t)
    return pcdal.hd95(p, t)


# the advertised call surface
score = bind_score
select = bind_select
metrics = bind_metrics

__all__ = [
    "BoundArray", "METRIC_KINDS", "bind_metrics", "bind_score", "bind_select",
    "entropy_score", "metrics", "score", "score_batch", "select",
]
