"""Consistency scoring: how much do a sample's predictions disagree under
perturbation?

A PredictionSet holds one probability tensor per perturbation, all realigned to
canonical orientation (class axis first). The score is the mean pointwise
divergence of each member from the member mean: MSE gives the per-class
variance statistic averaged over classes (and spatial positions for
segmentation); the other dispersion kinds swap the squared deviation for their
own pointwise form. Also carries the max-entropy baseline score.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import PcdalError, ShapeError
from .perturb import Perturbation, realign
from .tensor import prediction_roles, read_tensor

TASKS = ("classification", "segmentation-2d", "segmentation-3d")
_TASK_RANK = {"classification": 1, "segmentation-2d": 3, "segmentation-3d": 4}

DISPERSION_KINDS = ("mse", "l1", "smooth_l1", "huber", "kl", "hinge")

NORM_TOL = 1e-6  # class-axis sums must be within this of 1


@dataclass(frozen=True)
class DispersionFn:
    """Pointwise divergence from the mean prediction.

    delta parameterizes smooth_l1/huber, epsilon floors the kl logs, margin is
    the hinge dead zone.
    """

    kind: str = "mse"
    delta: float = 1.0
    epsilon: float = 1e-12
    margin: float = 0.1

    def __post_init__(self):
        if self.kind not in DISPERSION_KINDS:
            raise ValueError(f"unknown dispersion kind {self.kind!r}")
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")


@dataclass(frozen=True)
class ScoreRecord:
    sample_id: str
    score: float
    n_predictions: int


@dataclass(frozen=True)
class ScoreError:
    """Per-sample failure inside a batch; the batch itself continues."""

    sample_id: str
    error: str


class PredictionSet:
    """Aligned probability predictions of one sample under each perturbation."""

    def __init__(self, sample_id, predictions, task):
        if task not in TASKS:
            raise ValueError(f"unknown task kind {task!r}")
        predictions = [(p, np.asarray(t)) for p, t in predictions]
        if len(predictions) < 2:
            raise ValueError("prediction set needs at least 2 members")
        shape = predictions[0][1].shape
        dtype = predictions[0][1].dtype
        for _, t in predictions:
            if t.shape != shape:
                raise ShapeError(f"member shapes differ: {t.shape} vs {shape}")
            if t.dtype != dtype:
                raise ShapeError(f"member dtypes differ: {t.dtype} vs {dtype}")
        if len(shape) != _TASK_RANK[task]:
            raise ShapeError(
                f"task {task} expects rank {_TASK_RANK[task]}, got {len(shape)}"
            )
        sums = np.stack([t.astype(np.float64).sum(axis=0) for _, t in predictions])
        if not np.all(np.abs(sums - 1.0) <= NORM_TOL):
            raise ValueError(
                f"sample {sample_id}: class-axis sums off 1 by more than {NORM_TOL}"
            )
        self.sample_id = sample_id
        self.predictions = predictions
        self.task = task

    def stacked(self):
        """Members stacked to (M, C, ...spatial) in f64."""
        return np.stack([t.astype(np.float64) for _, t in self.predictions])

    def __len__(self):
        return len(self.predictions)


def mean_prediction(s: PredictionSet) -> np.ndarray:
    """Elementwise mean of the M members (1/M generalization of the fixed 1/4).

    Where every member agrees bit for bit, the shared value is returned
    exactly, so perfect agreement yields exactly zero deviations downstream.
    """
    stacked = s.stacked()
    return _exact_mean(stacked)


def _exact_mean(stacked):
    avg = stacked.mean(axis=0)
    same = np.all(stacked == stacked[0], axis=0)
    avg[same] = stacked[0][same]
    return avg


def _member_divergence(stacked, f: DispersionFn):
    """Pointwise divergence of each member from the mean; (M, C, ...) array.

    For kl the class axis is already reduced (axis 1 summed), because KL is a
    distribution-level quantity.
    """
    avg = _exact_mean(stacked)
    if f.kind == "kl":
        ratio = (stacked + f.epsilon) / (avg[None] + f.epsilon)
        return (stacked * np.log(ratio)).sum(axis=1)
    d = stacked - avg[None]
    if f.kind == "mse":
        return d * d
    a = np.abs(d)
    if f.kind == "l1":
        return a
    if f.kind == "smooth_l1":
        return np.where(a < f.delta, 0.5 * d * d / f.delta, a - 0.5 * f.delta)
    if f.kind == "huber":
        return np.where(a <= f.delta, 0.5 * d * d, f.delta * (a - 0.5 * f.delta))
    if f.kind == "hinge":
        return np.maximum(0.0, a - f.margin)
    raise ValueError(f"unknown dispersion kind {f.kind!r}")


def _dispersion_score(stacked, f):
    div = _member_divergence(stacked, f)
    score = float(div.mean())
    if f.kind == "kl":
        score = max(0.0, score)  # epsilon floors can round a hair negative
    return score


def classification_score(s: PredictionSet, f: DispersionFn = DispersionFn()) -> ScoreRecord:
    """Perturbation-error scalar for a classification prediction set."""
    if s.task != "classification":
        raise ValueError(f"classification_score on task {s.task!r}")
    return ScoreRecord(s.sample_id, _dispersion_score(s.stacked(), f), len(s))


def segmentation_score(s: PredictionSet, f: DispersionFn = DispersionFn()) -> ScoreRecord:
    """Mean over spatial positions of the per-position classification score."""
    if s.task == "classification":
        raise ValueError("segmentation_score on a classification set")
    return ScoreRecord(s.sample_id, _dispersion_score(s.stacked(), f), len(s))


def score_set(s: PredictionSet, f: DispersionFn = DispersionFn()) -> ScoreRecord:
    if s.task == "classification":
        return classification_score(s, f)
    return segmentation_score(s, f)


def entropy_score(p, epsilon=1e-12) -> float:
    """Shannon entropy -sum(p ln(p+eps)); per-pixel entropies averaged for maps.

    Rank-1 input is a class-probability vector; higher ranks put the class
    axis first. Per-position entropies are clamped at 0 so one-hot inputs
    score exactly 0 despite the epsilon floor.
    """
    arr = np.asarray(p, dtype=np.float64)
    sums = arr.sum(axis=0)
    if not np.all(np.abs(sums - 1.0) <= NORM_TOL):
        raise ValueError("entropy_score input is not normalized along the class axis")
    h = -(arr * np.log(arr + epsilon)).sum(axis=0)
    h = np.maximum(h, 0.0)
    return float(h.mean()) if h.ndim else float(h)


def _descriptor_set(entry, pset, base_dir):
    """Load, realign and assemble one manifest entry into a PredictionSet."""
    sample_id = entry["sample_id"]
    task = entry["task"]
    if task not in TASKS:
        raise ValueError(f"unknown task kind {task!r}")
    wanted = {m.name for m in pset}
    listed = [d["perturbation"] for d in entry["predictions"]]
    if sorted(listed) != sorted(wanted):
        raise ValueError(
            f"perturbations {sorted(listed)} do not match the set {sorted(wanted)}"
        )
    roles = prediction_roles(task)
    members = []
    for d in entry["predictions"]:
        path = d["path"]
        if base_dir is not None and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        t = read_tensor(path)
        p = Perturbation(d["perturbation"])
        if not d.get("realigned", True):
            t = realign(p, t, roles)
        members.append((p, t))
    return PredictionSet(sample_id, members, task)


def score_batch(manifest, pset, f: DispersionFn = DispersionFn(), base_dir=None):
    """Score every manifest entry; input order preserved.

    Per-sample failures become ScoreError records and the batch continues;
    callers decide whether any ScoreError makes the whole run a failure.
    """
    out = []
    for i, entry in enumerate(manifest):
        sample_id = entry.get("sample_id", f"<entry {i}>")
        try:
            s = _descriptor_set(entry, pset, base_dir)
            out.append(score_set(s, f))
        except (PcdalError, OSError, ValueError, KeyError, TypeError) as exc:
            out.append(ScoreError(sample_id, f"{type(exc).__name__}: {exc}"))
    return out


def load_manifest(path):
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if not isinstance(manifest, list):
        raise ValueError("batch manifest must be a JSON array")
    return manifest
