"""Active-learning simulation loop and report emission.

One simulation sweeps a grid of (strategy, repeat) lanes over a synthetic
dataset. Each lane starts from the same per-repeat stratified initial pool,
then alternates fit / evaluate / score / select / advance until the final
labeled fraction is reached. Reports are written byte-deterministically:
running the same config twice yields identical report files.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .consistency import (DispersionFn, PredictionSet, classification_score,
                          entropy_score, segmentation_score)
from .learners import (LearnerConfig, logistic_fit, logistic_predict_proba,
                       segmenter_fit, segmenter_predict_proba)
from .metrics import accuracy, confusion, dice, hd95, pixel_accuracy, precision_macro
from .perturb import PerturbationSet, apply, realign
from .pool import (advance_round, budget_schedule, new_pool,
                   normalize_strategy, select)
from .rng import PCG32, mix
from .synth import (ClassificationSpec, SegmentationSpec,
                    synth_classification, synth_segmentation)
from .tensor import AxisRole, image_roles, prediction_roles

TASKS = ("classification", "segmentation")
CLS_METRICS = ("acc", "pre")
SEG_METRICS = ("dice", "pa", "hd95")


@dataclass
class SimulationConfig:
    task: str = "classification"
    dataset: dict = field(default_factory=dict)
    perturbations: list = field(default_factory=lambda: list(PerturbationSet.default().names))
    dispersion: dict = field(default_factory=lambda: {"kind": "mse"})
    strategies: list = field(default_factory=lambda: ["hpi", "random", "lpi"])
    schedule: dict = field(default_factory=lambda: {"initial": 0.1, "step": 0.1, "final": 0.5})
    repeats: int = 5
    learner: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        self.strategies = [normalize_strategy(s) for s in self.strategies]
        if not self.strategies:
            raise ValueError("need at least one strategy")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategies")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for key in ("initial", "step", "final"):
            if key not in self.schedule:
                raise ValueError(f"schedule missing {key!r}")
        # Materialize to catch bad perturbation/dispersion settings up front.
        PerturbationSet.from_names(self.perturbations)
        DispersionFn(**self.dispersion)
        LearnerConfig(**{**_LEARNER_DEFAULTS, **self.learner})

    @classmethod
    def from_doc(cls, doc):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_doc(json.load(fh))

    def to_doc(self, include_out_dir=True):
        doc = {
            "task": self.task,
            "dataset": dict(self.dataset),
            "perturbations": list(self.perturbations),
            "dispersion": dict(self.dispersion),
            "strategies": list(self.strategies),
            "schedule": dict(self.schedule),
            "repeats": self.repeats,
            "learner": dict(self.learner),
            "seed": self.seed,
        }
        if include_out_dir:
            doc["out_dir"] = self.out_dir
        return doc


_LEARNER_DEFAULTS = {
    "learning_rate": 0.5,
    "epochs": 40,
    "batch_size": 32,
    "l2": 1e-3,
    "seed": 0,
}


@dataclass
class SimulationReport:
    config: dict
    rows: list
    summary: list


def _stratified_initial(ids, strat_labels, budget, seed):
    """Pick `budget` ids with class proportions preserved (largest remainder)."""
    by_class = {}
    for sid in ids:
        by_class.setdefault(strat_labels[sid], []).append(sid)
    classes = sorted(by_class)
    total = len(ids)
    exact = [budget * len(by_class[c]) / total for c in classes]
    quota = [int(q) for q in exact]
    order = sorted(range(len(classes)), key=lambda i: (-(exact[i] - quota[i]), i))
    for i in order[: budget - sum(quota)]:
        quota[i] += 1
    picked = []
    for ci, c in enumerate(classes):
        members = sorted(by_class[c])
        PCG32(mix(seed, 17, ci), ci).shuffle(members)
        picked.extend(members[: quota[ci]])
    return sorted(picked)


class _ClassificationTask:
    """Lane-independent data and model plumbing for the classification task."""

    metrics = CLS_METRICS

    def __init__(self, cfg):
        spec = dict(cfg.dataset)
        spec.setdefault("seed", mix(cfg.seed, 0xDA7A))
        self.spec = ClassificationSpec(**spec)
        features, labels, splits = synth_classification(self.spec)
        self.index = {f"s{i:05d}": i for i in range(len(labels))}
        self.features = features
        self.labels = labels
        self.train_ids = splits["train"]
        self.test_ids = splits["test"]
        self.n_classes = self.spec.n_classes
        self.strat_labels = {sid: int(labels[self.index[sid]]) for sid in self.train_ids}
        self.perts = PerturbationSet.from_names(cfg.perturbations)
        self.dispersion = DispersionFn(**cfg.dispersion)
        self._flat = features.reshape(len(labels), -1)
        self._test_x = self._flat[[self.index[sid] for sid in self.test_ids]]
        self._test_y = labels[[self.index[sid] for sid in self.test_ids]]
        # Batch axis first; flips act on the trailing image plane.
        self._batch_roles = AxisRole(height=1, width=2)

    def fit(self, labeled_ids, learner_cfg):
        rows = [self.index[sid] for sid in sorted(labeled_ids)]
        return logistic_fit(self._flat[rows], self.labels[rows], learner_cfg)

    def evaluate(self, model):
        pred = logistic_predict_proba(model, self._test_x).argmax(axis=1)
        counts = confusion(self._test_y, pred, self.n_classes)
        return {"acc": accuracy(counts), "pre": precision_macro(counts)}

    def consistency_scores(self, model, unlabeled_ids):
        rows = [self.index[sid] for sid in unlabeled_ids]
        imgs = self.features[rows]
        members = []
        for p in self.perts:
            moved = apply(p, imgs, self._batch_roles)
            probs = logistic_predict_proba(model, moved.reshape(len(rows), -1))
            members.append((p.name, probs))
        out = {}
        for i, sid in enumerate(unlabeled_ids):
            pset = PredictionSet(
                sid, [(name, probs[i]) for name, probs in members], "classification")
            out[sid] = classification_score(pset, self.dispersion).score
        return out

    def entropy_scores(self, model, unlabeled_ids):
        rows = [self.index[sid] for sid in unlabeled_ids]
        probs = logistic_predict_proba(model, self._flat[rows])
        return {sid: entropy_score(probs[i]) for i, sid in enumerate(unlabeled_ids)}


class _SegmentationTask:
    """Same plumbing for 2-D segmentation."""

    metrics = SEG_METRICS

    def __init__(self, cfg):
        spec = dict(cfg.dataset)
        spec.setdefault("seed", mix(cfg.seed, 0xDA7A))
        self.spec = SegmentationSpec(**spec)
        images, masks, splits = synth_segmentation(self.spec)
        self.index = {f"s{i:05d}": i for i in range(len(images))}
        self.images = images
        self.masks = masks
        self.train_ids = splits["train"]
        self.test_ids = splits["test"]
        self.n_classes = 2
        self.perts = PerturbationSet.from_names(cfg.perturbations)
        self.dispersion = DispersionFn(**cfg.dispersion)
        self._img_roles = image_roles(2)
        self._pred_roles = prediction_roles("segmentation-2d")
        # Stratify the initial pool by foreground-area quartile.
        fracs = {sid: masks[self.index[sid]].mean() for sid in self.train_ids}
        cut = np.quantile(sorted(fracs.values()), [0.25, 0.5, 0.75])
        self.strat_labels = {sid: int(np.searchsorted(cut, f)) for sid, f in fracs.items()}

    def fit(self, labeled_ids, learner_cfg):
        rows = [self.index[sid] for sid in sorted(labeled_ids)]
        return segmenter_fit(self.images[rows], self.masks[rows], learner_cfg)

    def evaluate(self, model):
        dices, pas, hds = [], [], []
        for sid in self.test_ids:
            i = self.index[sid]
            probs = segmenter_predict_proba(model, self.images[i])
            pred = probs.argmax(axis=0)
            truth = self.masks[i]
            dices.append(dice(pred, truth))
            pas.append(pixel_accuracy(pred, truth))
            if pred.any() and truth.any():
                hds.append(hd95(pred, truth))
        row = {"dice": float(np.mean(dices)), "pa": float(np.mean(pas))}
        row["hd95"] = float(np.mean(hds)) if hds else None
        return row

    def consistency_scores(self, model, unlabeled_ids):
        out = {}
        for sid in unlabeled_ids:
            img = self.images[self.index[sid]]
            members = []
            for p in self.perts:
                moved = apply(p, img, self._img_roles)
                probs = segmenter_predict_proba(model, moved)
                members.append((p.name, realign(p, probs, self._pred_roles)))
            pset = PredictionSet(sid, members, "segmentation-2d")
            out[sid] = segmentation_score(pset, self.dispersion).score
        return out

    def entropy_scores(self, model, unlabeled_ids):
        out = {}
        for sid in unlabeled_ids:
            probs = segmenter_predict_proba(model, self.images[self.index[sid]])
            out[sid] = entropy_score(probs)
        return out


def _make_task(cfg):
    if cfg.task == "classification":
        return _ClassificationTask(cfg)
    return _SegmentationTask(cfg)


def _lane_rows(task, cfg, budgets, fractions, strategy, repeat):
    """Run one (strategy, repeat) lane; returns report rows in round order."""
    initial = _stratified_initial(
        task.train_ids, task.strat_labels, budgets[0], mix(cfg.seed, 1000, repeat))
    pool = new_pool(task.train_ids, cfg.seed, labeled=initial)
    learner_cfg = LearnerConfig(**{
        **_LEARNER_DEFAULTS, **cfg.learner,
        "seed": mix(cfg.learner.get("seed", cfg.seed), 0x5EED, repeat)})
    select_seed = mix(cfg.seed, 3000, repeat)
    rows = []
    for t in range(len(budgets)):
        try:
            model = task.fit(pool.labeled_ids, learner_cfg)
            evaluated = task.evaluate(model)
        except Exception as exc:
            raise RuntimeError(
                f"lane strategy={strategy} repeat={repeat} round={t}: {exc}") from exc
        for metric, value in evaluated.items():
            rows.append({
                "strategy": strategy, "repeat": repeat, "round": t,
                "fraction": fractions[t], "metric": metric, "value": value,
            })
        if t + 1 == len(budgets):
            break
        try:
            unlabeled = sorted(pool.unlabeled_ids)
            if not unlabeled:
                pool = advance_round(pool, strategy, [])
                continue
            if strategy == "random":
                scores = None
            elif strategy == "max-entropy":
                scores = task.entropy_scores(model, unlabeled)
            else:
                scores = task.consistency_scores(model, unlabeled)
            chosen = select(strategy, scores, pool, budgets[t + 1], select_seed)
            pool = advance_round(pool, strategy, chosen)
        except Exception as exc:
            raise RuntimeError(
                f"lane strategy={strategy} repeat={repeat} round={t}: {exc}") from exc
    return rows


def run_simulation(cfg, threads=1):
    """Sweep every (strategy, repeat) lane and aggregate a report."""
    task = _make_task(cfg)
    total = len(task.train_ids)
    budgets = budget_schedule(
        total, cfg.schedule["initial"], cfg.schedule["step"], cfg.schedule["final"])
    cum = np.cumsum(budgets)
    fractions = [float(c) / total for c in cum]
    lanes = [(s, r) for s in cfg.strategies for r in range(cfg.repeats)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool_exec:
            futs = {
                lane: pool_exec.submit(
                    _lane_rows, task, cfg, budgets, fractions, lane[0], lane[1])
                for lane in lanes
            }
            by_lane = {lane: futs[lane].result() for lane in lanes}
    else:
        by_lane = {
            lane: _lane_rows(task, cfg, budgets, fractions, lane[0], lane[1])
            for lane in lanes
        }
    rows = []
    for lane in lanes:
        rows.extend(by_lane[lane])
    summary = []
    for strategy in cfg.strategies:
        for t in range(len(budgets)):
            for metric in task.metrics:
                vals = [
                    r["value"] for r in rows
                    if r["strategy"] == strategy and r["round"] == t
                    and r["metric"] == metric and r["value"] is not None
                ]
                if vals:
                    mean = float(np.mean(vals))
                    std = float(np.std(vals))
                else:
                    mean = std = None
                summary.append({
                    "strategy": strategy, "round": t, "fraction": fractions[t],
                    "metric": metric, "mean": mean, "std": std,
                })
    return SimulationReport(config=cfg.to_doc(include_out_dir=False), rows=rows, summary=summary)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report, out_dir):
    """Write report.csv, report.json, and summary.csv; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    lines = ["strategy,repeat,round,fraction,metric,value"]
    for r in report.rows:
        lines.append(",".join(_fmt(r[k]) for k in
                              ("strategy", "repeat", "round", "fraction", "metric", "value")))
    paths["report.csv"] = os.path.join(out_dir, "report.csv")
    with open(paths["report.csv"], "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")

    paths["report.json"] = os.path.join(out_dir, "report.json")
    doc = {"config": report.config, "rows": report.rows, "summary": report.summary}
    with open(paths["report.json"], "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    lines = ["strategy,round,fraction,metric,mean,std"]
    for r in report.summary:
        lines.append(",".join(_fmt(r[k]) for k in
                              ("strategy", "round", "fraction", "metric", "mean", "std")))
    paths["summary.csv"] = os.path.join(out_dir, "summary.csv")
    with open(paths["summary.csv"], "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return paths


def bundled_classification_config():
    """Stock classification run showing the acquisition-strategy gap."""
    return SimulationConfig(
        task="classification",
        dataset={
            "n_classes": 4,
            "train_per_class": 200,
            "test_per_class": 150,
            "image_size": 8,
            "rare_fraction": 0.15,
            "noise": 0.30,
            "separation": 2.0,
            "seed": 11,
        },
        dispersion={"kind": "mse"},
        strategies=["hpi", "random", "lpi"],
        schedule={"initial": 0.1, "step": 0.1, "final": 0.5},
        repeats=20,
        learner={"learning_rate": 0.5, "epochs": 40, "batch_size": 32, "l2": 1e-3},
        seed=7,
    )


def bundled_segmentation_config():
    """Stock 2-D segmentation run; smaller, mostly a pipeline demonstration."""
    return SimulationConfig(
        task="segmentation",
        dataset={
            "n_train": 48,
            "n_test": 16,
            "image_size": 24,
            "max_shapes": 3,
            "noise": 0.15,
            "seed": 13,
        },
        dispersion={"kind": "mse"},
        strategies=["hpi", "random"],
        schedule={"initial": 0.25, "step": 0.25, "final": 0.75},
        repeats=3,
        learner={"learning_rate": 0.5, "epochs": 12, "batch_size": 256, "l2": 1e-3},
        seed=5,
    )
