"""Synthetic desk-scale datasets.

Classification: a Gaussian mixture in pixel space over small square images.
Each class has a flip-symmetric main prototype plus an asymmetric rare
prototype holding a configurable fraction of the class. Rare sub-clusters are
what consistency-driven selection is supposed to find: they are
underrepresented in any class-stratified initial pool, and their flips land in
unpopulated regions of feature space, so an undertrained linear model
disagrees with itself about them under flip perturbations.

Segmentation: images with random ellipses and rectangles at varying contrast
over a noisy background, with exact masks.

Row i of the returned feature/label arrays corresponds to sample id
"s{i:05d}"; splits list train and test ids in row order.
"""

from dataclasses import dataclass

import numpy as np

from .rng import mix


def _sample_ids(n):
    return [f"s{i:05d}" for i in range(n)]


@dataclass(frozen=True)
class ClassificationSpec:
    n_classes: int = 4
    train_per_class: int = 200
    test_per_class: int = 150
    image_size: int = 8
    rare_fraction: float = 0.12
    noise: float = 0.30
    separation: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise ValueError("per-class sample counts must be >= 1")
        if self.image_size < 2:
            raise ValueError("image_size must be >= 2")
        if not 0 <= self.rare_fraction <= 0.5:
            raise ValueError("rare_fraction must be in [0, 0.5]")
        if self.noise < 0 or self.separation <= 0:
            raise ValueError("bad noise/separation")


def _symmetrize(pattern):
    """Average over the flip group so the pattern is flip-invariant."""
    fh = pattern[:, ::-1]
    fv = pattern[::-1, :]
    fhv = pattern[::-1, ::-1]
    return (pattern + fh + fv + fhv) / 4.0


def _unit(pattern):
    return pattern / np.sqrt((pattern * pattern).sum())


def synth_classification(spec, seed=None):
    """Build (features, labels, splits) for the mixture task.

    features: (n, S, S) f64; labels: (n,) int64; splits: {"train": ids,
    "test": ids}. Deterministic in (spec, seed); seed defaults to spec.seed.
    """
    if isinstance(spec, dict):
        spec = ClassificationSpec(**spec)
    if seed is None:
        seed = spec.seed
    rng = np.random.Generator(np.random.PCG64(mix(seed, 0xC15)))
    s = spec.image_size
    mains, rares = [], []
    for _ in range(spec.n_classes):
        mains.append(spec.separation * _unit(_symmetrize(rng.normal(size=(s, s)))))
        rares.append(spec.separation * _unit(rng.normal(size=(s, s))))

    def draw(per_class):
        n_rare = int(round(per_class * spec.rare_fraction))
        feats, labels = [], []
        for c in range(spec.n_classes):
            protos = np.repeat(mains[c][None], per_class, axis=0)
            if n_rare:
                protos[:n_rare] = rares[c]
            feats.append(protos + spec.noise * rng.normal(size=(per_class, s, s)))
            labels.append(np.full(per_class, c, dtype=np.int64))
        return np.concatenate(feats), np.concatenate(labels)

    train_x, train_y = draw(spec.train_per_class)
    test_x, test_y = draw(spec.test_per_class)
    features = np.concatenate([train_x, test_x])
    labels = np.concatenate([train_y, test_y])
    ids = _sample_ids(len(labels))
    splits = {"train": ids[: len(train_y)], "test": ids[len(train_y):]}
    return features, labels, splits


@dataclass(frozen=True)
class SegmentationSpec:
    n_train: int = 48
    n_test: int = 24
    image_size: int = 32
    max_shapes: int = 3
    contrast_low: float = 0.8
    contrast_high: float = 1.6
    noise: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("split sizes must be >= 1")
        if self.image_size < 8:
            raise ValueError("image_size must be >= 8")
        if self.max_shapes < 1:
            raise ValueError("max_shapes must be >= 1")
        if not 0 < self.contrast_low <= self.contrast_high:
            raise ValueError("bad contrast range")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")


def _draw_image(rng, spec):
    s = spec.image_size
    yy, xx = np.mgrid[0:s, 0:s]
    while True:
        bg = rng.uniform(0.05, 0.2)
        img = np.full((s, s), bg)
        mask = np.zeros((s, s), dtype=bool)
        for _ in range(int(rng.integers(1, spec.max_shapes + 1))):
            cy = rng.uniform(0.2 * s, 0.8 * s)
            cx = rng.uniform(0.2 * s, 0.8 * s)
            ry = rng.uniform(2.0, 0.2 * s)
            rx = rng.uniform(2.0, 0.2 * s)
            contrast = rng.uniform(spec.contrast_low, spec.contrast_high)
            if rng.integers(0, 2):
                region = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
            else:
                region = (np.abs(yy - cy) <= ry) & (np.abs(xx - cx) <= rx)
            img[region] = bg + contrast
            mask |= region
        frac = mask.mean()
        if 0.0 < frac < 0.5:
            break
    img = img + spec.noise * rng.normal(size=(s, s))
    return img, mask.astype(np.int64)


def synth_segmentation(spec, seed=None):
    """Build (images, masks, splits); same id/row convention as classification."""
    if isinstance(spec, dict):
        spec = SegmentationSpec(**spec)
    if seed is None:
        seed = spec.seed
    rng = np.random.Generator(np.random.PCG64(mix(seed, 0x5E6)))
    n = spec.n_train + spec.n_test
    images = np.empty((n, spec.image_size, spec.image_size))
    masks = np.empty((n, spec.image_size, spec.image_size), dtype=np.int64)
    for i in range(n):
        images[i], masks[i] = _draw_image(rng, spec)
    ids = _sample_ids(n)
    splits = {"train": ids[: spec.n_train], "test": ids[spec.n_train:]}
    return images, masks, splits
