"""Score hand-built prediction sets with every dispersion kind.

Two members disagree on a two-class problem; the mean sits halfway, so the
squared deviation is 0.25 at every slot. Watch how each dispersion kind
weighs the same disagreement, then see the score collapse to zero when the
members agree.
"""

import numpy as np

from pcdal import DISPERSION_KINDS, DispersionFn, PredictionSet, score_set


def main():
    members = [
        ("identity", np.array([1.0, 0.0])),
        ("flip_h", np.array([0.0, 1.0])),
    ]
    s = PredictionSet("disagreeing", members, "classification")
    print("two members, maximal disagreement:")
    for kind in DISPERSION_KINDS:
        rec = score_set(s, DispersionFn(kind))
        print(f"  {kind:<10} {rec.score:.6f}")

    agree = PredictionSet("agreeing", [
        ("identity", np.array([0.7, 0.3])),
        ("flip_h", np.array([0.7, 0.3])),
    ], "classification")
    print("\nsame pipeline, identical members:")
    for kind in DISPERSION_KINDS:
        rec = score_set(agree, DispersionFn(kind))
        print(f"  {kind:<10} {rec.score:.6f}")

    # a slightly noisy segmentation set: per-pixel distributions this time
    rng = np.random.default_rng(0)
    base = np.stack([np.full((4, 4), 0.8), np.full((4, 4), 0.2)])
    seg_members = []
    for name in ("identity", "flip_h", "flip_v"):
        jitter = rng.normal(scale=0.02, size=(4, 4))
        m = base + np.stack([jitter, -jitter])
        seg_members.append((name, m))
    seg = PredictionSet("patch", seg_members, "segmentation-2d")
    print("\n4x4 segmentation patch with small jitter:")
    for kind in DISPERSION_KINDS:
        rec = score_set(seg, DispersionFn(kind))
        print(f"  {kind:<10} {rec.score:.8f}")


if __name__ == "__main__":
    main()
