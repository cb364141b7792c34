"""One acquisition step, spelled out: perturb, predict, realign, score, pick.

Trains a small segmenter on a handful of labeled images, then runs the
consistency recipe over the unlabeled pool: each image is pushed through
identity plus three flips, predictions are realigned to canonical
orientation, and the spread across the four members becomes the sample's
acquisition score. The highest scorers are exactly what hpi selection
annotates next.
"""

import numpy as np

from pcdal import (DispersionFn, LearnerConfig, PerturbationSet,
                   PredictionSet, SegmentationSpec, apply, image_roles,
                   new_pool, prediction_roles, realign, score_set,
                   segmenter_fit, segmenter_predict_proba, select,
                   synth_segmentation)


def main():
    spec = SegmentationSpec(n_train=16, n_test=1, image_size=16, seed=3)
    images, masks, splits = synth_segmentation(spec)
    train_ids = splits["train"]
    labeled, unlabeled = train_ids[:6], train_ids[6:]
    row = lambda sid: int(sid[1:])  # ids are s00000, s00001, ... by row

    cfg = LearnerConfig(learning_rate=0.5, epochs=10, batch_size=256, seed=0)
    model = segmenter_fit([images[row(sid)] for sid in labeled],
                          [masks[row(sid)] for sid in labeled], cfg)

    pset = PerturbationSet.default()
    img_roles = image_roles(2)
    pred_roles = prediction_roles("segmentation-2d")
    f = DispersionFn("mse")

    print(f"scoring {len(unlabeled)} unlabeled images "
          f"under {list(pset.names)}:")
    records = []
    for sid in unlabeled:
        members = []
        for p in pset:
            perturbed = apply(p, images[row(sid)], img_roles)
            probs = segmenter_predict_proba(model, perturbed)
            members.append((p.name, realign(p, probs, pred_roles)))
        rec = score_set(PredictionSet(sid, members, "segmentation-2d"), f)
        records.append(rec)
    for rec in sorted(records, key=lambda r: -r.score)[:5]:
        print(f"  {rec.sample_id}  score={rec.score:.6f}")

    pool = new_pool(train_ids, seed=11, labeled=labeled)
    picked = select("hpi", records, pool, budget=3, seed=pool.seed)
    print(f"\nhpi would annotate next: {picked}")
    worst = select("lpi", records, pool, budget=3, seed=pool.seed)
    print(f"lpi (the control) would annotate: {worst}")


if __name__ == "__main__":
    main()
