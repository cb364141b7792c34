"""Command line front end.

Lanes: simulate (full sweep from a JSON config), score (batch consistency
scores from a prediction manifest), select (rank a pool's unlabeled ids),
split (stratified k folds), advance (apply a selection to a pool file), and
metrics (batch evaluation from a pred/truth manifest). Every lane exits 0
only when everything it was asked to do succeeded.
"""

import argparse
import csv
import io
import json
import os
import sys

from .consistency import (DISPERSION_KINDS, DispersionFn, ScoreError,
                          load_manifest, score_batch)
from .errors import PcdalError
from .metrics import evaluate_pair
from .perturb import PerturbationSet
from .pool import (STRATEGIES, advance_round, load_pool, normalize_strategy,
                   save_pool, select, stratified_kfold)
from .simulate import SimulationConfig, emit_report, run_simulation
from .tensor import read_tensor


def _write_text(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _resolve(path, base):
    return path if os.path.isabs(path) else os.path.join(base, path)


def _cmd_simulate(args):
    doc = SimulationConfig.from_file(args.config).to_doc()
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out_dir is not None:
        doc["out_dir"] = args.out_dir
    cfg = SimulationConfig.from_doc(doc)
    report = run_simulation(cfg, threads=args.threads)
    paths = emit_report(report, cfg.out_dir or ".")
    for name in ("report.csv", "report.json", "summary.csv"):
        print(paths[name])
    return 0


def _cmd_score(args):
    manifest = load_manifest(args.manifest)
    if args.perturbations:
        pset = PerturbationSet.from_names(args.perturbations.split(","))
    else:
        pset = PerturbationSet.default()
    f = DispersionFn(kind=args.dispersion, delta=args.delta,
                     epsilon=args.epsilon, margin=args.margin)
    base = os.path.dirname(os.path.abspath(args.manifest))
    results = score_batch(manifest, pset, f, base_dir=base)
    lines = []
    failed = 0
    for r in results:
        if isinstance(r, ScoreError):
            failed += 1
            lines.append(json.dumps({"sample_id": r.sample_id, "error": r.error}))
        else:
            lines.append(json.dumps({
                "sample_id": r.sample_id,
                "score": r.score,
                "n_predictions": r.n_predictions,
            }))
    _write_text("\n".join(lines) + "\n", args.out)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample_id", "score", "n_predictions", "error"])
        for r in results:
            if isinstance(r, ScoreError):
                w.writerow([r.sample_id, "", "", r.error])
            else:
                w.writerow([r.sample_id, repr(r.score), r.n_predictions, ""])
        _write_text(buf.getvalue(), args.csv)
    if failed:
        print(f"{failed} of {len(results)} samples failed", file=sys.stderr)
        return 1
    return 0


def _load_scores(path):
    """Score table from a JSON array or JSONL stream of score records."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    head = text.lstrip()[:1]
    if head == "[":
        entries = json.loads(text)
    else:
        entries = [json.loads(line) for line in text.splitlines() if line.strip()]
    table = {}
    for e in entries:
        if "score" in e:
            table[e["sample_id"]] = float(e["score"])
    return table


def _cmd_select(args):
    pool = load_pool(args.pool)
    scores = _load_scores(args.scores) if args.scores else None
    if scores is None and normalize_strategy(args.strategy) != "random":
        raise ValueError(f"strategy {args.strategy!r} needs --scores")
    seed = args.seed if args.seed is not None else pool.seed
    chosen = select(args.strategy, scores, pool, args.budget, seed)
    _write_text(json.dumps(chosen) + "\n", args.out)
    return 0


def _cmd_split(args):
    with open(args.labels, "r", encoding="utf-8") as fh:
        labels = json.load(fh)
    folds = stratified_kfold(labels, args.k, args.seed)
    _write_text(json.dumps(folds, indent=2) + "\n", args.out)
    return 0


def _cmd_advance(args):
    pool = load_pool(args.pool)
    with open(args.selected, "r", encoding="utf-8") as fh:
        selected = json.load(fh)
    if not isinstance(selected, list):
        raise ValueError("selection file must hold a JSON array of ids")
    pool = advance_round(pool, args.strategy, selected, scores_path=args.scores_path)
    save_pool(pool, args.out or args.pool)
    return 0


def _cmd_metrics(args):
    with open(args.manifest, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    task = doc["task"]
    if task not in ("classification", "segmentation"):
        raise ValueError(f"unknown task kind {task!r}")
    base = os.path.dirname(os.path.abspath(args.manifest))
    cols = ("acc", "pre") if task == "classification" else ("dice", "pa", "hd95")
    rows = []
    skipped = 0
    for s in doc["samples"]:
        pred = read_tensor(_resolve(s["pred"], base))
        truth = read_tensor(_resolve(s["truth"], base))
        row, was_skipped = evaluate_pair(
            pred, truth, task,
            n_classes=doc.get("n_classes"),
            spacing=doc.get("spacing"),
            percentile=args.percentile,
            skip_empty=args.skip_empty,
        )
        skipped += was_skipped
        rows.append((s["sample_id"], row))
    lines = ["sample_id," + ",".join(cols)]
    for sid, row in rows:
        cells = [repr(row[c]) if row[c] is not None else "" for c in cols]
        lines.append(f"{sid}," + ",".join(cells))
    means = []
    for c in cols:
        vals = [row[c] for _, row in rows if row[c] is not None]
        means.append(repr(sum(vals) / len(vals)) if vals else "")
    lines.append("mean," + ",".join(means))
    _write_text("\n".join(lines) + "\n", args.out)
    if skipped:
        print(f"hd95 skipped for {skipped} samples with an empty mask", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcdal",
        description="Perturbation-consistency scoring, pool selection and simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a full simulation from a JSON config")
    p.add_argument("--config", required=True, help="SimulationConfig JSON file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out-dir", default=None, help="override the config output directory")
    p.add_argument("--threads", type=int, default=1, help="lane-level worker threads")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("score", help="score a batch of prediction sets")
    p.add_argument("--manifest", required=True, help="JSON array of sample entries")
    p.add_argument("--perturbations", default=None,
                   help="comma list of perturbation names (default identity+flips)")
    p.add_argument("--dispersion", default="mse", choices=DISPERSION_KINDS)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1e-12)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--out", default=None, help="JSONL output path (default stdout)")
    p.add_argument("--csv", default=None, help="also write a CSV table here")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("select", help="rank and pick unlabeled ids from a pool")
    p.add_argument("--pool", required=True, help="pool state JSON file")
    p.add_argument("--strategy", required=True, choices=STRATEGIES)
    p.add_argument("--budget", required=True, type=int)
    p.add_argument("--scores", default=None,
                   help="score file (JSONL or JSON array); required for ranked strategies")
    p.add_argument("--seed", type=int, default=None, help="default: the pool's seed")
    p.add_argument("--out", default=None, help="selection JSON path (default stdout)")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("split", help="stratified k-fold split of labeled ids")
    p.add_argument("--labels", required=True, help="JSON object mapping id to label")
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="folds JSON path (default stdout)")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("advance", help="apply a selection to a pool file")
    p.add_argument("--pool", required=True, help="pool state JSON file")
    p.add_argument("--selected", required=True, help="JSON array of selected ids")
    p.add_argument("--strategy", required=True, choices=STRATEGIES)
    p.add_argument("--scores-path", default=None,
                   help="optional score-file path recorded with the round")
    p.add_argument("--out", default=None, help="output pool path (default: in place)")
    p.set_defaults(func=_cmd_advance)

    p = sub.add_parser("metrics", help="evaluate pred/truth pairs from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--percentile", type=float, default=95.0)
    p.add_argument("--skip-empty", action="store_true",
                   help="skip hd95 on empty masks instead of failing")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PcdalError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
