"""Run a small strategy benchmark and print the summary table.

A trimmed-down version of the bundled comparison: three strategies race on
the same synthetic classification task over an annotation schedule, each
repeated a few times from identical warm starts. The summary pivots out as
strategy x round so the ordering is readable at a glance.
"""

import argparse
import tempfile
from pathlib import Path

from pcdal import SimulationConfig, emit_report, run_simulation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--out-dir", default=None,
                    help="where to write report files (default: temp dir)")
    args = ap.parse_args()

    cfg = SimulationConfig(
        task="classification",
        dataset={"n_classes": 3, "train_per_class": 40, "test_per_class": 30,
                 "image_size": 6, "separation": 1.8, "rare_fraction": 0.15,
                 "seed": 2},
        strategies=["hpi", "random", "lpi"],
        schedule={"initial": 0.1, "step": 0.2, "final": 0.7},
        repeats=args.repeats,
        learner={"learning_rate": 0.5, "epochs": 25, "batch_size": 16},
        seed=4,
    )
    rep = run_simulation(cfg)

    acc_mean = {(r["strategy"], r["round"]): r["mean"]
                for r in rep.summary if r["metric"] == "acc"}
    rounds = sorted({r["round"] for r in rep.rows})
    print(f"mean test accuracy over {cfg.repeats} repeats:")
    print("round".ljust(12) + "".join(s.ljust(10) for s in cfg.strategies))
    for t in rounds:
        frac = next(r["fraction"] for r in rep.rows if r["round"] == t)
        cells = "".join(f"{acc_mean[(s, t)]:.4f}".ljust(10)
                        for s in cfg.strategies)
        print(f"{t} ({frac:.0%})".ljust(12) + cells)

    out_dir = Path(args.out_dir) if args.out_dir else Path(
        tempfile.mkdtemp(prefix="benchmark-"))
    paths = emit_report(rep, out_dir)
    print("\nreports written:")
    for p in sorted(paths.values()):
        print(f"  {p}")


if __name__ == "__main__":
    main()
