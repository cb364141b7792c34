"""Drive the pcdal CLI from files alone, the way an external trainer would.

Everything crosses the boundary as PTNS tensors and JSON: predictions are
exported, `pcdal score` turns them into acquisition scores, and
`pcdal select` ranks the pool. Nothing here imports the scoring internals;
if you can write files you can integrate.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from pcdal import new_pool, save_pool, softmax, write_tensor


def run(args):
    print(f"$ {' '.join(args)}")
    proc = subprocess.run(args, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(proc.stderr)
    return proc.stdout


def main():
    work = Path(tempfile.mkdtemp(prefix="cli-workflow-"))
    rng = np.random.default_rng(5)
    names = ("identity", "flip_h", "flip_v")

    # export three samples, each predicted under three perturbations;
    # the middle sample gets extra disagreement on purpose
    entries = []
    for i in range(3):
        preds = []
        base = rng.normal(size=4)
        for name in names:
            scale = 2.0 if i == 1 else 0.05
            probs = softmax(base + rng.normal(scale=scale, size=4), 0)
            rel = f"s{i}_{name}.ptns"
            write_tensor(probs, work / rel)
            preds.append({"perturbation": name, "path": rel})
        entries.append({"sample_id": f"s{i}", "task": "classification",
                        "predictions": preds})
    manifest = work / "predictions.json"
    manifest.write_text(json.dumps(entries, indent=2))

    scores_path = work / "scores.jsonl"
    run(["pcdal", "score", "--manifest", str(manifest),
         "--perturbations", ",".join(names), "--out", str(scores_path)])
    for line in scores_path.read_text().splitlines():
        rec = json.loads(line)
        print(f"  {rec['sample_id']}  score={rec['score']:.6f}")

    pool_path = work / "pool.json"
    save_pool(new_pool([f"s{i}" for i in range(3)], seed=1), pool_path)
    out = run(["pcdal", "select", "--pool", str(pool_path),
               "--strategy", "hpi", "--budget", "1",
               "--scores", str(scores_path)])
    print(f"  hpi picked: {json.loads(out)}")

    print(f"\nartifacts left in {work}")


if __name__ == "__main__":
    main()
