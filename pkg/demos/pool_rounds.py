"""Run a labeled/unlabeled pool through three annotation rounds by hand.

Shows the bookkeeping the simulator automates: a budget schedule, ranked
selection against scores, the audit trail each round leaves behind, and the
JSON manifest that round-trips the whole state.
"""

import json

import numpy as np

from pcdal import (advance_round, budget_schedule, new_pool, pool_to_manifest,
                   select)


def main():
    rng = np.random.default_rng(7)
    ids = [f"s{i:03d}" for i in range(40)]
    # pretend scores from some model: a handful of hard samples stand out
    scores = {sid: float(rng.random() * 0.1) for sid in ids}
    for sid in ids[::7]:
        scores[sid] += 0.5

    budgets = budget_schedule(len(ids), 0.1, 0.2, 0.7)
    print(f"schedule for {len(ids)} samples, 10% then +20% to 70%: {budgets}")

    pool = new_pool(ids, seed=42, labeled=ids[:budgets[0]])
    print(f"round 0 starts labeled={len(pool.labeled_ids)} "
          f"unlabeled={len(pool.unlabeled_ids)}")

    for budget in budgets[1:]:
        picked = select("hpi", scores, pool, budget, seed=pool.seed)
        pool = advance_round(pool, "hpi", picked)
        print(f"  picked {picked[:4]}... -> labeled={len(pool.labeled_ids)}")

    print("\naudit trail:")
    for r in pool.rounds:
        print(f"  round {r.round} strategy={r.strategy} budget={r.budget}")

    doc = pool_to_manifest(pool)
    print(f"\nmanifest keys: {sorted(doc)}")
    print(json.dumps(doc["rounds"][0], indent=2)[:200])

    # the same budget with random selection picks different ids each round
    pool2 = new_pool(ids, seed=42, labeled=ids[:budgets[0]])
    a = select("random", None, pool2, 5, seed=1)
    pool2 = advance_round(pool2, "random", a)
    b = select("random", None, pool2, 5, seed=1)
    print(f"\nrandom rounds stay disjoint: {set(a).isdisjoint(b)}")


if __name__ == "__main__":
    main()
