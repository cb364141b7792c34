"""Labeled/unlabeled pool state, stratified splitting, selection strategies,
and the round budget schedule.

Determinism rules fixed here: ties always break by ascending sample id; the
random strategy draws via the package's pcg32 with a per-round seed derived
from (base seed, round index); budget counts round half-up.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

from .rng import PCG32, mix

STRATEGIES = ("hpi", "lpi", "random", "max-entropy")


def normalize_strategy(name):
    s = str(name).lower().replace("_", "-")
    if s == "maxentropy":
        s = "max-entropy"
    if s not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}")
    return s


@dataclass
class RoundRecord:
    round: int
    strategy: str
    budget: int
    selected: list
    scores_path: str | None = None


@dataclass
class PoolState:
    seed: int
    all_ids: list
    labeled_ids: set = field(default_factory=set)
    unlabeled_ids: set = field(default_factory=set)
    rounds: list = field(default_factory=list)

    def validate(self):
        all_set = set(self.all_ids)
        if len(all_set) != len(self.all_ids):
            raise ValueError("duplicate ids in pool")
        if self.labeled_ids | self.unlabeled_ids != all_set:
            raise ValueError("labeled and unlabeled do not cover the pool")
        if self.labeled_ids & self.unlabeled_ids:
            raise ValueError("labeled and unlabeled overlap")
        seen = set()
        for rec in self.rounds:
            sel = set(rec.selected)
            if sel & seen:
                raise ValueError("round selections overlap")
            if not sel <= self.labeled_ids:
                raise ValueError("round selection outside the labeled set")
            seen |= sel


def new_pool(all_ids, seed, labeled=()):
    all_ids = list(all_ids)
    labeled = set(labeled)
    pool = PoolState(
        seed=int(seed),
        all_ids=all_ids,
        labeled_ids=labeled,
        unlabeled_ids=set(all_ids) - labeled,
    )
    pool.validate()
    return pool


def stratified_kfold(labels, k, seed):
    """Split ids into k folds with per-class counts differing by at most 1.

    labels maps id -> class label. Ids are processed in sorted order and each
    class is shuffled with its own pcg32 stream, so the result depends only on
    (labels, k, seed).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    items = dict(labels)
    if not items:
        raise ValueError("no ids to split")
    by_class = {}
    for sid in sorted(items):
        by_class.setdefault(items[sid], []).append(sid)
    smallest = min(len(v) for v in by_class.values())
    if k > smallest:
        warnings.warn(
            f"k={k} exceeds the smallest class size {smallest}; strata will be uneven",
            stacklevel=2,
        )
    folds = [[] for _ in range(k)]
    offset = 0
    for ci, cls in enumerate(sorted(by_class, key=str)):
        members = by_class[cls]
        rng = PCG32(mix(seed, ci), seq=ci)
        rng.shuffle(members)
        for i, sid in enumerate(members):
            folds[(i + offset) % k].append(sid)
        offset = (offset + len(members)) % k
    return [sorted(f) for f in folds]


def select(strategy, scores, pool: PoolState, budget, seed):
    """Pick ids to annotate next; returns them in selection (rank) order.

    hpi: descending score; lpi: ascending; max-entropy: descending entropy
    score; random: uniform without replacement. scores is an iterable of
    ScoreRecord-like objects (anything with sample_id and score) or an
    id -> score mapping; it must cover every unlabeled id for the ranked
    strategies. Ties break by ascending sample id.
    """
    strategy = normalize_strategy(strategy)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    unlabeled = sorted(pool.unlabeled_ids)
    k = min(budget, len(unlabeled))
    if strategy == "random":
        rng = PCG32(mix(seed, len(pool.rounds)))
        return rng.sample(unlabeled, k)
    if hasattr(scores, "items"):
        table = {str(i): float(v) for i, v in scores.items()}
    else:
        table = {r.sample_id: float(r.score) for r in scores}
    missing = [sid for sid in unlabeled if sid not in table]
    if missing:
        raise ValueError(f"missing scores for {len(missing)} unlabeled ids, e.g. {missing[:3]}")
    if strategy == "lpi":
        ranked = sorted(unlabeled, key=lambda sid: (table[sid], sid))
    else:  # hpi and max-entropy both take the highest scores
        ranked = sorted(unlabeled, key=lambda sid: (-table[sid], sid))
    return ranked[:k]


def advance_round(pool: PoolState, strategy, selected, scores_path=None) -> PoolState:
    """Move selected ids into the labeled set and append the round record."""
    strategy = normalize_strategy(strategy)
    selected = list(selected)
    sel = set(selected)
    if len(sel) != len(selected):
        raise ValueError("duplicate ids in selection")
    bad = sel - pool.unlabeled_ids
    if bad:
        raise ValueError(f"selection not in the unlabeled pool: {sorted(bad)[:3]}")
    rec = RoundRecord(
        round=len(pool.rounds),
        strategy=strategy,
        budget=len(selected),
        selected=selected,
        scores_path=scores_path,
    )
    out = PoolState(
        seed=pool.seed,
        all_ids=list(pool.all_ids),
        labeled_ids=pool.labeled_ids | sel,
        unlabeled_ids=pool.unlabeled_ids - sel,
        rounds=pool.rounds + [rec],
    )
    out.validate()
    return out


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def budget_schedule(total, initial_fraction, step_fraction, final_fraction):
    """Per-round annotation counts; entry 0 is the initial pool size.

    Cumulative counts are the half-up roundings of each fraction of total, so
    they track the exact fractions within 1.
    """
    if not 0 < initial_fraction <= final_fraction <= 1:
        raise ValueError("need 0 < initial <= final <= 1")
    if step_fraction <= 0:
        raise ValueError("step fraction must be > 0")
    if total < 1:
        raise ValueError("total must be >= 1")
    n_rounds = int(math.floor((final_fraction - initial_fraction) / step_fraction + 1e-9)) + 1
    cumulative = []
    for r in range(n_rounds):
        frac = initial_fraction + r * step_fraction
        cumulative.append(_round_half_up(frac * total))
    if cumulative[0] < 1:
        raise ValueError("schedule yields an empty initial pool")
    budgets = [cumulative[0]]
    for prev, cur in zip(cumulative, cumulative[1:]):
        budgets.append(cur - prev)
    return budgets


def pool_to_manifest(pool: PoolState) -> dict:
    return {
        "seed": pool.seed,
        "all_ids": list(pool.all_ids),
        "labeled_ids": sorted(pool.labeled_ids),
        "rounds": [
            {
                "round": r.round,
                "strategy": r.strategy,
                "budget": r.budget,
                "selected": list(r.selected),
                "scores_path": r.scores_path,
            }
            for r in pool.rounds
        ],
    }


def pool_from_manifest(doc: dict) -> PoolState:
    rounds = [
        RoundRecord(
            round=int(r["round"]),
            strategy=normalize_strategy(r["strategy"]),
            budget=int(r["budget"]),
            selected=list(r["selected"]),
            scores_path=r.get("scores_path"),
        )
        for r in doc.get("rounds", [])
    ]
    pool = PoolState(
        seed=int(doc["seed"]),
        all_ids=list(doc["all_ids"]),
        labeled_ids=set(doc["labeled_ids"]),
        unlabeled_ids=set(doc["all_ids"]) - set(doc["labeled_ids"]),
        rounds=rounds,
    )
    pool.validate()
    return pool


def save_pool(pool: PoolState, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pool_to_manifest(pool), fh, indent=2)
        fh.write("\n")


def load_pool(path) -> PoolState:
    with open(path, "r", encoding="utf-8") as fh:
        return pool_from_manifest(json.load(fh))
