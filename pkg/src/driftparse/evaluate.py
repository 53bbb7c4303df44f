"""Scoring parsed KPI tables against ground truth.

The comparison universe is the population of candidate extraction slots
(one per scanned line in single-KPI mode); true negatives are whatever the
universe leaves after counting hits, false alarms and misses.  A row whose
value mismatches the truth counts as one false positive and one false
negative.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .parsing import KpiTable
from .preprocess import EventRecord, normalize_number


class ValueTolerance(Enum):
    EXACT_STRING = "exact"
    ROUNDED_TWO_DECIMALS = "round2"


@dataclass(frozen=True)
class EvalConfig:
    value_tolerance: ValueTolerance = ValueTolerance.ROUNDED_TWO_DECIMALS


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")


def _values_match(parsed: str, truth: str, tolerance: ValueTolerance) -> bool:
    if tolerance is ValueTolerance.EXACT_STRING:
        return parsed == truth
    return normalize_number(parsed) == normalize_number(truth)


def confusion(
    parsed: KpiTable,
    truth: KpiTable,
    universe_size: int,
    config: EvalConfig = EvalConfig(),
) -> ConfusionMatrix:
    """Slot-count confusion matrix over an explicit comparison universe."""
    parsed_map = parsed.as_dict()
    truth_map = truth.as_dict()
    tp = fp = fn = 0
    for key, value in parsed_map.items():
        if key in truth_map and _values_match(value, truth_map[key], config.value_tolerance):
            tp += 1
        else:
            fp += 1
    for key, value in truth_map.items():
        if key not in parsed_map or not _values_match(parsed_map[key], value, config.value_tolerance):
            fn += 1
    tn = universe_size - tp - fp - fn
    if tn < 0:
        raise ValueError(
            f"universe of {universe_size} too small for {tp + fp + fn} occupied slots"
        )
    return ConfusionMatrix(tp, fp, fn, tn)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ValueError("accuracy undefined on an empty universe")
    return (cm.tp + cm.tn) / cm.total


def sensitivity(cm: ConfusionMatrix) -> float:
    """Hit rate TP/(TP+FN); undefined when there are no actual positives."""
    if cm.tp + cm.fn == 0:
        raise ValueError("sensitivity undefined when tp + fn = 0")
    return cm.tp / (cm.tp + cm.fn)


def stratified_split(
    corpus: list[EventRecord],
    truth: KpiTable,
    train_fraction: float,
    seed: int,
) -> tuple[tuple[list[EventRecord], KpiTable], tuple[list[EventRecord], KpiTable]]:
    """Split events by presence of a truth row, each stratum independently.

    Deterministic for a given seed.  Errors out when either stratum is
    empty, because a stratified split over one stratum is meaningless.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    truth_events = {eid for eid, _, _ in truth.rows}
    positives = [e for e in corpus if e.event_id in truth_events]
    negatives = [e for e in corpus if e.event_id not in truth_events]
    if not positives or not negatives:
        raise ValueError("both strata must be non-empty for a stratified split")

    rng = random.Random(seed)
    train_ids: set[str] = set()
    for stratum in (positives, negatives):
        shuffled = stratum[:]
        rng.shuffle(shuffled)
        take = round(train_fraction * len(shuffled))
        train_ids.update(e.event_id for e in shuffled[:take])

    train_events = [e for e in corpus if e.event_id in train_ids]
    test_events = [e for e in corpus if e.event_id not in train_ids]
    train_truth = KpiTable([r for r in truth.rows if r[0] in train_ids])
    test_truth = KpiTable([r for r in truth.rows if r[0] not in train_ids])
    return (train_events, train_truth), (test_events, test_truth)


def format_confusion(cm: ConfusionMatrix) -> str:
    """Text rendering in the two-by-two truth-versus-parser layout."""
    lines = [
        "                     True Parsing",
        "                     Positive   Negative",
        f"Parser  Positive     {cm.tp:>8}   {cm.fp:>8}",
        f"        Negative     {cm.fn:>8}   {cm.tn:>8}",
        "",
        f"accuracy    {accuracy(cm) * 100:.1f}%",
    ]
    if cm.tp + cm.fn > 0:
        lines.append(f"sensitivity {sensitivity(cm) * 100:.1f}%")
    return "\n".join(lines)
