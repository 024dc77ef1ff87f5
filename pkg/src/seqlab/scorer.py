"""Token accuracy and segment-level precision/recall/F1.

Segment scoring is exact-match on (start, end, label) triples,
micro-averaged over the corpus (the conlleval convention). Counts are
kept per sentence so significance tests can swap sentence outputs
between two systems and re-derive corpus scores cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidInputError
from .tagcodec import TagScheme, decode_segments


@dataclass(frozen=True)
class MatchCounts:
    tp: int
    fp: int
    fn: int

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def token_accuracy(gold: Sequence[Sequence[str]], pred: Sequence[Sequence[str]]) -> float:
    if len(gold) != len(pred):
        raise InvalidInputError(f"sentence count mismatch: {len(gold)} vs {len(pred)}")
    correct = total = 0
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise InvalidInputError(f"sentence {i}: length mismatch {len(g)} vs {len(p)}")
        total += len(g)
        correct += sum(1 for gt, pt in zip(g, p) if gt == pt)
    if total == 0:
        raise InvalidInputError("empty corpus has no tokens to score")
    return correct / total


def sentence_counts(gold: Sequence[str], pred: Sequence[str], scheme: TagScheme) -> MatchCounts:
    if len(gold) != len(pred):
        raise InvalidInputError(f"length mismatch: {len(gold)} vs {len(pred)}")
    gold_segs = set(decode_segments(list(gold), scheme))
    pred_segs = set(decode_segments(list(pred), scheme))
    tp = len(gold_segs & pred_segs)
    return MatchCounts(tp=tp, fp=len(pred_segs) - tp, fn=len(gold_segs) - tp)


def corpus_counts(
    gold: Sequence[Sequence[str]], pred: Sequence[Sequence[str]], scheme: TagScheme
) -> list[MatchCounts]:
    if len(gold) != len(pred):
        raise InvalidInputError(f"sentence count mismatch: {len(gold)} vs {len(pred)}")
    return [sentence_counts(g, p, scheme) for g, p in zip(gold, pred)]


def prf_from_sums(tp: float, fp: float, fn: float) -> PRF:
    # 0/0 fixed to 0 throughout so the scorer is total.
    p = tp / (tp + fp) if tp + fp > 0 else 0.0
    r = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(p, r, f1)


def corpus_prf(counts: Iterable[MatchCounts]) -> PRF:
    tp = fp = fn = 0
    for c in counts:
        tp, fp, fn = tp + c.tp, fp + c.fp, fn + c.fn
    return prf_from_sums(tp, fp, fn)
