"""Attachment scores with punctuation exclusion and dependency-length error bins."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .treebank import Sentence, punctuation_mask

BINS = ("1", "2", "3-5", "6-10", "11-15", "16-20", ">20")


def length_bin(length: int) -> str:
    if length <= 1:
        return "1"
    if length == 2:
        return "2"
    if length <= 5:
        return "3-5"
    if length <= 10:
        return "6-10"
    if length <= 15:
        return "11-15"
    if length <= 20:
        return "16-20"
    return ">20"


@dataclass
class EvalReport:
    total: int = 0
    correct_head: int = 0
    correct_labeled: int = 0
    sentences: int = 0
    multi_root_sentences: int = 0
    fallback_attachments: int = 0
    bin_errors: dict[str, int] = field(default_factory=lambda: dict.fromkeys(BINS, 0))
    bin_totals: dict[str, int] = field(default_factory=lambda: dict.fromkeys(BINS, 0))

    @property
    def uas(self) -> float:
        return 100.0 * self.correct_head / self.total if self.total else 100.0

    @property
    def las(self) -> float:
        return 100.0 * self.correct_labeled / self.total if self.total else 100.0

    def bin_error_rates(self) -> dict[str, float | None]:
        return {b: (100.0 * self.bin_errors[b] / self.bin_totals[b] if self.bin_totals[b] else None)
                for b in BINS}

    def __iadd__(self, other: "EvalReport") -> "EvalReport":
        self.total += other.total
        self.correct_head += other.correct_head
        self.correct_labeled += other.correct_labeled
        self.sentences += other.sentences
        self.multi_root_sentences += other.multi_root_sentences
        self.fallback_attachments += other.fallback_attachments
        for b in BINS:
            self.bin_errors[b] += other.bin_errors[b]
            self.bin_totals[b] += other.bin_totals[b]
        return self

    def to_dict(self) -> dict:
        return {
            "uas": self.uas, "las": self.las, "tokens": self.total,
            "correct_head": self.correct_head, "correct_labeled": self.correct_labeled,
            "sentences": self.sentences, "multi_root_sentences": self.multi_root_sentences,
            "fallback_attachments": self.fallback_attachments,
            "length_bins": {b: {"errors": self.bin_errors[b], "total": self.bin_totals[b],
                                "error_rate": r} for b, r in self.bin_error_rates().items()},
        }


def _check(pred: Mapping[int, tuple[int, str]], gold: Sentence, mask: Sequence[bool]):
    if len(pred) != gold.n or len(mask) != gold.n or set(pred) != set(range(1, gold.n + 1)):
        raise ValueError(f"prediction covers {len(pred)} tokens, gold sentence has {gold.n}")


def bin_errors_by_length(pred: Mapping[int, tuple[int, str]], gold: Sentence,
                         mask: Sequence[bool]) -> dict[str, tuple[int, int]]:
    """(head errors, scored tokens) per gold dependency-length bin."""
    _check(pred, gold, mask)
    out = {b: [0, 0] for b in BINS}
    for tok, skip in zip(gold.tokens, mask):
        if skip:
            continue
        b = length_bin(abs(tok.head - tok.id))
        out[b][1] += 1
        if pred[tok.id][0] != tok.head:
            out[b][0] += 1
    return {b: (e, t) for b, (e, t) in out.items()}


def evaluate(pred: Mapping[int, tuple[int, str]], gold: Sentence, mask: Sequence[bool] | None = None,
             punct: str = "label") -> EvalReport:
    if mask is None:
        mask = punctuation_mask(gold, punct)
    _check(pred, gold, mask)
    rep = EvalReport(sentences=1)
    for tok, skip in zip(gold.tokens, mask):
        if skip:
            continue
        head, label = pred[tok.id]
        rep.total += 1
        if head == tok.head:
            rep.correct_head += 1
            if label == tok.deprel:
                rep.correct_labeled += 1
    if sum(1 for h, _ in pred.values() if h == 0) > 1:
        rep.multi_root_sentences = 1
    for b, (e, t) in bin_errors_by_length(pred, gold, mask).items():
        rep.bin_errors[b] = e
        rep.bin_totals[b] = t
    return rep


def evaluate_corpus(preds: Sequence[Mapping[int, tuple[int, str]]], golds: Sequence[Sentence],
                    punct: str = "label") -> EvalReport:
    if len(preds) != len(golds):
        raise ValueError(f"{len(preds)} predicted sentences, {len(golds)} gold")
    rep = EvalReport()
    for p, g in zip(preds, golds):
        rep += evaluate(p, g, punct=punct)
    return rep


def arcs_of(sentence: Sentence) -> dict[int, tuple[int, str]]:
    return sentence.gold_arcs()
