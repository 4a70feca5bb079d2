"""Paired bootstrap over sentences and Holm step-down adjustment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .evaluate import evaluate
from .treebank import Sentence

ALPHAS = (0.05, 0.01, 0.001)


def sentence_counts(preds: Sequence[Mapping[int, tuple[int, str]]], gold: Sequence[Sentence],
                    punct: str = "label") -> np.ndarray:
    """Rows of (correct heads, correct head+label, scored tokens) per sentence."""
    rows = []
    for p, g in zip(preds, gold):
        r = evaluate(p, g, punct=punct)
        rows.append((r.correct_head, r.correct_labeled, r.total))
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def _stable_order(gold: Sequence[Sentence]) -> np.ndarray:
    ids = [s.sent_id if s.sent_id is not None else f"{i:012d}" for i, s in enumerate(gold)]
    return np.array(sorted(range(len(gold)), key=lambda i: ids[i]), dtype=np.int64)


def paired_bootstrap(preds_a: Sequence[Mapping[int, tuple[int, str]]],
                     preds_b: Sequence[Mapping[int, tuple[int, str]]],
                     gold: Sequence[Sentence], n_samples: int = 10000, seed: int = 0,
                     punct: str = "label", chunk: int = 500) -> dict[str, float]:
    """One-sided p-values for "A scores higher than B" on UAS and LAS.

    Sentences are resampled with replacement; p = (#samples with A <= B + 1) / (n_samples + 1).
    """
    if not (len(preds_a) == len(preds_b) == len(gold)):
        raise ValueError("both systems must cover exactly the gold sentences")
    if not gold:
        raise ValueError("empty corpus")
    order = _stable_order(gold)
    ca = sentence_counts(preds_a, gold, punct)[order]
    cb = sentence_counts(preds_b, gold, punct)[order]
    m = len(gold)
    rng = np.random.default_rng(seed)
    not_better = np.zeros(2, dtype=np.int64)
    done = 0
    while done < n_samples:
        k = min(chunk, n_samples - done)
        idx = rng.integers(0, m, size=(k, m))
        sa = ca[idx].sum(axis=1)  # (k, 3)
        sb = cb[idx].sum(axis=1)
        # integer cross-multiplication keeps the comparison exact
        for col in (0, 1):
            not_better[col] += int(np.count_nonzero(sa[:, col] * sb[:, 2] <= sb[:, col] * sa[:, 2]))
        done += k
    p = (not_better + 1) / (n_samples + 1)
    return {"uas": float(p[0]), "las": float(p[1])}


@dataclass
class HolmResult:
    adjusted: list[float]
    reject: dict[float, list[bool]]


def holm_adjust(pvalues: Sequence[float], alphas: Sequence[float] = ALPHAS) -> HolmResult:
    p = np.asarray(pvalues, dtype=np.float64)
    if p.ndim != 1 or len(p) < 1:
        raise ValueError("need at least one p-value")
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = np.argsort(p, kind="stable")
    scaled = (m - np.arange(m)) * p[order]
    adj_sorted = np.minimum(np.maximum.accumulate(scaled), 1.0)
    adjusted = np.empty(m)
    adjusted[order] = adj_sorted
    return HolmResult(adjusted.tolist(), {a: (adjusted < a).tolist() for a in alphas})


def stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "-"
