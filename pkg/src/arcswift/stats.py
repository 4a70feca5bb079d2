"""Transition-sequence length, candidate-count and scaling statistics over a corpus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .oracles import Variant, expand_swift_to_eager, oracle_sequence
from .transitions import Kind, System, apply, feasible, initial_state
from .treebank import ROOT_LABEL, Sentence, Token


@dataclass
class SentenceRow:
    index: int
    sent_id: str
    n: int
    lengths: dict[str, int]
    rarc: dict[str, int]
    reduce: dict[str, int]
    # unlabeled / labeled candidate evaluations summed over the oracle trajectory
    candidates: dict[str, int] = field(default_factory=dict)
    labeled_candidates: dict[str, int] = field(default_factory=dict)
    max_step_candidates: dict[str, int] = field(default_factory=dict)
    expansion_reduces: int = 0


def _count(seq, *kinds) -> int:
    return sum(1 for t in seq if t.kind in kinds)


def trajectory_candidates(n: int, seq, system: System, n_labels: int) -> tuple[int, int, int]:
    """(unlabeled skeletons, labeled candidates, largest per-step skeleton count) along a sequence."""
    state = initial_state(n)
    unl = lab = most = 0
    for t in seq:
        cands = feasible(state, system)
        unl += len(cands)
        lab += sum(n_labels if c.is_arc else 1 for c in cands)
        most = max(most, len(cands))
        state = apply(state, t, system)
    return unl, lab, most


def sentence_row(index: int, sentence: Sentence, variants: Sequence[Variant], n_labels: int) -> SentenceRow:
    row = SentenceRow(index, sentence.sent_id or str(index), sentence.n, {}, {}, {})
    for v in variants:
        seq = oracle_sequence(sentence, v)
        row.lengths[v.value] = len(seq)
        row.rarc[v.value] = _count(seq, Kind.RARC, Kind.RARC_K)
        row.reduce[v.value] = _count(seq, Kind.REDUCE)
        unl, lab, most = trajectory_candidates(sentence.n, seq, v.system, n_labels)
        row.candidates[v.value] = unl
        row.labeled_candidates[v.value] = lab
        row.max_step_candidates[v.value] = most
        if v is Variant.ASW:
            row.expansion_reduces = _count(expand_swift_to_eager(seq), Kind.REDUCE)
    return row


def check_length_identities(row: SentenceRow) -> list[str]:
    """Violations of the per-sentence sequence-length identities (empty when all hold)."""
    bad = []
    n = row.n
    for v, length in row.lengths.items():
        if v == "asw" and length != 2 * n - row.rarc[v]:
            bad.append(f"{row.sent_id}: asw length {length} != 2n - #RArc = {2 * n - row.rarc[v]}")
        if v in ("aeS", "aeR") and length != 2 * n - row.rarc[v] + row.reduce[v]:
            bad.append(f"{row.sent_id}: {v} length {length} != 2n - #RArc + #Reduce")
    if "asw" in row.lengths and "aeR" in row.lengths:
        if row.lengths["asw"] != row.lengths["aeR"] - row.expansion_reduces:
            bad.append(f"{row.sent_id}: asw length != aeR length - #Reduce(expanded)")
    for v, length in row.lengths.items():
        if length < n:
            bad.append(f"{row.sent_id}: {v} length {length} < n = {n}")
    return bad


def corpus_rows(corpus: Sequence[Sentence], variants: Sequence[Variant], n_labels: int,
                jobs: int = 1) -> list[SentenceRow]:
    from .parallel import parallel_map

    args = [(i, s, tuple(variants), n_labels) for i, s in enumerate(corpus)]
    return parallel_map(_row_star, args, jobs)


def _row_star(a):
    return sentence_row(*a)


@dataclass
class EfficiencyReport:
    variants: list[str]
    mean_length: dict[str, float]
    length_ratios: dict[str, float]
    mean_candidates_per_step: dict[str, float]
    mean_labeled_candidates_per_step: dict[str, float]
    mean_candidates_per_sentence: dict[str, float]
    candidate_ratios: dict[str, float]
    labeled_candidate_ratios: dict[str, float]
    max_candidates_per_step: dict[str, int]
    identity_violations: list[str]
    sentences: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ratios(values: dict[str, float]) -> dict[str, float]:
    out = {}
    if "asw" in values:
        for base in ("aeS", "aeR", "asd", "ah"):
            if base in values and values[base]:
                out[f"asw/{base}"] = values["asw"] / values[base]
    return out


def efficiency_report(corpus: Sequence[Sentence], variants: Sequence[Variant | str] = tuple(Variant),
                      n_labels: int = 1, jobs: int = 1,
                      rows: list[SentenceRow] | None = None) -> tuple[EfficiencyReport, list[SentenceRow]]:
    variants = [Variant(v) for v in variants]
    if rows is None:
        rows = corpus_rows(corpus, variants, n_labels, jobs)
    names = [v.value for v in variants]
    steps = {v: sum(r.lengths[v] for r in rows) for v in names}
    mean_len = {v: steps[v] / len(rows) for v in names}
    cps = {v: sum(r.candidates[v] for r in rows) / max(steps[v], 1) for v in names}
    lcps = {v: sum(r.labeled_candidates[v] for r in rows) / max(steps[v], 1) for v in names}
    cpsent = {v: sum(r.candidates[v] for r in rows) / len(rows) for v in names}
    maxc = {v: max(r.max_step_candidates[v] for r in rows) for v in names}
    violations = [msg for r in rows for msg in check_length_identities(r)]
    rep = EfficiencyReport(names, mean_len, _ratios(mean_len), cps, lcps, cpsent, _ratios(cps), _ratios(lcps),
                           maxc, violations, len(rows))
    return rep, rows


def sequence_length_report(corpus: Sequence[Sentence], variants: Sequence[Variant | str] = tuple(Variant),
                           jobs: int = 1) -> dict:
    rep, rows = efficiency_report(corpus, variants, jobs=jobs)
    return {"mean_length": rep.mean_length, "length_ratios": rep.length_ratios,
            "identity_violations": rep.identity_violations, "rows": rows}


def candidate_count_report(corpus: Sequence[Sentence], variants: Sequence[Variant | str] = tuple(Variant),
                           n_labels: int = 1, model=None, jobs: int = 1) -> dict:
    """Candidate statistics along oracle trajectories, or along decoded ones when `model` is given."""
    if model is None:
        rep, _ = efficiency_report(corpus, variants, n_labels=n_labels, jobs=jobs)
        return {"per_step": rep.mean_candidates_per_step, "labeled_per_step": rep.mean_labeled_candidates_per_step,
                "per_sentence": rep.mean_candidates_per_sentence, "ratios": rep.candidate_ratios,
                "labeled_ratios": rep.labeled_candidate_ratios, "max_per_step": rep.max_candidates_per_step}
    from .decode import greedy_parse

    unl = lab = steps = 0
    for s in corpus:
        res = greedy_parse(s, model)
        unl += res.candidates_unlabeled
        lab += res.candidates_labeled
        steps += len(res.transitions)
    key = model.system.short
    return {"per_step": {key: unl / max(steps, 1)}, "labeled_per_step": {key: lab / max(steps, 1)},
            "per_sentence": {key: unl / max(len(corpus), 1)}}


@dataclass
class ScalingFit:
    exponent: float
    coefficient: float
    points: list[tuple[int, int]]


def fit_power_law(points: Sequence[tuple[int, int]]) -> ScalingFit:
    """Least-squares fit of total ~ a * n^b on log-log axes."""
    distinct = {n for n, _ in points}
    if len(distinct) < 10:
        raise ValueError(f"need at least 10 distinct sentence lengths to fit, got {len(distinct)}")
    x = np.log([n for n, _ in points])
    y = np.log([max(t, 1) for _, t in points])
    b, log_a = np.polyfit(x, y, 1)
    return ScalingFit(float(b), float(math.exp(log_a)), list(points))


def runtime_scaling_report(corpus: Sequence[Sentence]) -> ScalingFit:
    """Per-sentence total candidate evaluations under arc-swift oracle replay, fitted against n."""
    points = []
    for s in corpus:
        seq = oracle_sequence(s, Variant.ASW)
        unl, _, _ = trajectory_candidates(s.n, seq, System.ARC_SWIFT, 1)
        points.append((s.n, unl))
    return fit_power_law(points)


def right_branching_tree(n: int) -> Sentence:
    """Chain 0 -> 1 -> 2 -> ... -> n: every arc-swift attachment leaves the stack one deeper."""
    toks = tuple(Token(i, f"w{i}", f"w{i}", "X", "X", i - 1, ROOT_LABEL if i == 1 else "dep")
                 for i in range(1, n + 1))
    return Sentence(toks, (f"# sent_id = chain-{n}",))


def flat_tree(n: int) -> Sentence:
    """Every token attached directly to the root."""
    toks = tuple(Token(i, f"w{i}", f"w{i}", "X", "X", 0, ROOT_LABEL) for i in range(1, n + 1))
    return Sentence(toks, (f"# sent_id = flat-{n}",))


def adversarial_corpus(lengths: Iterable[int] = range(20, 201, 10)) -> list[Sentence]:
    return [right_branching_tree(n) for n in lengths]
